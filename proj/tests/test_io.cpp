#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "permlab/io.hpp"

using namespace permlab;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct TempDir {
    std::filesystem::path dir;

    TempDir() {
        dir = std::filesystem::temp_directory_path() /
              ("permlab_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(dir);
    }
    ~TempDir() { std::filesystem::remove_all(dir); }

    std::string path(const std::string& name) const { return (dir / name).string(); }
};

Checkpoint sample_checkpoint() {
    Rng rng(404);
    Checkpoint ckpt;
    ckpt.weights = init_weights(3, 2, MaskMode::causal, Padding::scratch, 0.02, rng);
    ckpt.seed = 987654321;
    ckpt.step = 4096;
    return ckpt;
}

}  // namespace

TEST_CASE("checkpoint round trip is bitwise and byte identical") {
    TempDir tmp;
    const Checkpoint ckpt = sample_checkpoint();
    const std::string p1 = tmp.path("a.dtx"), p2 = tmp.path("b.dtx");
    save_checkpoint(ckpt, p1);

    const Checkpoint back = load_checkpoint(p1);
    CHECK(back.weights.d == 3);
    CHECK(back.weights.depth() == 2);
    CHECK(back.weights.mask == MaskMode::causal);
    CHECK(back.weights.padding == Padding::scratch);
    CHECK(back.weights.readout_rows == ckpt.weights.readout_rows);
    CHECK(back.seed == ckpt.seed);
    CHECK(back.step == ckpt.step);
    CHECK(back.weights.attn[0] == ckpt.weights.attn[0]);
    CHECK(back.weights.attn[1] == ckpt.weights.attn[1]);
    CHECK(back.weights.w == ckpt.weights.w);

    save_checkpoint(back, p2);
    CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("checkpoint format errors carry file and line") {
    TempDir tmp;

    {
        std::ofstream os(tmp.path("bad_tag.dtx"));
        os << "DTX9\nd=3 depth=0\n";
    }
    CHECK_THROWS_WITH_AS(load_checkpoint(tmp.path("bad_tag.dtx")),
                         doctest::Contains("1: missing DTX1 tag"), FormatError);

    {
        std::ofstream os(tmp.path("bad_header.dtx"));
        os << "DTX1\nd=3 depth=zzz\n";
    }
    CHECK_THROWS_WITH_AS(load_checkpoint(tmp.path("bad_header.dtx")),
                         doctest::Contains("2:"), FormatError);

    {
        std::ofstream os(tmp.path("truncated.dtx"));
        os << "DTX1\nd=3 depth=1 mask=cmf pad=none readout=0:3 seed=0 step=0\n"
           << "MAT A1 9 9\n1 2 3 4 5 6 7 8 9\n";
    }
    CHECK_THROWS_WITH_AS(load_checkpoint(tmp.path("truncated.dtx")),
                         doctest::Contains("truncated matrix A1"), FormatError);

    {
        std::ofstream os(tmp.path("missing_w.dtx"));
        os << "DTX1\nd=3 depth=1 mask=cmf pad=none readout=0:3 seed=0 step=0\n"
           << "MAT A1 1 1\n0\n";
    }
    CHECK_THROWS_AS(load_checkpoint(tmp.path("missing_w.dtx")), FormatError);

    CHECK_THROWS_AS(load_checkpoint(tmp.path("does_not_exist.dtx")), FormatError);
}

TEST_CASE("17 significant digits survive the trip") {
    TempDir tmp;
    Checkpoint ckpt = sample_checkpoint();
    ckpt.weights.w.at(0, 0) = 0.1;  // not exactly representable
    ckpt.weights.w.at(0, 1) = 1.0 / 3.0;
    ckpt.weights.w.at(0, 2) = -1e-300;
    save_checkpoint(ckpt, tmp.path("digits.dtx"));
    const Checkpoint back = load_checkpoint(tmp.path("digits.dtx"));
    CHECK(back.weights.w == ckpt.weights.w);
}

TEST_CASE("bundle meta sidecar round trip re-verifies") {
    TempDir tmp;
    const ConstructionBundle bundle = build_thm2(4, 40.0, 40.0);
    const std::string ck = tmp.path("thm2.dtx");
    save_checkpoint(Checkpoint{bundle.wts, 0, 0}, ck);
    save_bundle_meta(bundle, ck + ".meta");

    const ConstructionBundle back = load_bundle(ck);
    CHECK(back.name == "thm2_cmf");
    CHECK(back.beta1 == 40.0);
    CHECK(back.beta2 == 40.0);
    CHECK(back.expected_rows == bundle.expected_rows);
    CHECK(back.expected_col0 == bundle.expected_col0);

    Rng rng(12);
    CHECK(verify(back, 8, rng, 1e-6).pass);
}

TEST_CASE("heatmap emits a valid P2 PGM and a raw csv") {
    TempDir tmp;
    Matrix a(2, 3);
    a.at(0, 0) = -4.0;
    a.at(1, 2) = 2.0;
    write_heatmap(a, tmp.path("h.pgm"), tmp.path("h.csv"));

    std::ifstream pgm(tmp.path("h.pgm"));
    std::string magic;
    std::size_t w = 0, h = 0;
    int maxval = 0;
    REQUIRE(static_cast<bool>(pgm >> magic >> w >> h >> maxval));
    CHECK(magic == "P2");
    CHECK(w == 3);
    CHECK(h == 2);
    CHECK(maxval == 255);
    std::vector<int> px(6, -1);
    for (int& v : px) REQUIRE(static_cast<bool>(pgm >> v));
    CHECK(px[0] == 255);  // |-4| is the max
    CHECK(px[1] == 0);
    CHECK(px[5] == 128);  // 2/4 * 255 rounded

    const std::string csv = slurp(tmp.path("h.csv"));
    CHECK(csv == "-4,0,0\n0,0,2\n");
}

TEST_CASE("config file parsing: comments, blanks, trimming, errors") {
    TempDir tmp;
    {
        std::ofstream os(tmp.path("run.cfg"));
        os << "# run settings\n"
           << "\n"
           << "d=10\n"
           << "  mask = causal  # inline comment\n"
           << "steps=8192\n";
    }
    const auto kv = read_config_file(tmp.path("run.cfg"));
    REQUIRE(kv.size() == 3);
    CHECK(kv[0] == std::pair<std::string, std::string>{"d", "10"});
    CHECK(kv[1] == std::pair<std::string, std::string>{"mask", "causal"});
    CHECK(kv[2] == std::pair<std::string, std::string>{"steps", "8192"});

    {
        std::ofstream os(tmp.path("broken.cfg"));
        os << "steps\n";
    }
    CHECK_THROWS_WITH_AS(read_config_file(tmp.path("broken.cfg")),
                         doctest::Contains("1: expected key=value"), FormatError);
    CHECK_THROWS_AS(read_config_file(tmp.path("nope.cfg")), FormatError);
}

TEST_CASE("name round trips for enums") {
    CHECK(parse_mask(mask_name(MaskMode::causal)) == MaskMode::causal);
    CHECK(parse_mask(mask_name(MaskMode::cmf)) == MaskMode::cmf);
    CHECK(parse_padding(padding_name(Padding::none)) == Padding::none);
    CHECK(parse_padding(padding_name(Padding::scratch)) == Padding::scratch);
    CHECK_THROWS_AS(parse_mask("softmax"), FormatError);
    CHECK_THROWS_AS(parse_padding("left"), FormatError);
}
