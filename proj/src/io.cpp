#include "permlab/io.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace permlab {

namespace {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& what) {
    throw FormatError(origin + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

const char* mask_name(MaskMode m) { return m == MaskMode::causal ? "causal" : "cmf"; }
const char* padding_name(Padding p) { return p == Padding::none ? "none" : "scratch"; }

MaskMode parse_mask(const std::string& s) {
    if (s == "causal") return MaskMode::causal;
    if (s == "cmf") return MaskMode::cmf;
    throw FormatError("unknown mask mode: " + s);
}

Padding parse_padding(const std::string& s) {
    if (s == "none") return Padding::none;
    if (s == "scratch") return Padding::scratch;
    throw FormatError("unknown padding mode: " + s);
}

void write_checkpoint(const Checkpoint& ckpt, std::ostream& os) {
    const ModelWeights& w = ckpt.weights;
    os << "DTX1\n";
    os << "d=" << w.d << " depth=" << w.depth() << " mask=" << mask_name(w.mask)
       << " pad=" << padding_name(w.padding) << " readout=" << w.readout_rows.lo << ":"
       << w.readout_rows.hi << " seed=" << ckpt.seed << " step=" << ckpt.step << "\n";
    auto emit = [&](const std::string& name, const Matrix& m) {
        os << "MAT " << name << " " << m.rows() << " " << m.cols() << "\n";
        for (std::size_t r = 0; r < m.rows(); ++r) {
            for (std::size_t c = 0; c < m.cols(); ++c) {
                if (c) os << ' ';
                os << fmt17(m.at(r, c));
            }
            os << '\n';
        }
    };
    for (std::size_t i = 0; i < w.attn.size(); ++i) emit("A" + std::to_string(i + 1), w.attn[i]);
    emit("W", w.w);
}

Checkpoint read_checkpoint(std::istream& is, const std::string& origin) {
    std::string line;
    std::size_t lineno = 0;
    auto next_line = [&]() -> bool {
        ++lineno;
        return static_cast<bool>(std::getline(is, line));
    };

    if (!next_line() || line != "DTX1") fail(origin, lineno, "missing DTX1 tag");
    if (!next_line()) fail(origin, lineno, "missing header line");

    Checkpoint ckpt;
    std::size_t depth = 0;
    {
        std::istringstream hs(line);
        std::string tok;
        bool have_d = false, have_depth = false;
        while (hs >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) fail(origin, lineno, "bad header token '" + tok + "'");
            const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
            try {
                if (key == "d") { ckpt.weights.d = std::stoull(val); have_d = true; }
                else if (key == "depth") { depth = std::stoull(val); have_depth = true; }
                else if (key == "mask") ckpt.weights.mask = parse_mask(val);
                else if (key == "pad") ckpt.weights.padding = parse_padding(val);
                else if (key == "seed") ckpt.seed = std::stoull(val);
                else if (key == "step") ckpt.step = std::stoull(val);
                else if (key == "readout") {
                    const auto colon = val.find(':');
                    if (colon == std::string::npos) throw FormatError("readout needs lo:hi");
                    ckpt.weights.readout_rows.lo = std::stoull(val.substr(0, colon));
                    ckpt.weights.readout_rows.hi = std::stoull(val.substr(colon + 1));
                } else fail(origin, lineno, "unknown header key '" + key + "'");
            } catch (const std::invalid_argument&) {
                fail(origin, lineno, "bad value for '" + key + "'");
            }
        }
        if (!have_d || !have_depth) fail(origin, lineno, "header must carry d and depth");
    }

    std::vector<Matrix> mats;
    std::vector<std::string> names;
    while (next_line()) {
        if (line.empty()) continue;
        std::istringstream ms(line);
        std::string tag, name;
        std::size_t rows = 0, cols = 0;
        if (!(ms >> tag >> name >> rows >> cols) || tag != "MAT")
            fail(origin, lineno, "expected 'MAT <name> <rows> <cols>', got '" + line + "'");
        Matrix m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            if (!next_line()) fail(origin, lineno, "truncated matrix " + name);
            std::istringstream rs(line);
            for (std::size_t c = 0; c < cols; ++c)
                if (!(rs >> m.at(r, c)))
                    fail(origin, lineno, "bad entry at " + name + "[" + std::to_string(r) + "," +
                                             std::to_string(c) + "]");
        }
        mats.push_back(std::move(m));
        names.push_back(name);
    }

    if (mats.size() != depth + 1)
        fail(origin, lineno,
             "expected " + std::to_string(depth + 1) + " matrices, found " +
                 std::to_string(mats.size()));
    for (std::size_t i = 0; i < depth; ++i) {
        if (names[i] != "A" + std::to_string(i + 1))
            fail(origin, lineno, "expected A" + std::to_string(i + 1) + ", found " + names[i]);
        ckpt.weights.attn.push_back(std::move(mats[i]));
    }
    if (names.back() != "W") fail(origin, lineno, "last matrix must be W");
    ckpt.weights.w = std::move(mats.back());
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    write_checkpoint(ckpt, os);
    if (!os) throw FormatError("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path);
    return read_checkpoint(is, path);
}

void save_bundle_meta(const ConstructionBundle& bundle, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    os << "name=" << bundle.name << "\n";
    os << "beta1=" << fmt17(bundle.beta1) << "\n";
    os << "beta2=" << fmt17(bundle.beta2) << "\n";
    os << "expected_rows=" << bundle.expected_rows.lo << ":" << bundle.expected_rows.hi << "\n";
    os << "expected_col0=" << bundle.expected_col0 << "\n";
    os << "expected_level=" << bundle.expected_level() << "\n";
}

ConstructionBundle load_bundle(const std::string& checkpoint_path) {
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    const std::string meta_path = checkpoint_path + ".meta";
    std::ifstream is(meta_path);
    if (!is) throw FormatError("cannot open " + meta_path);

    ConstructionBundle bundle;
    bundle.wts = ckpt.weights;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(meta_path, lineno, "expected key=value");
        const std::string key = line.substr(0, eq), val = line.substr(eq + 1);
        if (key == "name") bundle.name = val;
        else if (key == "beta1") bundle.beta1 = std::stod(val);
        else if (key == "beta2") bundle.beta2 = std::stod(val);
        else if (key == "expected_col0") bundle.expected_col0 = std::stoull(val);
        else if (key == "expected_level") {
            if (std::stoull(val) != bundle.wts.depth())
                fail(meta_path, lineno, "expected_level disagrees with checkpoint depth");
        } else if (key == "expected_rows") {
            const auto colon = val.find(':');
            if (colon == std::string::npos) fail(meta_path, lineno, "expected_rows needs lo:hi");
            bundle.expected_rows.lo = std::stoull(val.substr(0, colon));
            bundle.expected_rows.hi = std::stoull(val.substr(colon + 1));
        } else fail(meta_path, lineno, "unknown key '" + key + "'");
    }
    return bundle;
}

void write_heatmap(const Matrix& a, const std::string& pgm_path, const std::string& csv_path) {
    const double scale = max_abs(a);
    std::ofstream pgm(pgm_path);
    if (!pgm) throw FormatError("cannot open " + pgm_path + " for writing");
    pgm << "P2\n" << a.cols() << " " << a.rows() << "\n255\n";
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) {
            const int v = scale > 0.0
                              ? static_cast<int>(std::lround(std::abs(a.at(r, c)) / scale * 255.0))
                              : 0;
            pgm << v << (c + 1 < a.cols() ? ' ' : '\n');
        }
    }

    std::ofstream csv(csv_path);
    if (!csv) throw FormatError("cannot open " + csv_path + " for writing");
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c)
            csv << fmt17(a.at(r, c)) << (c + 1 < a.cols() ? ',' : '\n');
    }
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        // trim
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(path, lineno, "expected key=value");
        auto trim = [](std::string s) {
            const auto sb = s.find_first_not_of(" \t");
            if (sb == std::string::npos) return std::string();
            const auto se = s.find_last_not_of(" \t");
            return s.substr(sb, se - sb + 1);
        };
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

}  // namespace permlab
