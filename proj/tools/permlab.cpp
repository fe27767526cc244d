// permlab: inverse-permutation experiments with a disentangled attention-only
// transformer. Subcommands: construct, verify, train, eval, probe, gradcheck,
// heatmap.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "permlab/constructions.hpp"
#include "permlab/io.hpp"
#include "permlab/probe.hpp"
#include "permlab/training.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFormat = 2;
constexpr int kExitVerification = 3;
constexpr int kExitDivergence = 4;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("PERMLAB_SEED")) return std::strtoull(env, nullptr, 10);
    return 0;
}

struct MetricsLog {
    std::string path;

    void header() const {
        std::ofstream os(path);
        os << "step,mse\n";
    }
    // Append + flush per eval so a crash keeps everything logged so far.
    static void hook(std::size_t step, double mse, void* ctx) {
        auto* self = static_cast<MetricsLog*>(ctx);
        std::ofstream os(self->path, std::ios::app);
        char buf[64];
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", step, mse);
        os << buf;
        os.flush();
        std::fprintf(stderr, "step=%zu mse=%.6g\n", step, mse);
    }
};

int cmd_construct(const std::string& name, std::size_t d, double beta1, double beta2,
                  const std::string& out) {
    const permlab::ConstructionBundle bundle = permlab::build_construction(name, d, beta1, beta2);
    permlab::save_checkpoint(permlab::Checkpoint{bundle.wts, 0, 0}, out);
    permlab::save_bundle_meta(bundle, out + ".meta");
    std::printf("construct name=%s d=%zu beta1=%g beta2=%g out=%s\n", name.c_str(), d, beta1,
                beta2, out.c_str());
    return kExitOk;
}

int cmd_verify(const std::string& ckpt_path, std::size_t trials, double tol, std::uint64_t seed) {
    const permlab::ConstructionBundle bundle = permlab::load_bundle(ckpt_path);
    permlab::Rng rng(seed);
    const permlab::VerificationReport report = permlab::verify(bundle, trials, rng, tol);
    std::printf("verify name=%s trials=%zu tol=%g max_error=%.6g result=%s\n",
                bundle.name.c_str(), trials, tol, report.max_error,
                report.pass ? "pass" : "fail");
    return report.pass ? kExitOk : kExitVerification;
}

int cmd_eval(const std::string& ckpt_path, std::size_t n, std::uint64_t seed) {
    const permlab::Checkpoint ckpt = permlab::load_checkpoint(ckpt_path);
    permlab::Rng rng(seed);
    const double mse = permlab::evaluate(ckpt.weights, n, rng);
    std::printf("eval n=%zu mse=%.17g\n", n, mse);
    return kExitOk;
}

int cmd_gradcheck(std::size_t d, std::size_t depth, const std::string& mask, double eps,
                  double tol, std::size_t batch, std::uint64_t seed) {
    permlab::Rng rng(seed);
    permlab::ModelWeights wts = permlab::init_weights(d, depth, permlab::parse_mask(mask),
                                                      permlab::Padding::none, 0.02, rng);
    std::vector<permlab::TaskInstance> instances;
    for (std::size_t i = 0; i < batch; ++i)
        instances.push_back(permlab::sample_instance(d, rng, permlab::Padding::none));
    const permlab::Gradients analytic = permlab::grad(wts, instances);
    const permlab::Gradients numeric = permlab::finite_diff_grad(wts, instances, eps);
    const double err = permlab::max_rel_error(analytic, numeric);
    std::printf("gradcheck d=%zu depth=%zu mask=%s eps=%g max_rel_error=%.6g\n", d, depth,
                mask.c_str(), eps, err);
    return err < tol ? kExitOk : kExitVerification;
}

int cmd_probe(const std::string& ckpt_path, const std::string& mode, std::uint64_t seed,
              double tol, std::size_t trials) {
    const permlab::Checkpoint ckpt = permlab::load_checkpoint(ckpt_path);
    const permlab::ModelWeights& wts = ckpt.weights;
    permlab::Rng rng(seed);
    const std::size_t d = wts.d;

    if (mode == "scan") {
        const permlab::TaskInstance inst = permlab::sample_instance(d, rng, wts.padding);
        const auto stream = permlab::forward(wts, permlab::assemble_input(inst).h0);
        const auto matches = permlab::scan_blocks(stream, inst.y, tol);
        for (const auto& m : matches)
            std::printf("match level=%zu row=%zu col=%zu err=%.6g\n", m.level, m.row_offset,
                        m.col_offset, m.max_abs_err);
        std::printf("scan tol=%g matches=%zu result=%s\n", tol, matches.size(),
                    matches.empty() ? "fail" : "pass");
        return matches.empty() ? kExitVerification : kExitOk;
    }
    if (mode == "lemma1") {
        std::size_t failures = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            const permlab::TaskInstance inst = permlab::sample_instance(d, rng, wts.padding);
            const permlab::Matrix h0 = permlab::assemble_input(inst).h0;
            const std::size_t r = 1 + rng.uniform_index(h0.rows() - 1);
            permlab::Matrix row(1, h0.cols());
            for (std::size_t c = 0; c < h0.cols(); ++c) row.at(0, c) = rng.gaussian();
            const auto verdict = permlab::lemma1_check(wts, h0, r, row);
            if (!verdict.pass) {
                ++failures;
                std::printf("lemma1 trial=%zu r=%zu first_diff=(%zu,%zu,%zu) result=fail\n", t, r,
                            verdict.level, verdict.row, verdict.col);
            }
        }
        std::printf("lemma1 trials=%zu failures=%zu result=%s\n", trials, failures,
                    failures == 0 ? "pass" : "fail");
        return failures == 0 ? kExitOk : kExitVerification;
    }
    if (mode == "witness") {
        std::size_t failures = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            permlab::Permutation perm = permlab::sample_permutation(d, rng);
            while (perm.is_identity()) perm = permlab::sample_permutation(d, rng);
            const auto report = permlab::theorem1_witness(wts, permlab::to_matrix(perm), rng);
            if (!report.pass) {
                ++failures;
                std::printf(
                    "witness trial=%zu i=%zu j=%zu prefix_invariant=%d no_common_block=%d "
                    "result=fail\n",
                    t, report.witness_row, report.witness_col, int(report.prefix_invariant),
                    int(report.no_common_block));
            }
        }
        std::printf("witness trials=%zu failures=%zu result=%s\n", trials, failures,
                    failures == 0 ? "pass" : "fail");
        return failures == 0 ? kExitOk : kExitVerification;
    }
    std::fprintf(stderr, "error: unknown probe mode '%s'\n", mode.c_str());
    return kExitUsage;
}

int cmd_heatmap(const std::string& ckpt_path, std::size_t layer, const std::string& out) {
    const permlab::Checkpoint ckpt = permlab::load_checkpoint(ckpt_path);
    const permlab::ModelWeights& wts = ckpt.weights;
    const permlab::Matrix* m = nullptr;
    if (layer == 0) m = &wts.w;
    else if (layer <= wts.depth()) m = &wts.attn[layer - 1];
    else {
        std::fprintf(stderr, "error: layer %zu out of range (0=W, 1..%zu)\n", layer, wts.depth());
        return kExitUsage;
    }
    permlab::write_heatmap(*m, out, out + ".csv");
    std::printf("heatmap layer=%zu pgm=%s csv=%s.csv\n", layer, out.c_str(), out.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"inverse-permutation transformer lab"};
    app.require_subcommand(1);

    // construct
    auto* construct = app.add_subcommand("construct", "build theorem weights as a checkpoint");
    std::string c_name;
    std::size_t c_d = 10;
    double c_beta = 50.0, c_beta1 = -1.0, c_beta2 = -1.0;
    std::string c_out = "construction.dtx";
    construct->add_option("--name", c_name, "thm2_cmf | thm3_scratch | antidiag_cmf")->required();
    construct->add_option("--d", c_d, "permutation dimension");
    construct->add_option("--beta", c_beta, "gain used for both layers");
    construct->add_option("--beta1", c_beta1, "layer-1 gain (overrides --beta)");
    construct->add_option("--beta2", c_beta2, "layer-2 gain (overrides --beta)");
    construct->add_option("--out", c_out, "checkpoint path (sidecar: <out>.meta)");

    // verify
    auto* verify = app.add_subcommand("verify", "re-verify a constructed checkpoint");
    std::string v_ckpt;
    std::size_t v_trials = 100;
    double v_tol = 1e-6;
    std::uint64_t v_seed = default_seed();
    verify->add_option("--checkpoint", v_ckpt)->required();
    verify->add_option("--trials", v_trials);
    verify->add_option("--tol", v_tol);
    verify->add_option("--seed", v_seed);

    // train
    auto* train = app.add_subcommand("train", "train from scratch");
    permlab::TrainConfig cfg;
    cfg.seed = default_seed();
    cfg.readout_rows = permlab::RowRange{0, 0};  // resolved to [0, d) by default
    std::string t_mask = "cmf", t_padding = "none", t_optimizer = "adam";
    std::string t_out = "model.dtx", t_metrics = "metrics.csv", t_config;
    std::size_t t_readout_lo = 0, t_readout_hi = 0;
    train->add_option("--config", t_config, "key=value config file (flags override)");
    train->add_option("--d", cfg.d);
    train->add_option("--depth", cfg.depth);
    train->add_option("--mask", t_mask, "causal | cmf");
    train->add_option("--padding", t_padding, "none | scratch");
    train->add_option("--steps", cfg.steps);
    train->add_option("--batch", cfg.batch);
    train->add_option("--seed", cfg.seed);
    train->add_option("--optimizer", t_optimizer, "adam | sgd");
    train->add_option("--lr", cfg.learning_rate);
    train->add_option("--beta-m", cfg.beta_m);
    train->add_option("--beta-v", cfg.beta_v);
    train->add_option("--eps", cfg.eps);
    train->add_option("--init-scale", cfg.init_scale);
    train->add_option("--readout-lo", t_readout_lo);
    train->add_option("--readout-hi", t_readout_hi);
    train->add_option("--eval-every", cfg.eval_every);
    train->add_option("--eval-batch", cfg.eval_batch);
    train->add_option("--out", t_out);
    train->add_option("--metrics", t_metrics);

    // eval
    auto* eval = app.add_subcommand("eval", "mean MSE of a checkpoint on fresh instances");
    std::string e_ckpt;
    std::size_t e_n = 1024;
    std::uint64_t e_seed = default_seed();
    eval->add_option("--checkpoint", e_ckpt)->required();
    eval->add_option("--n", e_n);
    eval->add_option("--seed", e_seed);

    // probe
    auto* probe = app.add_subcommand("probe", "mechanistic probes on a checkpoint");
    std::string p_ckpt, p_mode = "scan";
    std::uint64_t p_seed = default_seed();
    double p_tol = 1e-6;
    std::size_t p_trials = 100;
    probe->add_option("--checkpoint", p_ckpt)->required();
    probe->add_option("--mode", p_mode, "scan | lemma1 | witness");
    probe->add_option("--seed", p_seed);
    probe->add_option("--tol", p_tol, "block-match tolerance for scan");
    probe->add_option("--trials", p_trials);

    // gradcheck
    auto* gradcheck = app.add_subcommand("gradcheck", "analytic vs finite-difference gradients");
    std::size_t g_d = 3, g_depth = 2, g_batch = 4;
    std::string g_mask = "cmf";
    double g_eps = 1e-5, g_tol = 1e-5;
    std::uint64_t g_seed = default_seed();
    gradcheck->add_option("--d", g_d);
    gradcheck->add_option("--depth", g_depth);
    gradcheck->add_option("--mask", g_mask);
    gradcheck->add_option("--eps", g_eps);
    gradcheck->add_option("--tol", g_tol);
    gradcheck->add_option("--batch", g_batch);
    gradcheck->add_option("--seed", g_seed);

    // heatmap
    auto* heatmap = app.add_subcommand("heatmap", "grayscale PGM + CSV of one weight matrix");
    std::string h_ckpt, h_out = "heatmap.pgm";
    std::size_t h_layer = 1;
    heatmap->add_option("--checkpoint", h_ckpt)->required();
    heatmap->add_option("--layer", h_layer, "1..depth for A^(i), 0 for W");
    heatmap->add_option("--out", h_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*construct)
            return cmd_construct(c_name, c_d, c_beta1 >= 0 ? c_beta1 : c_beta,
                                 c_beta2 >= 0 ? c_beta2 : c_beta, c_out);
        if (*verify) return cmd_verify(v_ckpt, v_trials, v_tol, v_seed);
        if (*train) {
            if (!t_config.empty()) {
                // File supplies defaults; command-line flags win. Unknown keys
                // are rejected, not ignored.
                for (const auto& [key, val] : permlab::read_config_file(t_config)) {
                    const bool flagged = train->count("--" + key) > 0;
                    auto u64 = [&] { return std::stoull(val); };
                    auto f64 = [&] { return std::stod(val); };
                    if (key == "d") { if (!flagged) cfg.d = u64(); }
                    else if (key == "depth") { if (!flagged) cfg.depth = u64(); }
                    else if (key == "mask") { if (!flagged) t_mask = val; }
                    else if (key == "padding") { if (!flagged) t_padding = val; }
                    else if (key == "steps") { if (!flagged) cfg.steps = u64(); }
                    else if (key == "batch") { if (!flagged) cfg.batch = u64(); }
                    else if (key == "seed") { if (!flagged) cfg.seed = u64(); }
                    else if (key == "optimizer") { if (!flagged) t_optimizer = val; }
                    else if (key == "lr") { if (!flagged) cfg.learning_rate = f64(); }
                    else if (key == "beta-m") { if (!flagged) cfg.beta_m = f64(); }
                    else if (key == "beta-v") { if (!flagged) cfg.beta_v = f64(); }
                    else if (key == "eps") { if (!flagged) cfg.eps = f64(); }
                    else if (key == "init-scale") { if (!flagged) cfg.init_scale = f64(); }
                    else if (key == "readout-lo") { if (!flagged) t_readout_lo = u64(); }
                    else if (key == "readout-hi") { if (!flagged) t_readout_hi = u64(); }
                    else if (key == "eval-every") { if (!flagged) cfg.eval_every = u64(); }
                    else if (key == "eval-batch") { if (!flagged) cfg.eval_batch = u64(); }
                    else if (key == "out") { if (!flagged) t_out = val; }
                    else if (key == "metrics") { if (!flagged) t_metrics = val; }
                    else {
                        std::fprintf(stderr, "error: unknown config key '%s'\n", key.c_str());
                        return kExitUsage;
                    }
                }
            }
            cfg.mask = permlab::parse_mask(t_mask);
            cfg.padding = permlab::parse_padding(t_padding);
            if (t_optimizer == "adam") cfg.optimizer = permlab::OptimizerKind::adam;
            else if (t_optimizer == "sgd") cfg.optimizer = permlab::OptimizerKind::sgd;
            else {
                std::fprintf(stderr, "error: unknown optimizer '%s'\n", t_optimizer.c_str());
                return kExitUsage;
            }
            if (t_readout_hi > t_readout_lo)
                cfg.readout_rows = permlab::RowRange{t_readout_lo, t_readout_hi};
            MetricsLog log{t_metrics};
            log.header();
            const permlab::TrainReport report = permlab::train(cfg, &MetricsLog::hook, &log);
            permlab::save_checkpoint(permlab::Checkpoint{report.weights, cfg.seed, cfg.steps},
                                     t_out);
            std::printf("train final_mse=%.17g wallclock=%.1fs out=%s metrics=%s\n",
                        report.final_mse, report.wallclock_seconds, t_out.c_str(),
                        t_metrics.c_str());
            return kExitOk;
        }
        if (*eval) return cmd_eval(e_ckpt, e_n, e_seed);
        if (*probe) return cmd_probe(p_ckpt, p_mode, p_seed, p_tol, p_trials);
        if (*gradcheck) return cmd_gradcheck(g_d, g_depth, g_mask, g_eps, g_tol, g_batch, g_seed);
        if (*heatmap) return cmd_heatmap(h_ckpt, h_layer, h_out);
    } catch (const permlab::FormatError& e) {
        std::fprintf(stderr, "error: format: %s\n", e.what());
        return kExitFormat;
    } catch (const permlab::DivergenceError& e) {
        std::fprintf(stderr, "error: divergence: %s\n", e.what());
        return kExitDivergence;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
