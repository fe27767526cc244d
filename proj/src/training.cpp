#include "permlab/training.hpp"

#include <chrono>
#include <cmath>

namespace permlab {

namespace {

// C += A * B, same deterministic i-k-j order as matmul().
void matmul_acc(Matrix& c, const Matrix& a, const Matrix& b) {
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* out_row = c.row_ptr(i);
        const double* a_row = a.row_ptr(i);
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = a_row[kk];
            if (aik == 0.0) continue;
            const double* b_row = b.row_ptr(kk);
            for (std::size_t j = 0; j < m; ++j) out_row[j] += aik * b_row[j];
        }
    }
}

struct LayerTrace {
    Matrix ha;   // h A
    Matrix act;  // softmax activations
};

// Forward pass keeping what the backward sweep needs.
double forward_traced(const ModelWeights& wts, const TaskInstance& inst, ResidualStream& stream,
                      std::vector<LayerTrace>& traces, Matrix& dyhat) {
    const AssembledInput in = assemble_input(inst);
    stream.levels.clear();
    stream.levels.push_back(in.h0);
    traces.clear();
    for (const Matrix& a : wts.attn) {
        const Matrix& h = stream.levels.back();
        LayerTrace tr;
        tr.ha = matmul(h, a);
        Matrix logits = matmul(tr.ha, transpose(h));
        if (wts.mask == MaskMode::causal) logits = causal_mask(logits);
        tr.act = row_softmax(logits);
        stream.levels.push_back(hconcat(h, matmul(tr.act, h)));
        traces.push_back(std::move(tr));
    }
    const Matrix y_hat = readout(stream, wts.w, wts.readout_rows);
    const double loss = mse_loss(y_hat, inst.y);
    dyhat = Matrix(y_hat.rows(), y_hat.cols());
    const double scale = 2.0 / static_cast<double>(wts.d);
    for (std::size_t i = 0; i < y_hat.rows() * y_hat.cols(); ++i)
        dyhat.data()[i] = scale * (y_hat.data()[i] - inst.y.data()[i]);
    return loss;
}

// Accumulates this instance's gradient (scaled by `weight`) into `g`.
double instance_grad(const ModelWeights& wts, const TaskInstance& inst, double weight,
                     Gradients& g) {
    ResidualStream stream;
    std::vector<LayerTrace> traces;
    Matrix dyhat;
    const double loss = forward_traced(wts, inst, stream, traces, dyhat);
    for (std::size_t i = 0; i < dyhat.rows() * dyhat.cols(); ++i) dyhat.data()[i] *= weight;

    const Matrix& top = stream.top();
    const RowRange rr = wts.readout_rows;
    // dW += dyhat^T * h_k[rows]; dh_k[rows] += dyhat * W.
    matmul_acc(g.w, transpose(dyhat), top.row_slice(rr.lo, rr.hi));
    Matrix dh(top.rows(), top.cols());
    dh.set_block(rr.lo, 0, matmul(dyhat, wts.w));

    for (std::size_t layer = wts.depth(); layer > 0; --layer) {
        const Matrix& h = stream.levels[layer - 1];
        const Matrix& s = traces[layer - 1].act;
        const Matrix& a = wts.attn[layer - 1];
        const std::size_t wp = h.cols();

        Matrix dh_prev = dh.block(0, 0, h.rows(), wp);
        const Matrix dout = dh.block(0, wp, h.rows(), wp);

        // O = S h
        const Matrix ds = matmul(dout, transpose(h));
        matmul_acc(dh_prev, transpose(s), dout);

        // Row-wise softmax backward; masked logits carry S = 0, hence dM = 0.
        Matrix dm(s.rows(), s.cols());
        for (std::size_t r = 0; r < s.rows(); ++r) {
            const double* s_row = s.row_ptr(r);
            const double* ds_row = ds.row_ptr(r);
            double dot = 0.0;
            for (std::size_t c = 0; c < s.cols(); ++c) dot += s_row[c] * ds_row[c];
            double* dm_row = dm.row_ptr(r);
            for (std::size_t c = 0; c < s.cols(); ++c) dm_row[c] = s_row[c] * (ds_row[c] - dot);
        }

        // M = h A h^T
        const Matrix dmh = matmul(dm, h);
        matmul_acc(g.attn[layer - 1], transpose(h), dmh);
        matmul_acc(dh_prev, dmh, transpose(a));
        matmul_acc(dh_prev, transpose(dm), traces[layer - 1].ha);

        dh = std::move(dh_prev);
    }
    return loss;
}

template <typename Fn>
void for_each_matrix(ModelWeights& wts, Gradients& g, Gradients& m, Gradients& v, Fn fn) {
    for (std::size_t i = 0; i < wts.attn.size(); ++i)
        fn(wts.attn[i].data(), g.attn[i].data(), m.attn[i].data(), v.attn[i].data(),
           wts.attn[i].rows() * wts.attn[i].cols());
    fn(wts.w.data(), g.w.data(), m.w.data(), v.w.data(), wts.w.rows() * wts.w.cols());
}

}  // namespace

double mse_loss(const Matrix& y_hat, const Matrix& y) {
    if (!y_hat.same_shape(y))
        throw ShapeError("mse_loss: " + y_hat.shape_str() + " vs " + y.shape_str());
    double sum = 0.0;
    for (std::size_t i = 0; i < y.rows() * y.cols(); ++i) {
        const double e = y_hat.data()[i] - y.data()[i];
        sum += e * e;
    }
    return sum / static_cast<double>(y.rows());
}

Gradients zero_like(const ModelWeights& wts) {
    Gradients g;
    for (const Matrix& a : wts.attn) g.attn.emplace_back(a.rows(), a.cols());
    g.w = Matrix(wts.w.rows(), wts.w.cols());
    return g;
}

Gradients grad(const ModelWeights& wts, const std::vector<TaskInstance>& batch) {
    if (batch.empty()) throw DomainError("grad: empty batch");
    Gradients g = zero_like(wts);
    const double weight = 1.0 / static_cast<double>(batch.size());
    for (const TaskInstance& inst : batch) instance_grad(wts, inst, weight, g);
    return g;
}

double batch_loss(const ModelWeights& wts, const std::vector<TaskInstance>& batch) {
    if (batch.empty()) throw DomainError("batch_loss: empty batch");
    double sum = 0.0;
    for (const TaskInstance& inst : batch) {
        const AssembledInput in = assemble_input(inst);
        const ResidualStream stream = forward(wts, in.h0);
        sum += mse_loss(readout(stream, wts.w, wts.readout_rows), inst.y);
    }
    return sum / static_cast<double>(batch.size());
}

Gradients finite_diff_grad(const ModelWeights& wts, const std::vector<TaskInstance>& batch,
                           double eps) {
    if (eps <= 0.0) throw DomainError("finite_diff_grad: eps must be > 0");
    ModelWeights probe = wts;
    Gradients g = zero_like(wts);
    auto sweep = [&](Matrix& param, Matrix& out) {
        for (std::size_t i = 0; i < param.rows() * param.cols(); ++i) {
            const double saved = param.data()[i];
            param.data()[i] = saved + eps;
            const double up = batch_loss(probe, batch);
            param.data()[i] = saved - eps;
            const double down = batch_loss(probe, batch);
            param.data()[i] = saved;
            out.data()[i] = (up - down) / (2.0 * eps);
        }
    };
    for (std::size_t l = 0; l < probe.attn.size(); ++l) sweep(probe.attn[l], g.attn[l]);
    sweep(probe.w, g.w);
    return g;
}

double max_rel_error(const Gradients& a, const Gradients& b) {
    double worst = 0.0;
    auto cmp = [&](const Matrix& x, const Matrix& y) {
        for (std::size_t i = 0; i < x.rows() * x.cols(); ++i) {
            const double ga = x.data()[i], gb = y.data()[i];
            const double denom = std::max({1.0, std::abs(ga), std::abs(gb)});
            worst = std::max(worst, std::abs(ga - gb) / denom);
        }
    };
    for (std::size_t l = 0; l < a.attn.size(); ++l) cmp(a.attn[l], b.attn[l]);
    cmp(a.w, b.w);
    return worst;
}

TrainReport train(const TrainConfig& cfg, EvalHook hook, void* hook_ctx) {
    if (cfg.steps < 1 || cfg.batch < 1 || cfg.learning_rate <= 0.0)
        throw DomainError("train: steps >= 1, batch >= 1, learning_rate > 0 required");
    const auto t0 = std::chrono::steady_clock::now();

    Rng init_rng(cfg.seed);
    ModelWeights wts =
        init_weights(cfg.d, cfg.depth, cfg.mask, cfg.padding, cfg.init_scale, init_rng);
    wts.readout_rows = cfg.readout_rows.size() ? cfg.readout_rows : RowRange{0, cfg.d};
    if (wts.readout_rows.size() != cfg.d || wts.readout_rows.hi > wts.seq_len())
        throw DomainError("train: readout_rows must select d in-range rows");

    Rng data_rng = Rng::derived(cfg.seed, 0x64617461ULL);  // "data"
    Rng eval_rng = Rng::derived(cfg.seed, 0x6576616cULL);  // "eval"

    Gradients m = zero_like(wts), v = zero_like(wts);
    std::size_t adam_t = 0;

    TrainReport report;
    std::vector<TaskInstance> batch;
    for (std::size_t step = 0; step < cfg.steps; ++step) {
        batch.clear();
        for (std::size_t i = 0; i < cfg.batch; ++i)
            batch.push_back(sample_instance(cfg.d, data_rng, cfg.padding));

        Gradients g = zero_like(wts);
        double loss = 0.0;
        const double weight = 1.0 / static_cast<double>(batch.size());
        for (const TaskInstance& inst : batch) loss += weight * instance_grad(wts, inst, weight, g);
        if (!std::isfinite(loss))
            throw DivergenceError("train: non-finite loss at step " + std::to_string(step));

        if (cfg.optimizer == OptimizerKind::adam) {
            ++adam_t;
            const double bc_m = 1.0 - std::pow(cfg.beta_m, static_cast<double>(adam_t));
            const double bc_v = 1.0 - std::pow(cfg.beta_v, static_cast<double>(adam_t));
            for_each_matrix(wts, g, m, v,
                            [&](double* p, const double* gp, double* mp, double* vp,
                                std::size_t n) {
                                for (std::size_t i = 0; i < n; ++i) {
                                    mp[i] = cfg.beta_m * mp[i] + (1.0 - cfg.beta_m) * gp[i];
                                    vp[i] = cfg.beta_v * vp[i] + (1.0 - cfg.beta_v) * gp[i] * gp[i];
                                    p[i] -= cfg.learning_rate * (mp[i] / bc_m) /
                                            (std::sqrt(vp[i] / bc_v) + cfg.eps);
                                }
                            });
        } else {
            for_each_matrix(wts, g, m, v,
                            [&](double* p, const double* gp, double*, double*, std::size_t n) {
                                for (std::size_t i = 0; i < n; ++i)
                                    p[i] -= cfg.learning_rate * gp[i];
                            });
        }

        const bool last = step + 1 == cfg.steps;
        if ((step + 1) % cfg.eval_every == 0 || last) {
            const double mse = evaluate(wts, cfg.eval_batch, eval_rng);
            if (report.curve.empty() || report.curve.back().first != step + 1) {
                report.curve.emplace_back(step + 1, mse);
                if (hook) hook(step + 1, mse, hook_ctx);
            }
            if (!std::isfinite(mse))
                throw DivergenceError("train: non-finite eval mse at step " +
                                      std::to_string(step + 1));
        }
    }
    report.final_mse = report.curve.back().second;
    report.weights = std::move(wts);
    report.wallclock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

double evaluate(const ModelWeights& wts, std::size_t n, Rng& rng) {
    if (n < 1) throw DomainError("evaluate: n must be >= 1");
    std::vector<TaskInstance> batch;
    for (std::size_t i = 0; i < n; ++i)
        batch.push_back(sample_instance(wts.d, rng, wts.padding));
    return batch_loss(wts, batch);
}

}  // namespace permlab
