#pragma once

#include <cstdint>
#include <vector>

#include "permlab/model.hpp"

namespace permlab {

class DivergenceError : public std::runtime_error {
public:
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

enum class OptimizerKind { adam, sgd };

struct TrainConfig {
    std::size_t d = 10;
    std::size_t depth = 2;
    MaskMode mask = MaskMode::cmf;
    Padding padding = Padding::none;
    std::size_t steps = 1ull << 16;
    std::size_t batch = 1024;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::adam;
    double learning_rate = 1e-3;
    double beta_m = 0.9;
    double beta_v = 0.999;
    double eps = 1e-8;
    double init_scale = 0.02;
    RowRange readout_rows{0, 10};  // defaults to [0, d)
    std::size_t eval_every = 256;
    std::size_t eval_batch = 1024;
};

struct TrainReport {
    double final_mse = 0.0;
    std::vector<std::pair<std::size_t, double>> curve;  // (step, eval mse)
    double wallclock_seconds = 0.0;
    ModelWeights weights;
};

// Mean over rows of the per-row squared-error sum: L = (1/d) sum_rc (err_rc)^2.
// The constant-0.5 predictor then scores d/4 on binary targets.
double mse_loss(const Matrix& y_hat, const Matrix& y);

struct Gradients {
    std::vector<Matrix> attn;
    Matrix w;
};

Gradients zero_like(const ModelWeights& wts);

// Exact reverse-mode gradient of the batch-mean loss wrt every A^(i) and W.
Gradients grad(const ModelWeights& wts, const std::vector<TaskInstance>& batch);

// Batch-mean loss (forward only); shared by grad checking and evaluation.
double batch_loss(const ModelWeights& wts, const std::vector<TaskInstance>& batch);

// Central finite differences, (L(p+eps) - L(p-eps)) / (2 eps) per parameter.
Gradients finite_diff_grad(const ModelWeights& wts, const std::vector<TaskInstance>& batch,
                           double eps);

// max |g1 - g2| / max(1, |g1|, |g2|) over all parameters.
double max_rel_error(const Gradients& a, const Gradients& b);

// Progress hook: called after each logged eval with (step, mse).
using EvalHook = void (*)(std::size_t step, double mse, void* ctx);

TrainReport train(const TrainConfig& cfg, EvalHook hook = nullptr, void* hook_ctx = nullptr);

// Mean mse_loss over n fresh instances.
double evaluate(const ModelWeights& wts, std::size_t n, Rng& rng);

}  // namespace permlab
