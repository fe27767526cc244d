#pragma once

#include <cstdint>
#include <vector>

#include "permlab/matrix.hpp"
#include "permlab/task.hpp"

namespace permlab {

enum class MaskMode { causal, cmf };

// Half-open row range [lo, hi) of the readout.
struct RowRange {
    std::size_t lo = 0, hi = 0;

    std::size_t size() const { return hi - lo; }
    bool operator==(const RowRange&) const = default;
};

// Disentangled attention-only transformer. Layer i consumes h^(i-1) of width
// 2^(i-1) * (d + T) and appends its attention output, doubling the width.
struct ModelWeights {
    std::size_t d = 0;
    MaskMode mask = MaskMode::causal;
    Padding padding = Padding::none;
    std::vector<Matrix> attn;  // A^(1) .. A^(k), square, side = width(h^(i-1))
    Matrix w;                  // readout, d x width(h^(k))
    RowRange readout_rows;     // rows of h^(k) the readout is compared at

    std::size_t depth() const { return attn.size(); }
    std::size_t seq_len() const { return permlab::seq_len(d, padding); }
    std::size_t width(std::size_t level) const {
        return (d + seq_len()) << level;
    }
};

// Zero-mean gaussian init of all weights; readout_rows defaults to [0, d).
ModelWeights init_weights(std::size_t d, std::size_t depth, MaskMode mask, Padding padding,
                          double init_scale, Rng& rng);

struct ResidualStream {
    std::vector<Matrix> levels;  // h^(0) .. h^(k)

    const Matrix& top() const { return levels.back(); }
};

// S(MASK(h A h^T)) h, with MASK applied only for MaskMode::causal.
Matrix attention(const Matrix& h, const Matrix& a, MaskMode mask);

ResidualStream forward(const ModelWeights& wts, const Matrix& h0);

// (h^(k) W^T) restricted to row_range.
Matrix readout(const ResidualStream& stream, const Matrix& w, RowRange row_range);

}  // namespace permlab
