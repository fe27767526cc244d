#include "permlab/model.hpp"

namespace permlab {

ModelWeights init_weights(std::size_t d, std::size_t depth, MaskMode mask, Padding padding,
                          double init_scale, Rng& rng) {
    ModelWeights wts;
    wts.d = d;
    wts.mask = mask;
    wts.padding = padding;
    wts.readout_rows = RowRange{0, d};
    for (std::size_t i = 0; i < depth; ++i) {
        const std::size_t side = wts.width(i);
        Matrix a(side, side);
        for (std::size_t j = 0; j < side * side; ++j) a.data()[j] = init_scale * rng.gaussian();
        wts.attn.push_back(std::move(a));
    }
    const std::size_t top_width = wts.width(depth);
    wts.w = Matrix(d, top_width);
    for (std::size_t j = 0; j < d * top_width; ++j) wts.w.data()[j] = init_scale * rng.gaussian();
    return wts;
}

Matrix attention(const Matrix& h, const Matrix& a, MaskMode mask) {
    if (a.rows() != h.cols() || a.cols() != h.cols())
        throw ShapeError("attention: weights " + a.shape_str() + " vs stream " + h.shape_str());
    Matrix logits = matmul(matmul(h, a), transpose(h));
    if (mask == MaskMode::causal) logits = causal_mask(logits);
    return matmul(row_softmax(logits), h);
}

ResidualStream forward(const ModelWeights& wts, const Matrix& h0) {
    if (h0.cols() != wts.width(0))
        throw ShapeError("forward: h0 " + h0.shape_str() + ", expected width " +
                         std::to_string(wts.width(0)));
    ResidualStream stream;
    stream.levels.push_back(h0);
    for (std::size_t i = 0; i < wts.attn.size(); ++i) {
        const Matrix& h = stream.levels.back();
        Matrix out;
        try {
            out = attention(h, wts.attn[i], wts.mask);
        } catch (const ShapeError& e) {
            throw ShapeError("layer " + std::to_string(i + 1) + ": " + e.what());
        }
        stream.levels.push_back(hconcat(h, out));
    }
    return stream;
}

Matrix readout(const ResidualStream& stream, const Matrix& w, RowRange row_range) {
    const Matrix& top = stream.top();
    if (row_range.hi > top.rows() || row_range.lo > row_range.hi)
        throw ShapeError("readout: rows [" + std::to_string(row_range.lo) + "," +
                         std::to_string(row_range.hi) + ") out of range for " + top.shape_str());
    if (w.cols() != top.cols())
        throw ShapeError("readout: W " + w.shape_str() + " vs stream " + top.shape_str());
    return matmul(top.row_slice(row_range.lo, row_range.hi), transpose(w));
}

}  // namespace permlab
