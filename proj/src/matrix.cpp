#include "permlab/matrix.hpp"

#include <cmath>

namespace permlab {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
}

std::string Matrix::shape_str() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
}

void Matrix::set_block(std::size_t r0, std::size_t c0, const Matrix& b) {
    if (r0 + b.rows() > rows_ || c0 + b.cols() > cols_)
        throw ShapeError("set_block: block " + b.shape_str() + " at (" + std::to_string(r0) +
                         "," + std::to_string(c0) + ") exceeds " + shape_str());
    for (std::size_t r = 0; r < b.rows(); ++r)
        for (std::size_t c = 0; c < b.cols(); ++c) at(r0 + r, c0 + c) = b.at(r, c);
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nrows, std::size_t ncols) const {
    if (r0 + nrows > rows_ || c0 + ncols > cols_)
        throw ShapeError("block: " + std::to_string(nrows) + "x" + std::to_string(ncols) +
                         " at (" + std::to_string(r0) + "," + std::to_string(c0) +
                         ") exceeds " + shape_str());
    Matrix out(nrows, ncols);
    for (std::size_t r = 0; r < nrows; ++r)
        for (std::size_t c = 0; c < ncols; ++c) out.at(r, c) = at(r0 + r, c0 + c);
    return out;
}

Matrix Matrix::row_slice(std::size_t lo, std::size_t hi) const {
    if (lo > hi || hi > rows_)
        throw ShapeError("row_slice [" + std::to_string(lo) + "," + std::to_string(hi) +
                         ") out of range for " + shape_str());
    return block(lo, 0, hi - lo, cols_);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul: " + a.shape_str() + " * " + b.shape_str());
    Matrix out(a.rows(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    // i-k-j order: each output entry accumulates in increasing k, and the
    // inner j loop vectorizes without reassociating any sum.
    for (std::size_t i = 0; i < n; ++i) {
        double* out_row = out.row_ptr(i);
        const double* a_row = a.row_ptr(i);
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double aik = a_row[kk];
            if (aik == 0.0) continue;
            const double* b_row = b.row_ptr(kk);
            for (std::size_t j = 0; j < m; ++j) out_row[j] += aik * b_row[j];
        }
    }
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out.at(c, r) = a.at(r, c);
    return out;
}

Matrix hconcat(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw ShapeError("hconcat: " + a.shape_str() + " | " + b.shape_str());
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(r, c);
        for (std::size_t c = 0; c < b.cols(); ++c) out.at(r, a.cols() + c) = b.at(r, c);
    }
    return out;
}

Matrix causal_mask(const Matrix& v) {
    if (v.rows() != v.cols()) throw ShapeError("causal_mask: non-square " + v.shape_str());
    Matrix out = v;
    for (std::size_t r = 0; r < v.rows(); ++r)
        for (std::size_t c = r + 1; c < v.cols(); ++c) out.at(r, c) = NEG_INF;
    return out;
}

Matrix row_softmax(const Matrix& v) {
    Matrix out(v.rows(), v.cols());
    for (std::size_t r = 0; r < v.rows(); ++r) {
        const double* in = v.row_ptr(r);
        double* o = out.row_ptr(r);
        double mx = NEG_INF;
        for (std::size_t c = 0; c < v.cols(); ++c)
            if (in[c] > mx) mx = in[c];
        if (mx == NEG_INF)
            throw DomainError("row_softmax: row " + std::to_string(r) + " is all -inf");
        double sum = 0.0;
        for (std::size_t c = 0; c < v.cols(); ++c) {
            const double e = (in[c] == NEG_INF) ? 0.0 : std::exp(in[c] - mx);
            o[c] = e;
            sum += e;
        }
        const double inv = 1.0 / sum;
        for (std::size_t c = 0; c < v.cols(); ++c) o[c] *= inv;
    }
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b))
        throw ShapeError("max_abs_diff: " + a.shape_str() + " vs " + b.shape_str());
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows() * a.cols(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows() * a.cols(); ++i)
        m = std::max(m, std::abs(a.data()[i]));
    return m;
}

}  // namespace permlab
