#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace permlab {

// Thrown when operand shapes do not line up. Message names both shapes.
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr double NEG_INF = -std::numeric_limits<double>::infinity();

// Dense row-major matrix of 64-bit reals. Entries may hold NEG_INF as the
// masking sentinel; matmul refuses such inputs, row_softmax maps them to 0.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row_ptr(std::size_t r) { return data_.data() + r * cols_; }
    const double* row_ptr(std::size_t r) const { return data_.data() + r * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    std::string shape_str() const;

    // Writes `b` into the d-aligned block starting at (r0, c0).
    void set_block(std::size_t r0, std::size_t c0, const Matrix& b);
    Matrix block(std::size_t r0, std::size_t c0, std::size_t nrows, std::size_t ncols) const;
    Matrix row_slice(std::size_t lo, std::size_t hi) const;  // rows [lo, hi)

    bool operator==(const Matrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// Standard product with deterministic summation: contributions to each output
// entry are accumulated in increasing order of the inner index.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

// Column-wise concatenation; row counts must agree.
Matrix hconcat(const Matrix& a, const Matrix& b);

// Strictly-above-diagonal entries become NEG_INF; square input required.
Matrix causal_mask(const Matrix& v);

// Row-wise softmax, stabilized by subtracting the row max. NEG_INF entries map
// to exact 0. A row that is entirely NEG_INF is a degenerate-row error.
Matrix row_softmax(const Matrix& v);

double max_abs_diff(const Matrix& a, const Matrix& b);
double max_abs(const Matrix& a);

}  // namespace permlab
