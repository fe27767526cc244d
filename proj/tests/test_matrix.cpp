#include <cmath>

#include <doctest.h>

#include "permlab/matrix.hpp"
#include "permlab/rng.hpp"

using namespace permlab;

namespace {

Matrix make(std::size_t r, std::size_t c, std::initializer_list<double> vals) {
    Matrix m(r, c);
    std::size_t i = 0;
    for (double v : vals) m.data()[i++] = v;
    return m;
}

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < r * c; ++i) m.data()[i] = scale * (2.0 * rng.uniform_real() - 1.0);
    return m;
}

}  // namespace

TEST_CASE("matmul hand-checked and identity/zero cases") {
    const Matrix m = make(2, 2, {5, 6, 7, 8});
    CHECK(matmul(Matrix::identity(2), m) == m);

    // [[1,2],[3,4]] * [[0,1],[1,0]] = [[2,1],[4,3]]
    const Matrix a = make(2, 2, {1, 2, 3, 4});
    const Matrix swap = make(2, 2, {0, 1, 1, 0});
    CHECK(matmul(a, swap) == make(2, 2, {2, 1, 4, 3}));

    CHECK(matmul(Matrix(2, 2), m) == Matrix(2, 2));
}

TEST_CASE("matmul shape error names both shapes") {
    CHECK_THROWS_WITH_AS(matmul(Matrix(2, 3), Matrix(2, 3)), "matmul: 2x3 * 2x3", ShapeError);
}

TEST_CASE("causal mask definition, 1x1, idempotence") {
    const Matrix v = make(2, 2, {1, 2, 3, 4});
    const Matrix masked = causal_mask(v);
    CHECK(masked.at(0, 0) == 1.0);
    CHECK(masked.at(0, 1) == NEG_INF);
    CHECK(masked.at(1, 0) == 3.0);
    CHECK(masked.at(1, 1) == 4.0);

    CHECK(causal_mask(make(1, 1, {7})) == make(1, 1, {7}));
    CHECK(causal_mask(masked) == masked);

    CHECK_THROWS_AS(causal_mask(Matrix(2, 3)), ShapeError);
}

TEST_CASE("row_softmax uniform, sharp, masked, degenerate") {
    const Matrix u = row_softmax(Matrix(1, 4));
    for (std::size_t c = 0; c < 4; ++c) CHECK(u.at(0, c) == doctest::Approx(0.25));

    // [beta, 0] at beta = 50: tail is 1/(1+e^50) < 2e-22
    const Matrix sharp = row_softmax(make(1, 2, {50, 0}));
    CHECK(sharp.at(0, 1) == doctest::Approx(1.0 / (1.0 + std::exp(50.0))));
    CHECK(sharp.at(0, 1) < 2e-22);
    CHECK(sharp.at(0, 0) + sharp.at(0, 1) == doctest::Approx(1.0).epsilon(1e-12));

    const Matrix masked = row_softmax(make(1, 2, {3.5, NEG_INF}));
    CHECK(masked.at(0, 0) == 1.0);
    CHECK(masked.at(0, 1) == 0.0);

    CHECK_THROWS_AS(row_softmax(make(1, 2, {NEG_INF, NEG_INF})), DomainError);
}

TEST_CASE("row_softmax rows sum to 1 and shift invariance") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        Matrix v(4, 7);
        for (std::size_t i = 0; i < 28; ++i) v.data()[i] = 1400.0 * rng.uniform_real() - 700.0;
        const Matrix s = row_softmax(v);
        Matrix shifted = v;
        for (std::size_t r = 0; r < 4; ++r) {
            double sum = 0.0;
            for (std::size_t c = 0; c < 7; ++c) {
                CHECK(s.at(r, c) >= 0.0);
                sum += s.at(r, c);
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
            const double shift = 10.0 * rng.gaussian();
            for (std::size_t c = 0; c < 7; ++c) shifted.at(r, c) += shift;
        }
        CHECK(max_abs_diff(row_softmax(shifted), s) <= 1e-12);
    }
}

TEST_CASE("hconcat and transpose") {
    Rng rng(3);
    const Matrix m = random_matrix(3, 4, rng);
    CHECK(hconcat(m, Matrix(3, 0)) == m);
    CHECK(transpose(transpose(m)) == m);
    CHECK_THROWS_AS(hconcat(Matrix(2, 2), Matrix(3, 2)), ShapeError);

    // h^(0) shape at d=3: [P | I_3] per block -> 3x6
    const Matrix cat = hconcat(Matrix::identity(3), Matrix::identity(3));
    CHECK(cat.rows() == 3);
    CHECK(cat.cols() == 6);
}

TEST_CASE("transpose anti-homomorphism on random 10x10") {
    Rng rng(7);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = random_matrix(10, 10, rng);
        const Matrix b = random_matrix(10, 10, rng);
        CHECK(max_abs_diff(transpose(matmul(a, b)), matmul(transpose(b), transpose(a))) <= 1e-12);
    }
}
