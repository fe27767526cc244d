#include <map>
#include <set>
#include <vector>

#include <doctest.h>

#include "permlab/task.hpp"

using namespace permlab;

TEST_CASE("sample_permutation: d=1, determinism, d=0 rejected") {
    Rng rng(1);
    CHECK(sample_permutation(1, rng).is_identity());

    Rng a(42), b(42);
    for (int i = 0; i < 20; ++i) CHECK(sample_permutation(6, a).map == sample_permutation(6, b).map);

    CHECK_THROWS_AS(sample_permutation(0, rng), DomainError);
}

TEST_CASE("sample_permutation is uniform over S_3") {
    Rng rng(2024);
    std::map<std::vector<std::size_t>, int> counts;
    const int n = 60000;
    for (int i = 0; i < n; ++i) ++counts[sample_permutation(3, rng).map];
    CHECK(counts.size() == 6);
    for (const auto& [perm, count] : counts)
        CHECK(std::abs(count / double(n) - 1.0 / 6.0) < 0.01);
}

TEST_CASE("sample_target: binary entries, mean 0.5, determinism") {
    Rng rng(5);
    double sum = 0.0;
    const int draws = 1000;  // 1000 * 100 entries
    for (int i = 0; i < draws; ++i) {
        const Matrix y = sample_target(10, rng);
        for (std::size_t j = 0; j < 100; ++j) {
            const double v = y.data()[j];
            CHECK((v == 0.0 || v == 1.0));
            sum += v;
        }
    }
    CHECK(std::abs(sum / (draws * 100.0) - 0.5) < 0.01);

    Rng a(9), b(9);
    CHECK(sample_target(4, a) == sample_target(4, b));
}

TEST_CASE("permute / oracle_invert against a row-shuffle oracle") {
    // pi = [2,0,1] moves row i of Y to row i of Y_P picked from row pi(i)...
    // spelled out: Y_P row i = Y row pi(i). With rows (0,1,2) ~ (hearts,
    // spades, clubs): Y_P = (clubs, hearts, spades), inverse recovers Y.
    const Permutation pi{{2, 0, 1}};
    const PermutationMatrix p = to_matrix(pi);
    Matrix y(3, 1);
    y.at(0, 0) = 100;  // hearts
    y.at(1, 0) = 200;  // spades
    y.at(2, 0) = 300;  // clubs
    const Matrix yp = permute(p, y);
    CHECK(yp.at(0, 0) == 300);
    CHECK(yp.at(1, 0) == 100);
    CHECK(yp.at(2, 0) == 200);
    CHECK(oracle_invert(p, yp) == y);

    // identity permutation: Y_P = Y
    const PermutationMatrix id = to_matrix(Permutation{{0, 1, 2}});
    CHECK(permute(id, y) == y);

    // random d=4 instances vs an independent row-reindexing oracle: row i of
    // Y_P is row map[i] of Y, so scattering Y_P rows back through map rebuilds Y.
    Rng rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        const Permutation perm = sample_permutation(4, rng);
        const PermutationMatrix pm = to_matrix(perm);
        const Matrix target = sample_target(4, rng);
        const Matrix permuted = permute(pm, target);
        Matrix rebuilt(4, 4);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t c = 0; c < 4; ++c) rebuilt.at(perm.map[i], c) = permuted.at(i, c);
        CHECK(rebuilt == target);
        CHECK(oracle_invert(pm, permuted) == rebuilt);
    }
}

TEST_CASE("round trip invariants: inversion bitwise, row multiset preserved") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t d = 1 + rng.uniform_index(8);
        const PermutationMatrix p = to_matrix(sample_permutation(d, rng));
        const Matrix y = sample_target(d, rng);
        const Matrix yp = permute(p, y);
        CHECK(oracle_invert(p, yp) == y);

        std::multiset<std::vector<double>> before, after;
        for (std::size_t r = 0; r < d; ++r) {
            before.insert(std::vector<double>(y.row_ptr(r), y.row_ptr(r) + d));
            after.insert(std::vector<double>(yp.row_ptr(r), yp.row_ptr(r) + d));
        }
        CHECK(before == after);
    }
}

TEST_CASE("assemble_input shapes and block layout") {
    Rng rng(8);

    // d=10, padding=none: h0 is 20x30
    {
        TaskInstance inst = sample_instance(10, rng, Padding::none);
        const AssembledInput in = assemble_input(inst);
        CHECK(in.x.rows() == 20);
        CHECK(in.x.cols() == 10);
        CHECK(in.h0.rows() == 20);
        CHECK(in.h0.cols() == 30);
    }

    // d=3, padding=scratch: x is 10x3, h0 is 10x13, row 0 all zeros
    {
        TaskInstance inst = sample_instance(3, rng, Padding::scratch);
        const AssembledInput in = assemble_input(inst);
        CHECK(in.x.rows() == 10);
        CHECK(in.x.cols() == 3);
        CHECK(in.h0.rows() == 10);
        CHECK(in.h0.cols() == 13);
        for (std::size_t c = 0; c < 13; ++c) CHECK(in.h0.at(0, c) == 0.0);
    }

    // block layout at d=3, padding=none: [[P, I, 0], [Y_P, 0, I]]
    {
        TaskInstance inst = sample_instance(3, rng, Padding::none);
        const AssembledInput in = assemble_input(inst);
        CHECK(in.h0.block(0, 0, 3, 3) == inst.perm.p);
        CHECK(in.h0.block(0, 3, 3, 3) == Matrix::identity(3));
        CHECK(in.h0.block(0, 6, 3, 3) == Matrix(3, 3));
        CHECK(in.h0.block(3, 0, 3, 3) == inst.y_p);
        CHECK(in.h0.block(3, 3, 3, 3) == Matrix(3, 3));
        CHECK(in.h0.block(3, 6, 3, 3) == Matrix::identity(3));
    }

    // row/column closed forms for d in 1..16, both modes
    for (std::size_t d = 1; d <= 16; ++d) {
        TaskInstance inst = sample_instance(d, rng, Padding::none);
        CHECK(assemble_input(inst).h0.rows() == 2 * d);
        CHECK(assemble_input(inst).h0.cols() == 3 * d);
        inst.padding = Padding::scratch;
        CHECK(assemble_input(inst).h0.rows() == 3 * d + 1);
        CHECK(assemble_input(inst).h0.cols() == 4 * d + 1);
    }
}

TEST_CASE("below_diagonal_witness") {
    // identity -> none
    CHECK_FALSE(below_diagonal_witness(to_matrix(Permutation{{0, 1, 2}})).has_value());

    // pi = [2,0,1]: last mismatched row is 2, its 1 sits at column 1
    const auto w = below_diagonal_witness(to_matrix(Permutation{{2, 0, 1}}));
    REQUIRE(w.has_value());
    CHECK(w->first == 2);
    CHECK(w->second == 1);

    // swap at d=2: only below-diagonal 1 is (1,0)
    const auto s = below_diagonal_witness(to_matrix(Permutation{{1, 0}}));
    REQUIRE(s.has_value());
    CHECK(s->first == 1);
    CHECK(s->second == 0);
}

TEST_CASE("witness is none iff identity, exhaustively for d <= 6") {
    for (std::size_t d = 1; d <= 6; ++d) {
        for (const Permutation& perm : all_permutations(d)) {
            const auto w = below_diagonal_witness(to_matrix(perm));
            CHECK(w.has_value() == !perm.is_identity());
            if (w) {
                CHECK(w->second < w->first);
                CHECK(to_matrix(perm).p.at(w->first, w->second) == 1.0);
            }
        }
    }
}
