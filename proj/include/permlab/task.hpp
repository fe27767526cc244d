#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "permlab/matrix.hpp"
#include "permlab/rng.hpp"

namespace permlab {

enum class Padding { none, scratch };

// Bijection on {0..d-1}; row i of the matrix form is e_{map[i]}.
struct Permutation {
    std::vector<std::size_t> map;

    std::size_t d() const { return map.size(); }
    bool is_identity() const;
};

struct PermutationMatrix {
    Matrix p;  // d x d, 0/1, doubly stochastic

    std::size_t d() const { return p.rows(); }
};

PermutationMatrix to_matrix(const Permutation& perm);
Permutation from_matrix(const PermutationMatrix& pm);

// One inverse-permutation problem: recover y from (p, y_p) where y_p = p * y.
struct TaskInstance {
    PermutationMatrix perm;
    Matrix y;
    Matrix y_p;
    Padding padding = Padding::none;
};

struct AssembledInput {
    Matrix x;   // token rows: [P; Y_P], or [BOS; P; Y_P; S] when padded
    Matrix h0;  // [x, positional one-hots]
};

// Uniform over all d! permutations (Fisher-Yates).
Permutation sample_permutation(std::size_t d, Rng& rng);

// d x d with i.i.d. uniform {0,1} entries.
Matrix sample_target(std::size_t d, Rng& rng);

TaskInstance sample_instance(std::size_t d, Rng& rng, Padding padding = Padding::none);

Matrix permute(const PermutationMatrix& p, const Matrix& y);        // P * Y
Matrix oracle_invert(const PermutationMatrix& p, const Matrix& y_p);  // P^T * Y_P

// padding=none:    x = [P; Y_P] (2d rows), h0 = [x, I_2d].
// padding=scratch: x = [0_BOS; P; Y_P; 0_S] (3d+1 rows); the positional block
//                  is I_{3d+1} with the BOS row zeroed, so h0 is (3d+1) x (4d+1).
AssembledInput assemble_input(const TaskInstance& inst);

// Number of token rows for a given padding mode.
std::size_t seq_len(std::size_t d, Padding padding);

// The (i, j) with P[i,j] = 1 and j < i picked by taking i as the last row that
// differs from e_i; nullopt iff P is the identity.
std::optional<std::pair<std::size_t, std::size_t>> below_diagonal_witness(
    const PermutationMatrix& p);

// All d! permutations in a stable order (for exhaustive small-d sweeps).
std::vector<Permutation> all_permutations(std::size_t d);

}  // namespace permlab
