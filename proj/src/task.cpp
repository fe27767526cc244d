#include "permlab/task.hpp"

#include <algorithm>
#include <numeric>

namespace permlab {

bool Permutation::is_identity() const {
    for (std::size_t i = 0; i < map.size(); ++i)
        if (map[i] != i) return false;
    return true;
}

PermutationMatrix to_matrix(const Permutation& perm) {
    const std::size_t d = perm.d();
    Matrix p(d, d);
    for (std::size_t i = 0; i < d; ++i) p.at(i, perm.map[i]) = 1.0;
    return PermutationMatrix{std::move(p)};
}

Permutation from_matrix(const PermutationMatrix& pm) {
    const std::size_t d = pm.d();
    Permutation perm;
    perm.map.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        std::size_t hit = d;
        for (std::size_t j = 0; j < d; ++j)
            if (pm.p.at(i, j) == 1.0) {
                hit = j;
                break;
            }
        if (hit == d) throw DomainError("from_matrix: row " + std::to_string(i) + " has no 1");
        perm.map[i] = hit;
    }
    return perm;
}

Permutation sample_permutation(std::size_t d, Rng& rng) {
    if (d == 0) throw DomainError("sample_permutation: d must be >= 1");
    Permutation perm;
    perm.map.resize(d);
    std::iota(perm.map.begin(), perm.map.end(), std::size_t{0});
    for (std::size_t i = d - 1; i > 0; --i) {
        const std::size_t j = rng.uniform_index(i + 1);
        std::swap(perm.map[i], perm.map[j]);
    }
    return perm;
}

Matrix sample_target(std::size_t d, Rng& rng) {
    if (d == 0) throw DomainError("sample_target: d must be >= 1");
    Matrix y(d, d);
    for (std::size_t i = 0; i < d * d; ++i) y.data()[i] = rng.binary();
    return y;
}

TaskInstance sample_instance(std::size_t d, Rng& rng, Padding padding) {
    TaskInstance inst;
    inst.perm = to_matrix(sample_permutation(d, rng));
    inst.y = sample_target(d, rng);
    inst.y_p = permute(inst.perm, inst.y);
    inst.padding = padding;
    return inst;
}

Matrix permute(const PermutationMatrix& p, const Matrix& y) { return matmul(p.p, y); }

Matrix oracle_invert(const PermutationMatrix& p, const Matrix& y_p) {
    return matmul(transpose(p.p), y_p);
}

std::size_t seq_len(std::size_t d, Padding padding) {
    return padding == Padding::none ? 2 * d : 3 * d + 1;
}

AssembledInput assemble_input(const TaskInstance& inst) {
    const std::size_t d = inst.perm.d();
    AssembledInput out;
    if (inst.padding == Padding::none) {
        const std::size_t t = 2 * d;
        out.x = Matrix(t, d);
        out.x.set_block(0, 0, inst.perm.p);
        out.x.set_block(d, 0, inst.y_p);
        out.h0 = hconcat(out.x, Matrix::identity(t));
    } else {
        // [BOS; P; Y_P; S] with s = 0 by convention; BOS token and positional
        // embeddings are all zeros, so the positional block is I with row 0
        // cleared.
        const std::size_t t = 3 * d + 1;
        out.x = Matrix(t, d);
        out.x.set_block(1, 0, inst.perm.p);
        out.x.set_block(d + 1, 0, inst.y_p);
        Matrix pos = Matrix::identity(t);
        pos.at(0, 0) = 0.0;
        out.h0 = hconcat(out.x, pos);
    }
    return out;
}

std::optional<std::pair<std::size_t, std::size_t>> below_diagonal_witness(
    const PermutationMatrix& p) {
    const Permutation perm = from_matrix(p);
    const std::size_t d = perm.d();
    // i = last row not equal to its basis vector; its 1 then sits below the
    // diagonal.
    for (std::size_t ii = d; ii > 0; --ii) {
        const std::size_t i = ii - 1;
        if (perm.map[i] != i) return std::make_pair(i, perm.map[i]);
    }
    return std::nullopt;
}

std::vector<Permutation> all_permutations(std::size_t d) {
    std::vector<std::size_t> map(d);
    std::iota(map.begin(), map.end(), std::size_t{0});
    std::vector<Permutation> out;
    do {
        out.push_back(Permutation{map});
    } while (std::next_permutation(map.begin(), map.end()));
    return out;
}

}  // namespace permlab
