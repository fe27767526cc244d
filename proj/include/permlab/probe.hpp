#pragma once

#include <optional>
#include <string>
#include <vector>

#include "permlab/model.hpp"

namespace permlab {

// A d x d window of the residual stream matching the scanned target.
struct BlockMatch {
    std::size_t level = 0;
    std::size_t row_offset = 0;
    std::size_t col_offset = 0;
    double max_abs_err = 0.0;
};

// Scans every contiguous d-row window at every column offset of every level.
// Matches are sorted by error, smallest first.
std::vector<BlockMatch> scan_blocks(const ResidualStream& stream, const Matrix& y, double tol);

struct Lemma1Verdict {
    bool pass = false;
    // First differing coordinate on failure.
    std::size_t level = 0, row = 0, col = 0;
};

// Replaces row r of h0 with `perturb`, reruns forward, and requires rows
// [0, r) of every level to match bitwise. Causal models only.
Lemma1Verdict lemma1_check(const ModelWeights& wts, const Matrix& h0, std::size_t r,
                           const Matrix& perturb);

// As lemma1_check but without the mask-mode guard, for documenting that CMF
// attention breaks the invariance.
Lemma1Verdict lemma1_check_unchecked(const ModelWeights& wts, const Matrix& h0, std::size_t r,
                                     const Matrix& perturb);

struct WitnessReport {
    bool pass = false;
    std::size_t witness_row = 0, witness_col = 0;  // (i, j) with P[i,j] = 1, j < i
    bool prefix_invariant = false;  // stream rows before the differing row agree bitwise
    bool no_common_block = false;   // no block holds Y in run 1 and Y' in run 2
    std::vector<BlockMatch> common_blocks;  // offending locations, if any
};

// Builds Y, Y' differing only in row j (the below-diagonal witness), runs both
// forwards, and checks the two Theorem-1 claims at tol = 0.25.
WitnessReport theorem1_witness(const ModelWeights& wts, const PermutationMatrix& p, Rng& rng);

// Per-block norm summary of a weight matrix whose side is divisible by d.
enum class BlockNorm { max_abs, frobenius };
Matrix block_summary(const Matrix& a, std::size_t d, BlockNorm norm = BlockNorm::max_abs);

// Which d x d block of a pattern holds which stencil.
enum class BlockStencil { zero, identity, antidiag };

struct BlockPattern {
    std::size_t d = 0;
    std::size_t block_rows = 0, block_cols = 0;
    std::vector<BlockStencil> blocks;  // row-major, block_rows x block_cols

    BlockStencil at(std::size_t br, std::size_t bc) const { return blocks[br * block_cols + bc]; }
};

// Single-stencil pattern with `stencil` at block (br, bc), zeros elsewhere.
BlockPattern single_block_pattern(std::size_t d, std::size_t block_rows, std::size_t block_cols,
                                  std::size_t br, std::size_t bc,
                                  BlockStencil stencil = BlockStencil::identity);

struct PatternFit {
    double beta_hat = 0.0;  // least-squares gain on the pattern support
    double residual = 0.0;  // off-support mass / total mass, in [0, 1]
};

PatternFit pattern_fit(const Matrix& a, const BlockPattern& pattern);

// Best single-identity-block fit over all block positions.
struct DominantBlock {
    std::size_t block_row = 0, block_col = 0;
    double mass = 0.0;         // norm of the dominant block
    double runner_up = 0.0;    // norm of the second-largest block
    PatternFit fit;            // identity-stencil fit at the dominant position
};

DominantBlock dominant_block(const Matrix& a, std::size_t d,
                             BlockNorm norm = BlockNorm::max_abs);

}  // namespace permlab
