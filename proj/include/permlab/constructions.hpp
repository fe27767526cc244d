#pragma once

#include <string>
#include <vector>

#include "permlab/model.hpp"

namespace permlab {

// Weights built from one of the explicit proofs, together with where the
// recovered Y is expected to appear in the residual stream.
struct ConstructionBundle {
    std::string name;  // thm2_cmf | thm3_scratch | antidiag_cmf
    ModelWeights wts;
    RowRange expected_rows;       // rows of the top level carrying Y
    std::size_t expected_col0 = 0;  // first column of the d-wide block
    double beta1 = 0.0, beta2 = 0.0;

    std::size_t expected_level() const { return wts.depth(); }
};

// Two-layer CMF weights over [P; Y_P]: layer 1 copies P into the bottom
// block-row, layer 2 attends by P^T so the token block of its output carries
// Y = P^T Y_P at rows [0, d).
ConstructionBundle build_thm2(std::size_t d, double beta1, double beta2);

// Two-layer causal weights over [BOS; P; Y_P; S]: layer 1 copies P onto the
// Y_P rows, layer 2 writes Y onto the scratch rows.
ConstructionBundle build_thm3(std::size_t d, double beta1, double beta2);

// Two-layer CMF weights using antidiagonal (row-reversal) blocks, taken
// verbatim from the companion construction note.
ConstructionBundle build_antidiag(std::size_t d, double beta1, double beta2);

ConstructionBundle build_construction(const std::string& name, std::size_t d, double beta1,
                                      double beta2);

// Antidiagonal J with J[i, d-1-i] = 1.
Matrix antidiagonal(std::size_t d);

struct VerificationReport {
    std::vector<double> trial_errors;  // per-trial max-abs error vs oracle Y
    double max_error = 0.0;
    double tol = 0.0;
    bool pass = false;
};

// Samples (P, Y) per trial, runs the bundle forward, compares the bundled
// block against Y.
VerificationReport verify(const ConstructionBundle& bundle, std::size_t trials, Rng& rng,
                          double tol);

// Single-instance recovery error at the bundled block.
double recovery_error(const ConstructionBundle& bundle, const TaskInstance& inst);

}  // namespace permlab
