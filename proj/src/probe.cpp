#include "permlab/probe.hpp"

#include <algorithm>
#include <cmath>

namespace permlab {

std::vector<BlockMatch> scan_blocks(const ResidualStream& stream, const Matrix& y, double tol) {
    const std::size_t d = y.rows();
    std::vector<BlockMatch> matches;
    for (std::size_t level = 0; level < stream.levels.size(); ++level) {
        const Matrix& h = stream.levels[level];
        if (h.rows() < d || h.cols() < d) continue;
        for (std::size_t r0 = 0; r0 + d <= h.rows(); ++r0) {
            for (std::size_t c0 = 0; c0 + d <= h.cols(); ++c0) {
                double err = 0.0;
                for (std::size_t r = 0; r < d && err < tol; ++r)
                    for (std::size_t c = 0; c < d; ++c)
                        err = std::max(err, std::abs(h.at(r0 + r, c0 + c) - y.at(r, c)));
                if (err < tol) matches.push_back(BlockMatch{level, r0, c0, err});
            }
        }
    }
    std::sort(matches.begin(), matches.end(),
              [](const BlockMatch& a, const BlockMatch& b) { return a.max_abs_err < b.max_abs_err; });
    return matches;
}

namespace {

Lemma1Verdict compare_prefix(const ResidualStream& s1, const ResidualStream& s2, std::size_t r) {
    for (std::size_t level = 0; level < s1.levels.size(); ++level) {
        const Matrix& a = s1.levels[level];
        const Matrix& b = s2.levels[level];
        for (std::size_t row = 0; row < r; ++row)
            for (std::size_t col = 0; col < a.cols(); ++col)
                if (a.at(row, col) != b.at(row, col))
                    return Lemma1Verdict{false, level, row, col};
    }
    return Lemma1Verdict{true, 0, 0, 0};
}

}  // namespace

Lemma1Verdict lemma1_check_unchecked(const ModelWeights& wts, const Matrix& h0, std::size_t r,
                                     const Matrix& perturb) {
    if (r >= h0.rows())
        throw DomainError("lemma1_check: row " + std::to_string(r) + " out of range");
    if (perturb.rows() != 1 || perturb.cols() != h0.cols())
        throw ShapeError("lemma1_check: perturbation " + perturb.shape_str() + " vs row of " +
                         h0.shape_str());
    Matrix h0p = h0;
    h0p.set_block(r, 0, perturb);
    return compare_prefix(forward(wts, h0), forward(wts, h0p), r);
}

Lemma1Verdict lemma1_check(const ModelWeights& wts, const Matrix& h0, std::size_t r,
                           const Matrix& perturb) {
    if (wts.mask != MaskMode::causal)
        throw DomainError("lemma1_check: the invariance lemma concerns masked attention");
    return lemma1_check_unchecked(wts, h0, r, perturb);
}

WitnessReport theorem1_witness(const ModelWeights& wts, const PermutationMatrix& p, Rng& rng) {
    if (wts.mask != MaskMode::causal)
        throw DomainError("theorem1_witness: requires a causal model");
    const auto witness = below_diagonal_witness(p);
    if (!witness)
        throw DomainError("theorem1_witness: identity permutation has no below-diagonal witness");
    const auto [i, j] = *witness;
    const std::size_t d = p.d();

    // Two targets differing exactly in row j; complementing keeps entries binary.
    const Matrix y = sample_target(d, rng);
    Matrix y2 = y;
    for (std::size_t c = 0; c < d; ++c) y2.at(j, c) = 1.0 - y2.at(j, c);

    TaskInstance inst1{p, y, permute(p, y), wts.padding};
    TaskInstance inst2{p, y2, permute(p, y2), wts.padding};
    const ResidualStream s1 = forward(wts, assemble_input(inst1).h0);
    const ResidualStream s2 = forward(wts, assemble_input(inst2).h0);

    // The inputs differ only at the stream row carrying Y_P's row i.
    const std::size_t diff_row = (wts.padding == Padding::none) ? d + i : d + 1 + i;

    WitnessReport report;
    report.witness_row = i;
    report.witness_col = j;
    report.prefix_invariant = compare_prefix(s1, s2, diff_row).pass;

    constexpr double kTol = 0.25;  // half the entry gap of binary targets
    const auto m1 = scan_blocks(s1, y, kTol);
    const auto m2 = scan_blocks(s2, y2, kTol);
    for (const BlockMatch& a : m1)
        for (const BlockMatch& b : m2)
            if (a.level == b.level && a.row_offset == b.row_offset &&
                a.col_offset == b.col_offset)
                report.common_blocks.push_back(a);
    report.no_common_block = report.common_blocks.empty();
    report.pass = report.prefix_invariant && report.no_common_block;
    return report;
}

Matrix block_summary(const Matrix& a, std::size_t d, BlockNorm norm) {
    if (d == 0 || a.rows() % d != 0 || a.cols() % d != 0)
        throw ShapeError("block_summary: " + a.shape_str() + " not divisible into " +
                         std::to_string(d) + "-blocks");
    Matrix out(a.rows() / d, a.cols() / d);
    for (std::size_t br = 0; br < out.rows(); ++br)
        for (std::size_t bc = 0; bc < out.cols(); ++bc) {
            double acc = 0.0;
            for (std::size_t r = 0; r < d; ++r)
                for (std::size_t c = 0; c < d; ++c) {
                    const double v = a.at(br * d + r, bc * d + c);
                    if (norm == BlockNorm::max_abs)
                        acc = std::max(acc, std::abs(v));
                    else
                        acc += v * v;
                }
            out.at(br, bc) = (norm == BlockNorm::frobenius) ? std::sqrt(acc) : acc;
        }
    return out;
}

BlockPattern single_block_pattern(std::size_t d, std::size_t block_rows, std::size_t block_cols,
                                  std::size_t br, std::size_t bc, BlockStencil stencil) {
    BlockPattern p;
    p.d = d;
    p.block_rows = block_rows;
    p.block_cols = block_cols;
    p.blocks.assign(block_rows * block_cols, BlockStencil::zero);
    p.blocks[br * block_cols + bc] = stencil;
    return p;
}

PatternFit pattern_fit(const Matrix& a, const BlockPattern& pattern) {
    const std::size_t d = pattern.d;
    if (a.rows() != pattern.block_rows * d || a.cols() != pattern.block_cols * d)
        throw ShapeError("pattern_fit: " + a.shape_str() + " vs pattern " +
                         std::to_string(pattern.block_rows) + "x" +
                         std::to_string(pattern.block_cols) + " of " + std::to_string(d) +
                         "-blocks");

    auto on_support = [&](std::size_t r, std::size_t c) {
        const BlockStencil st = pattern.at(r / d, c / d);
        const std::size_t lr = r % d, lc = c % d;
        if (st == BlockStencil::identity) return lr == lc;
        if (st == BlockStencil::antidiag) return lr + lc == d - 1;
        return false;
    };

    double support_sum = 0.0, support_sq = 0.0, total_sq = 0.0;
    std::size_t support_n = 0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) {
            const double v = a.at(r, c);
            total_sq += v * v;
            if (on_support(r, c)) {
                support_sum += v;
                support_sq += v * v;
                ++support_n;
            }
        }

    PatternFit fit;
    fit.beta_hat = support_n ? support_sum / static_cast<double>(support_n) : 0.0;
    fit.residual = total_sq > 0.0 ? (total_sq - support_sq) / total_sq : 0.0;
    return fit;
}

DominantBlock dominant_block(const Matrix& a, std::size_t d, BlockNorm norm) {
    const Matrix summary = block_summary(a, d, norm);
    DominantBlock best;
    for (std::size_t br = 0; br < summary.rows(); ++br)
        for (std::size_t bc = 0; bc < summary.cols(); ++bc) {
            const double m = summary.at(br, bc);
            if (m > best.mass) {
                best.runner_up = best.mass;
                best.mass = m;
                best.block_row = br;
                best.block_col = bc;
            } else if (m > best.runner_up) {
                best.runner_up = m;
            }
        }
    best.fit = pattern_fit(a, single_block_pattern(d, summary.rows(), summary.cols(),
                                                   best.block_row, best.block_col));
    return best;
}

}  // namespace permlab
