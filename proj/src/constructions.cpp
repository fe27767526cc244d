#include "permlab/constructions.hpp"

namespace permlab {

namespace {

Matrix scaled_identity(std::size_t d, double beta) {
    Matrix m = Matrix::identity(d);
    for (std::size_t i = 0; i < d; ++i) m.at(i, i) = beta;
    return m;
}

Matrix selector_w(std::size_t d, std::size_t width, std::size_t col0) {
    Matrix w(d, width);
    for (std::size_t i = 0; i < d; ++i) w.at(i, col0 + i) = 1.0;
    return w;
}

void require_d(std::size_t d) {
    if (d < 2) throw DomainError("construction requires d >= 2");
}

}  // namespace

Matrix antidiagonal(std::size_t d) {
    Matrix j(d, d);
    for (std::size_t i = 0; i < d; ++i) j.at(i, d - 1 - i) = 1.0;
    return j;
}

ConstructionBundle build_thm2(std::size_t d, double beta1, double beta2) {
    require_d(d);
    ConstructionBundle b;
    b.name = "thm2_cmf";
    b.beta1 = beta1;
    b.beta2 = beta2;
    b.wts.d = d;
    b.wts.mask = MaskMode::cmf;
    b.wts.padding = Padding::none;

    // Query/key blocks in h A h^T terms, d-aligned, 0-based.
    Matrix a1(3 * d, 3 * d);
    a1.set_block(2 * d, 1 * d, scaled_identity(d, beta1));  // query pos(Y_P rows), key pos(P rows)
    Matrix a2(6 * d, 6 * d);
    a2.set_block(1 * d, 3 * d, scaled_identity(d, beta2));  // query pos(P rows), key layer-1 token
    b.wts.attn = {std::move(a1), std::move(a2)};

    b.expected_rows = RowRange{0, d};
    b.expected_col0 = 6 * d;  // token block of the layer-2 attention output
    b.wts.w = selector_w(d, 12 * d, b.expected_col0);
    b.wts.readout_rows = b.expected_rows;
    return b;
}

ConstructionBundle build_thm3(std::size_t d, double beta1, double beta2) {
    require_d(d);
    ConstructionBundle b;
    b.name = "thm3_scratch";
    b.beta1 = beta1;
    b.beta2 = beta2;
    b.wts.d = d;
    b.wts.mask = MaskMode::causal;
    b.wts.padding = Padding::scratch;

    // Column layout of h^(0): [token d | BOS pos 1 | pos P d | pos Y_P d | pos S d].
    const std::size_t w0 = 4 * d + 1;
    const std::size_t pos_p = d + 1, pos_yp = 2 * d + 1, pos_s = 3 * d + 1;

    Matrix a1(w0, w0);
    a1.set_block(pos_yp, pos_p, scaled_identity(d, beta1));  // Y_P rows attend their P row
    Matrix a2(2 * w0, 2 * w0);
    a2.set_block(pos_s, w0 + 0, scaled_identity(d, beta2));  // S rows key on copied-P tokens
    b.wts.attn = {std::move(a1), std::move(a2)};

    b.expected_rows = RowRange{2 * d + 1, 3 * d + 1};  // the scratch rows
    b.expected_col0 = 2 * w0;  // token block of the layer-2 attention output
    b.wts.w = selector_w(d, 4 * w0, b.expected_col0);
    b.wts.readout_rows = b.expected_rows;
    return b;
}

ConstructionBundle build_antidiag(std::size_t d, double beta1, double beta2) {
    require_d(d);
    ConstructionBundle b;
    b.name = "antidiag_cmf";
    b.beta1 = beta1;
    b.beta2 = beta2;
    b.wts.d = d;
    b.wts.mask = MaskMode::cmf;
    b.wts.padding = Padding::none;

    Matrix j1 = antidiagonal(d);
    for (std::size_t i = 0; i < d * d; ++i) j1.data()[i] *= beta1;
    Matrix j2 = antidiagonal(d);
    for (std::size_t i = 0; i < d * d; ++i) j2.data()[i] *= beta2;

    Matrix a1(3 * d, 3 * d);
    a1.set_block(1 * d, 1 * d, j1);  // J at the center block
    Matrix a2(6 * d, 6 * d);
    a2.set_block(3 * d, 2 * d, j2);  // query layer-1 token block, key pos(Y_P rows)
    b.wts.attn = {std::move(a1), std::move(a2)};

    b.expected_rows = RowRange{0, d};
    b.expected_col0 = 6 * d;
    b.wts.w = selector_w(d, 12 * d, b.expected_col0);
    b.wts.readout_rows = b.expected_rows;
    return b;
}

ConstructionBundle build_construction(const std::string& name, std::size_t d, double beta1,
                                      double beta2) {
    if (name == "thm2_cmf") return build_thm2(d, beta1, beta2);
    if (name == "thm3_scratch") return build_thm3(d, beta1, beta2);
    if (name == "antidiag_cmf") return build_antidiag(d, beta1, beta2);
    throw DomainError("unknown construction: " + name);
}

double recovery_error(const ConstructionBundle& bundle, const TaskInstance& inst) {
    const AssembledInput in = assemble_input(inst);
    const ResidualStream stream = forward(bundle.wts, in.h0);
    const std::size_t d = bundle.wts.d;
    const Matrix got = stream.levels[bundle.expected_level()].block(
        bundle.expected_rows.lo, bundle.expected_col0, d, d);
    return max_abs_diff(got, inst.y);
}

VerificationReport verify(const ConstructionBundle& bundle, std::size_t trials, Rng& rng,
                          double tol) {
    if (trials < 1) throw DomainError("verify: trials must be >= 1");
    VerificationReport report;
    report.tol = tol;
    for (std::size_t t = 0; t < trials; ++t) {
        const TaskInstance inst = sample_instance(bundle.wts.d, rng, bundle.wts.padding);
        const double err = recovery_error(bundle, inst);
        report.trial_errors.push_back(err);
        report.max_error = std::max(report.max_error, err);
    }
    report.pass = report.max_error < tol;
    return report;
}

}  // namespace permlab
