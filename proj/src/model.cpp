#include "cusp/model.hpp"

#include <algorithm>
#include <cmath>

namespace cusp {

namespace {

// Smallest eigenvalue of the 2x2 covariance of (Re w_ij, Im w_ij), given the
// second moments s = E|w|^2 and t = E w^2.
double entry_cov_min_eig(double s, cxd t) {
    const double exx = 0.5 * (s + t.real());
    const double eyy = 0.5 * (s - t.real());
    const double exy = 0.5 * t.imag();
    const double tr = exx + eyy;
    const double disc = std::sqrt(std::max(0.0, 0.25 * (exx - eyy) * (exx - eyy) + exy * exy));
    return 0.5 * tr - disc;
}

}  // namespace

void ModelSpec::refresh_witnesses() {
    flatness_lower = n * s.minCoeff();
    flatness_upper = n * s.maxCoeff();
    if (symmetry == Symmetry::ComplexHermitian) {
        double worst = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                worst = std::min(worst, entry_cov_min_eig(s(i, j), t(i, j)));
        fullness_lower = (n > 1) ? n * worst : 0.0;
    } else {
        fullness_lower = flatness_lower;
    }
}

ModelSpec ModelSpec::with_gue(double ct) const {
    ModelSpec out = *this;
    out.s.array() += ct / n;
    out.refresh_witnesses();
    return out;
}

ValidationReport validate(const ModelSpec& model) {
    ValidationReport report;
    auto add = [&](const std::string& name, bool pass, double witness, const std::string& detail) {
        report.checks.push_back({name, pass, witness, detail});
        report.pass = report.pass && pass;
    };

    const int n = model.n;
    bool dims_ok = n > 0 && model.a.size() == n && model.s.rows() == n &&
                   model.s.cols() == n && model.t.rows() == n && model.t.cols() == n;
    add("dimensions", dims_ok, n, dims_ok ? "" : "a/s/t sizes inconsistent with n");
    if (!dims_ok) return report;

    const double s_asym = (model.s - model.s.transpose()).cwiseAbs().maxCoeff();
    add("s symmetric", s_asym == 0.0, s_asym, "");
    add("s nonnegative", model.s.minCoeff() >= 0.0, model.s.minCoeff(), "");
    add("s bounded (C/N)", model.s.maxCoeff() <= model.flatness_upper / n + 1e-300,
        model.flatness_upper, "");

    const double t_asym = (model.t - model.t.transpose()).cwiseAbs().maxCoeff();
    add("t symmetric", t_asym == 0.0, t_asym, "");
    double t_diag = 0.0;
    for (int i = 0; i < n; ++i) t_diag = std::max(t_diag, std::abs(model.t(i, i)));
    add("t zero diagonal", t_diag == 0.0, t_diag, "");

    // flatness: min_ij s_ij >= c/N with witnessed c > 0
    const double c_flat = n * model.s.minCoeff();
    add("flatness (c/N)", c_flat > 0.0, c_flat, c_flat > 0.0 ? "" : "variance profile has a vanishing entry");

    if (model.symmetry == Symmetry::RealSymmetric) {
        double dev = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) dev = std::max(dev, std::abs(model.t(i, j) - cxd(model.s(i, j))));
        add("real-symmetric t == s off-diagonal", dev <= 1e-14, dev, "");
    } else {
        double worst = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                worst = std::min(worst, entry_cov_min_eig(model.s(i, j), model.t(i, j)));
        const double c_full = (n > 1) ? n * worst : 1.0;
        add("fullness (c/N)", c_full > 0.0, c_full,
            c_full > 0.0 ? "" : "(Re,Im) covariance of an entry is degenerate");
    }

    report.c = c_flat;
    report.C = model.flatness_upper;
    return report;
}

ModelSpec flat_model(int n, Symmetry symmetry) {
    if (n <= 0) throw DomainError("flat_model: n must be positive");
    ModelSpec m;
    m.n = n;
    m.a = Eigen::VectorXd::Zero(n);
    m.s = Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    m.symmetry = symmetry;
    if (symmetry == Symmetry::RealSymmetric) {
        m.t = m.s.cast<cxd>();
        m.t.diagonal().setZero();
    } else {
        m.t = Eigen::MatrixXcd::Zero(n, n);
    }
    m.refresh_witnesses();
    return m;
}

ModelSpec two_block_model(int n1, int n2, double s11, double s12, double s22,
                          double a1, double a2, Symmetry symmetry) {
    if (n1 <= 0 || n2 <= 0) throw DomainError("two_block_model: block sizes must be positive");
    if (s11 <= 0 || s12 <= 0 || s22 <= 0)
        throw DomainError("two_block_model: variances must be positive");
    const int n = n1 + n2;
    ModelSpec m;
    m.n = n;
    m.a = Eigen::VectorXd::Zero(n);
    m.a.head(n1).setConstant(a1);
    m.a.tail(n2).setConstant(a2);
    m.s = Eigen::MatrixXd::Zero(n, n);
    m.s.topLeftCorner(n1, n1).setConstant(s11 / n);
    m.s.topRightCorner(n1, n2).setConstant(s12 / n);
    m.s.bottomLeftCorner(n2, n1).setConstant(s12 / n);
    m.s.bottomRightCorner(n2, n2).setConstant(s22 / n);
    m.symmetry = symmetry;
    if (symmetry == Symmetry::RealSymmetric) {
        m.t = m.s.cast<cxd>();
        m.t.diagonal().setZero();
    } else {
        m.t = Eigen::MatrixXcd::Zero(n, n);
    }
    m.refresh_witnesses();
    return m;
}

ModelSpec ModelFamily::instantiate() const {
    switch (kind) {
        case FamilyKind::FlatSemicircle:
            return flat_model(n, symmetry);
        case FamilyKind::TwoBlock:
            return two_block_model(n1, n2, s11, s12, s22, a1, a2, symmetry);
        case FamilyKind::Custom:
            throw DomainError("ModelFamily: custom models are built from explicit arrays");
    }
    throw DomainError("ModelFamily: unknown kind");
}

}  // namespace cusp
