#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "cusp/common.hpp"

namespace cusp {

enum class Symmetry { ComplexHermitian, RealSymmetric };

/// Deformed Wigner-type matrix model H = A + W. `a` holds the diagonal of
/// the expectation A, `s` the entrywise variances E|w_ij|^2 and `t` the
/// second moments E w_ij^2 (zero diagonal). Witness constants for the
/// flatness (c/N <= s_ij <= C/N) and fullness bounds are computed at
/// construction so downstream tolerances can be scaled by them.
struct ModelSpec {
    int n = 0;
    Eigen::VectorXd a;
    Eigen::MatrixXd s;
    Eigen::MatrixXcd t;
    Symmetry symmetry = Symmetry::ComplexHermitian;

    double flatness_lower = 0.0;  // c = N * min_ij s_ij
    double flatness_upper = 0.0;  // C = N * max_ij s_ij
    double fullness_lower = 0.0;  // N * min eigenvalue of the 2x2 (Re,Im) covariances

    void refresh_witnesses();

    /// Variance profile after adding an independent GUE component of size ct:
    /// s_ij += ct/N, t unchanged.
    ModelSpec with_gue(double ct) const;
};

struct CheckResult {
    std::string name;
    bool pass;
    double witness;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool pass = true;
    double c = 0.0;  // flatness lower witness
    double C = 0.0;  // flatness upper witness
};

ValidationReport validate(const ModelSpec& model);

/// Uniform profile s_ij = 1/N, t = 0; its self-consistent density is the
/// semicircle on [-2,2].
ModelSpec flat_model(int n, Symmetry symmetry = Symmetry::ComplexHermitian);

/// Two-block profile: indices split into blocks of sizes n1, n2 with
/// piecewise-constant variances (s11, s12, s22)/N and diagonal shifts
/// (a1, a2). Gaps close and cusps form as the shifts vary.
ModelSpec two_block_model(int n1, int n2, double s11, double s12, double s22,
                          double a1, double a2,
                          Symmetry symmetry = Symmetry::ComplexHermitian);

enum class FamilyKind { FlatSemicircle, TwoBlock, Custom };

struct ModelFamily {
    FamilyKind kind = FamilyKind::FlatSemicircle;
    int n = 0;
    int n1 = 0, n2 = 0;
    double s11 = 1, s12 = 1, s22 = 1;
    double a1 = 0, a2 = 0;
    Symmetry symmetry = Symmetry::ComplexHermitian;

    ModelSpec instantiate() const;
};

}  // namespace cusp
