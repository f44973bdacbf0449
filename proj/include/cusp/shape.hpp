#pragma once

#include <functional>
#include <vector>

#include "cusp/dyson.hpp"

namespace cusp {

struct SupportMap {
    struct Interval {
        double lo, hi;
    };
    struct Gap {
        double lo, hi;
        double length() const { return hi - lo; }
    };
    std::vector<Interval> intervals;  // disjoint, sorted
    std::vector<Gap> gaps;            // internal gaps between intervals
};

using RhoFn = std::function<double(double)>;

/// Support components as maximal runs with rho > threshold. The overload
/// with an evaluator refines the endpoints by bisection to 1e-8.
SupportMap find_support(const DensityProfile& profile, double threshold);
SupportMap find_support(const DensityProfile& profile, double threshold, const RhoFn& rho);

enum class SingKind { Edge, Cusp, Minimum };

struct SingularityReport {
    SingKind kind = SingKind::Cusp;
    double location = 0.0;    // edge pair midpoint reference: e_- for kind Edge
    double gap = 0.0;         // Delta (kind Edge)
    double rho_min = 0.0;     // rho at the minimum (kind Minimum)
    double gamma = 0.0;       // shape slope
    double base_point = 0.0;  // cusp, gap midpoint, or minimum
    double t_rho = 0.0;       // signed time-to-cusp parameter
    double fit_residual = 0.0;
    double exponent = 0.0;    // log-log slope of rho near the feature
};

struct ClassifyOptions {
    double eta_floor = 1e-9;
    double cusp_threshold_factor = 10.0;  // cusp when rho_min < factor * eta_eval^(1/3)
    double residual_bound = 0.2;
    SolverOptions solver;
};

struct UnclassifiableError : NumericError {
    SingularityReport report;
    UnclassifiableError(const std::string& msg, SingularityReport r)
        : NumericError(msg), report(std::move(r)) {}
};

/// Classify the density feature nearest to `near` (edge of a gap, exact
/// cusp, or small non-zero minimum) and fit the shape slope gamma.
SingularityReport classify(const ModelSpec& model, const DensityProfile& profile,
                           const SupportMap& support, double near,
                           const ClassifyOptions& opts = {});

/// Shape function of the density at the edge of a small gap.
double psi_edge(double lambda);
/// Shape function of the density around a small non-zero minimum; even.
double psi_min(double lambda);

struct SigmaDiagnostics {
    Eigen::VectorXd f;  // Im m / (rho |m|)
    Eigen::VectorXi p;  // sgn Re m with sgn(0) = 0
    double sigma = 0.0; // <p f^3>
};

SigmaDiagnostics compute_sigma(const StieltjesSolution& sol);

enum class StabilityVariant {
    AbsSqS, SqS, ConjSqS,   // 1 - diag(|m|^2) S, 1 - diag(m^2) S, 1 - diag(conj(m)^2) S
    AbsSqT, SqT, ConjSqT,
    AbsSqTt, SqTt, ConjSqTt,
};

struct StabilityReport {
    cxd beta;                    // smallest-modulus eigenvalue
    Eigen::VectorXcd right_vec;  // B b = beta b
    Eigen::VectorXcd left_vec;   // B^* l = conj(beta) l, <l,b> = 1
    StabilityVariant variant = StabilityVariant::SqS;
    double comparison_ratio = 0.0;  // |beta| / (eta/rho + rho (rho + |sigma|))
};

StabilityReport stability_spectrum(const ModelSpec& model, const StieltjesSolution& sol,
                                   StabilityVariant variant);

enum class EtaFRegime { Bulk, CuspOrMinimum, EdgeInsideGap, EdgeSmallGap };

struct FluctuationScale {
    double eta_f = 0.0;
    EtaFRegime regime = EtaFRegime::Bulk;
};

/// Scale on which a single eigenvalue near tau fluctuates: inside the
/// support the window with mass 1/N, inside a gap the case formulas in
/// terms of the gap length Delta.
FluctuationScale compute_eta_f(const DensityProfile& profile, const SupportMap& support,
                               double tau, long n);

}  // namespace cusp
