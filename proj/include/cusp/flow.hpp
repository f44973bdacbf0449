#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "cusp/dyson.hpp"

namespace cusp {

/// Stieltjes transform of a density, defined on the open upper half-plane.
struct StieltjesEvaluator {
    virtual cxd operator()(cxd z) const = 0;
    virtual ~StieltjesEvaluator() = default;
};

/// <m(z)> of a model's self-consistent solution.
class DysonEvaluator final : public StieltjesEvaluator {
  public:
    explicit DysonEvaluator(ModelSpec model, SolverOptions opts = {})
        : model_(std::move(model)), opts_(opts) {}
    cxd operator()(cxd z) const override;

  private:
    ModelSpec model_;
    SolverOptions opts_;
};

/// Cauchy integral of a stored density profile.
class GridEvaluator final : public StieltjesEvaluator {
  public:
    explicit GridEvaluator(DensityProfile profile) : profile_(std::move(profile)) {}
    cxd operator()(cxd z) const override;

  private:
    DensityProfile profile_;
};

/// Analytic semicircle transform (-z + sqrt(z^2 - 4))/2; test workhorse.
class SemicircleEvaluator final : public StieltjesEvaluator {
  public:
    cxd operator()(cxd z) const override;
};

struct FcOptions {
    double tolerance = 1e-12;
    long max_iterations = 200000;
    double theta0 = 0.5;
    double eta0 = 1e-9;  // floor for eta -> 0 extrapolations
};

/// Free convolution with a semicircle of variance s: the unique m in the
/// upper half-plane with m = base(z + s m).
cxd fc_solve(const StieltjesEvaluator& base, double s, cxd z, const FcOptions& opts = {},
             const cxd* warm_start = nullptr);

/// eta -> 0 extrapolated density of the flowed measure at energy tau.
double fc_rho(const StieltjesEvaluator& base, double s, double tau, const FcOptions& opts = {});

/// xi_s(tau) = tau + s * Re m_s(tau), eta -> 0 extrapolated.
double xi_probe(const StieltjesEvaluator& base, double s, double tau,
                const FcOptions& opts = {});

struct EdgePair {
    double e_minus = 0.0;
    double e_plus = 0.0;
    double gap() const { return e_plus - e_minus; }
};

/// Gap edges of the flowed density inside [lo,hi], refined to 1e-9.
EdgePair track_edges(const StieltjesEvaluator& base, double s, double lo, double hi,
                     const FcOptions& opts = {});

struct MinimumPoint {
    double location = 0.0;
    double rho = 0.0;
};

/// Post-cusp local minimum of the flowed density inside [lo,hi].
MinimumPoint track_minimum(const StieltjesEvaluator& base, double s, double lo, double hi,
                           const FcOptions& opts = {});

/// Critical time at which the gap inside [tau_lo,tau_hi] closes; bisection on
/// the gap-open predicate to relative 1e-6.
double find_cusp_time(const StieltjesEvaluator& base, double s_lo, double s_hi,
                      double tau_lo, double tau_hi, const FcOptions& opts = {});

struct FlowState {
    double s = 0.0;
    std::optional<EdgePair> edges;
    std::optional<double> gap;
    std::optional<MinimumPoint> minimum;
    std::optional<double> t_star;
};

/// Snapshot trajectory over the given times; OpenMP-parallel across times,
/// with a serial reference for tests.
std::vector<FlowState> flow_trajectory(const StieltjesEvaluator& base,
                                       const std::vector<double>& times, double tau_lo,
                                       double tau_hi, const FcOptions& opts = {});
std::vector<FlowState> flow_trajectory_serial(const StieltjesEvaluator& base,
                                              const std::vector<double>& times, double tau_lo,
                                              double tau_hi, const FcOptions& opts = {});

}  // namespace cusp
