#include "cusp/tuning.hpp"

#include <cmath>

#include "cusp/numerics.hpp"

namespace cusp {

ModelSpec TwoBlockRay::at(double delta) const {
    return two_block_model(n1, n2, s11, s12, s22, delta * dir1, delta * dir2);
}

namespace {

struct MinPoint {
    double tau;
    double rho;
};

MinPoint density_minimum(const TwoBlockRay& ray, double delta, double eta_floor) {
    const ModelSpec m = ray.at(delta);
    auto rho = [&](double tau) { return rho_at(m, tau, eta_floor); };
    const int scan = 48;
    double best_tau = ray.tau_lo, best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= scan; ++i) {
        const double tau = ray.tau_lo + (ray.tau_hi - ray.tau_lo) * i / scan;
        const double r = rho(tau);
        if (r < best) { best = r; best_tau = tau; }
    }
    const double w = (ray.tau_hi - ray.tau_lo) / scan;
    const double tau = golden_min(rho, best_tau - w, best_tau + w, 1e-11);
    return {tau, rho(tau)};
}

double gap_length(const TwoBlockRay& ray, double delta, double eta_floor, double level = 1e-6) {
    const ModelSpec m = ray.at(delta);
    auto rho = [&](double tau) { return rho_at(m, tau, eta_floor); };
    const MinPoint mp = density_minimum(ray, delta, eta_floor);
    if (mp.rho > level) return 0.0;
    double hi_x = ray.tau_hi, lo_x = ray.tau_lo;
    for (int grow = 0; grow < 40 && rho(hi_x) <= level; ++grow) hi_x += 0.25;
    for (int grow = 0; grow < 40 && rho(lo_x) <= level; ++grow) lo_x -= 0.25;
    const double hi = bisect([&](double x) { return rho(x) - level; }, mp.tau, hi_x, 1e-10);
    const double lo = bisect([&](double x) { return rho(x) - level; }, lo_x, mp.tau, 1e-10);
    return hi - lo;
}

}  // namespace

TwoBlockTuning tune_two_block_cusp(const TwoBlockRay& ray, double zero_tol, double eta_floor) {
    // gap open above the critical shift, positive minimum below
    if (density_minimum(ray, ray.delta_lo, eta_floor).rho <= zero_tol ||
        density_minimum(ray, ray.delta_hi, eta_floor).rho > zero_tol)
        throw BracketError("tune_two_block_cusp: critical shift not bracketed");
    const double delta = bisect(
        [&](double d) {
            return (density_minimum(ray, d, eta_floor).rho > zero_tol) ? -1.0 : 1.0;
        },
        ray.delta_lo, ray.delta_hi, 1e-12);
    TwoBlockTuning out;
    out.delta = delta;
    out.location = density_minimum(ray, delta, eta_floor).tau;
    out.model = ray.at(delta);
    return out;
}

TwoBlockTuning tune_two_block_gap(const TwoBlockRay& ray, double target_gap, double eta_floor) {
    if (!(target_gap > 0.0)) throw DomainError("tune_two_block_gap: target must be positive");
    const double lo = tune_two_block_cusp(ray, 1e-7, eta_floor).delta;
    const double hi = ray.delta_hi + 1.0;
    const double delta = bisect(
        [&](double d) { return gap_length(ray, d, eta_floor) - target_gap; }, lo, hi, 1e-12);
    TwoBlockTuning out;
    out.delta = delta;
    out.location = density_minimum(ray, delta, eta_floor).tau;
    out.model = ray.at(delta);
    return out;
}

TwoBlockTuning tune_two_block_minimum(const TwoBlockRay& ray, double target_rho_min,
                                      double eta_floor) {
    if (!(target_rho_min > 0.0))
        throw DomainError("tune_two_block_minimum: target must be positive");
    const double hi = tune_two_block_cusp(ray, 1e-7, eta_floor).delta;
    const double lo = ray.delta_lo;
    const double delta = bisect(
        [&](double d) { return density_minimum(ray, d, eta_floor).rho - target_rho_min; }, lo,
        hi, 1e-12);
    TwoBlockTuning out;
    out.delta = delta;
    const MinPoint mp = density_minimum(ray, delta, eta_floor);
    out.location = mp.tau;
    out.model = ray.at(delta);
    return out;
}

TwoBlockTuning tune_two_block_cusp(int n, double zero_tol, double eta_floor) {
    return tune_two_block_cusp(TwoBlockRay::symmetric(n), zero_tol, eta_floor);
}

TwoBlockTuning tune_two_block_gap(int n, double target_gap, double eta_floor) {
    return tune_two_block_gap(TwoBlockRay::symmetric(n), target_gap, eta_floor);
}

TwoBlockTuning tune_two_block_minimum(int n, double target_rho_min, double eta_floor) {
    return tune_two_block_minimum(TwoBlockRay::symmetric(n), target_rho_min, eta_floor);
}

}  // namespace cusp
