#include "cusp/flow.hpp"

#include <algorithm>
#include <cmath>

#include "cusp/numerics.hpp"
#include "cusp/parallel.hpp"

namespace cusp {

cxd DysonEvaluator::operator()(cxd z) const {
    const auto sol = solve_point(model_, {z.real(), z.imag()}, opts_);
    return sol.avg();
}

cxd GridEvaluator::operator()(cxd z) const {
    // m(z) = int rho(x)/(x-z) dx for the piecewise-linear interpolant of the
    // stored profile, integrated in closed form per segment. A pointwise
    // quadrature would put poles at the grid nodes.
    cxd sum = 0.0;
    const auto& g = profile_.grid;
    const auto& r = profile_.rho;
    for (std::size_t i = 1; i < g.size(); ++i) {
        const double h = g[i] - g[i - 1];
        if (!(h > 0.0)) continue;
        const double b = (r[i] - r[i - 1]) / h;          // slope
        const double a = r[i - 1] - b * g[i - 1];        // intercept
        const cxd ratio = (g[i] - z) / (g[i - 1] - z);
        sum += b * h + (a + b * z) * std::log(ratio);
    }
    return sum;
}

cxd SemicircleEvaluator::operator()(cxd z) const {
    const cxd root = std::sqrt(z * z - 4.0);
    // branch with m ~ -1/z at infinity, Im m > 0 in the upper half-plane
    const cxd m = 0.5 * (-z + root);
    if (m.imag() > 0.0) return m;
    return 0.5 * (-z - root);
}

namespace {

// single solve at fixed z; `warm` seeds the iteration when provided
cxd fc_solve_stage(const StieltjesEvaluator& base, double s, cxd z, const FcOptions& opts,
                   const cxd* warm) {
    // F(m) = m - base(z + s m); scalar secant with a damped fixed point as
    // fallback. At flowed band edges the fixed-point multiplier degenerates
    // (s base' -> 1), where the secant keeps converging.
    auto defect = [&](cxd m) { return m - base(z + s * m); };
    cxd m = (warm && warm->imag() > 0.0) ? *warm : base(z);
    if (!(m.imag() > 0.0)) m = cxd(0.0, 1.0);
    cxd f = defect(m);
    double res = std::abs(f);
    cxd m_prev = m + cxd(1e-7, 1e-7);
    cxd f_prev = defect(m_prev);
    double theta = opts.theta0;
    long it = 0;
    while (res > opts.tolerance) {
        if (++it > opts.max_iterations)
            throw DivergenceError("fc_solve: no convergence within max_iterations", res);

        // secant burst, best-of up to 6 steps; non-monotone on purpose
        {
            cxd a = m_prev, fa = f_prev, b = m, fb = f;
            cxd best = m, fbest = f;
            double rbest = res;
            for (int sub = 0; sub < 6; ++sub) {
                const cxd denom = fb - fa;
                if (std::abs(denom) < 1e-300) break;
                const cxd c = b - fb * (b - a) / denom;
                if (!(c.imag() > 0.0)) break;
                const cxd fc = defect(c);
                a = b; fa = fb; b = c; fb = fc;
                if (std::abs(fc) < rbest) { best = c; fbest = fc; rbest = std::abs(fc); }
                if (rbest <= opts.tolerance || std::abs(fc) > 1e3 * res) break;
            }
            if (rbest < 0.6 * res) {
                m_prev = m; f_prev = f;
                m = best; f = fbest; res = rbest;
                continue;
            }
        }

        cxd target = m - f;  // the fixed-point image base(z + s m)
        cxd next = (1.0 - theta) * m + theta * target;
        if (!(next.imag() > 0.0)) {
            m = cxd(0.0, 1.0);
            f = defect(m);
            res = std::abs(f);
            m_prev = m + cxd(1e-7, 1e-7);
            f_prev = defect(m_prev);
            theta = std::max(0.5 * theta, 1e-8);
            continue;
        }
        const cxd fnext = defect(next);
        const double rnext = std::abs(fnext);
        if (rnext > res && theta > 1e-8) {
            theta *= 0.5;
            continue;
        }
        m_prev = m; f_prev = f;
        m = next; f = fnext; res = rnext;
        theta = std::min(theta * 1.02, opts.theta0);
    }
    return m;
}

}  // namespace

cxd fc_solve(const StieltjesEvaluator& base, double s, cxd z, const FcOptions& opts,
             const cxd* warm_start) {
    if (!(z.imag() > 0.0)) throw DomainError("fc_solve: z must be in the upper half-plane");
    if (s < 0.0) throw DomainError("fc_solve: s must be nonnegative");
    if (s == 0.0) return base(z);

    // Cold starts at small eta walk down from high in the half-plane; near
    // flowed edges the solution sits close to a branch point and direct
    // iteration from far away is unreliable.
    if (!warm_start && z.imag() < 1e-4) {
        cxd m;
        const cxd* seed = nullptr;
        double eta = 1e-2;
        while (eta > 3.0 * z.imag()) {
            m = fc_solve_stage(base, s, {z.real(), eta}, opts, seed);
            seed = &m;
            eta *= 0.3;
        }
        return fc_solve_stage(base, s, z, opts, seed);
    }
    return fc_solve_stage(base, s, z, opts, warm_start);
}

double fc_rho(const StieltjesEvaluator& base, double s, double tau, const FcOptions& opts) {
    const cxd hi = fc_solve(base, s, {tau, 2.0 * opts.eta0}, opts);
    const cxd lo = fc_solve(base, s, {tau, opts.eta0}, opts, &hi);
    return std::max(0.0, (2.0 * lo.imag() - hi.imag()) / kPi);
}

double xi_probe(const StieltjesEvaluator& base, double s, double tau, const FcOptions& opts) {
    const cxd hi = fc_solve(base, s, {tau, 2.0 * opts.eta0}, opts);
    const cxd lo = fc_solve(base, s, {tau, opts.eta0}, opts, &hi);
    return tau + s * (2.0 * lo.real() - hi.real());
}

namespace {

// Coarse scan for the lowest density point in [lo,hi].
std::pair<double, double> density_minimum(const StieltjesEvaluator& base, double s, double lo,
                                          double hi, const FcOptions& opts) {
    const int scan = 64;
    double best_tau = lo, best = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= scan; ++i) {
        const double tau = lo + (hi - lo) * i / scan;
        const double r = fc_rho(base, s, tau, opts);
        if (r < best) { best = r; best_tau = tau; }
    }
    const double w = (hi - lo) / scan;
    const double tau = golden_min(
        [&](double t) { return fc_rho(base, s, t, opts); },
        std::max(lo, best_tau - w), std::min(hi, best_tau + w), 1e-9);
    return {tau, fc_rho(base, s, tau, opts)};
}

constexpr double kGapOpenEps = 1e-6;

}  // namespace

EdgePair track_edges(const StieltjesEvaluator& base, double s, double lo, double hi,
                     const FcOptions& opts) {
    const auto [tau0, rho0] = density_minimum(base, s, lo, hi, opts);
    if (rho0 > kGapOpenEps)
        throw BracketError("track_edges: no gap inside the bracket (gap closed)");
    auto f = [&](double tau) { return fc_rho(base, s, tau, opts) - kGapOpenEps; };
    if (f(lo) < 0.0 || f(hi) < 0.0)
        throw BracketError("track_edges: bracket does not contain both bands");
    EdgePair edges;
    edges.e_plus = bisect(f, tau0, hi, 1e-9);
    edges.e_minus = bisect(f, lo, tau0, 1e-9);
    return edges;
}

MinimumPoint track_minimum(const StieltjesEvaluator& base, double s, double lo, double hi,
                           const FcOptions& opts) {
    const auto [tau0, rho0] = density_minimum(base, s, lo, hi, opts);
    if (tau0 <= lo + 1e-12 || tau0 >= hi - 1e-12)
        throw BracketError("track_minimum: no interior minimum in bracket");
    // shallow minima are smoothed on the scale rho^3; refine with an eta
    // floor far below it so the cube-root wings contribute percent-level
    const double eta_fine = std::min(opts.eta0, std::max(1e-13, 1e-3 * rho0 * rho0 * rho0));
    if (eta_fine < opts.eta0) {
        FcOptions fine = opts;
        fine.eta0 = eta_fine;
        const double w = std::max(4.0 * rho0 * rho0 * rho0, 1e3 * opts.eta0);
        const double tau = golden_min(
            [&](double t) { return fc_rho(base, s, t, fine); },
            std::max(lo, tau0 - w), std::min(hi, tau0 + w), 1e-12);
        return {tau, fc_rho(base, s, tau, fine)};
    }
    return {tau0, rho0};
}

double find_cusp_time(const StieltjesEvaluator& base, double s_lo, double s_hi, double tau_lo,
                      double tau_hi, const FcOptions& opts) {
    auto gap_open = [&](double s) {
        return density_minimum(base, s, tau_lo, tau_hi, opts).second < kGapOpenEps;
    };
    if (!gap_open(s_lo))
        throw BracketError("find_cusp_time: gap not open at s_lo");
    if (gap_open(s_hi))
        throw BracketError("find_cusp_time: gap still open at s_hi");
    double lo = s_lo, hi = s_hi;
    while (hi - lo > 1e-6 * hi) {
        const double mid = 0.5 * (lo + hi);
        (gap_open(mid) ? lo : hi) = mid;
    }
    const double t0 = 0.5 * (lo + hi);

    // The bisection is limited by the eta floor once the gap is thinner than
    // eta; refine with the closure law, whose 2/3 power is linear in s, by
    // extrapolating gap^{2/3} to zero from well-resolved gaps.
    std::vector<double> ss, g23;
    for (double frac : {0.03, 0.02, 0.01, 0.005, 0.002}) {
        const double s = t0 * (1.0 - frac);
        if (s <= s_lo) continue;
        try {
            const auto e = track_edges(base, s, tau_lo, tau_hi, opts);
            ss.push_back(s);
            g23.push_back(std::pow(e.gap(), 2.0 / 3.0));
        } catch (const BracketError&) {
        }
    }
    if (ss.size() < 2) return t0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(ss.size());
    for (std::size_t i = 0; i < ss.size(); ++i) {
        sx += ss[i];
        sy += g23[i];
        sxx += ss[i] * ss[i];
        sxy += ss[i] * g23[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double icept = (sy - slope * sx) / n;
    const double t_star = -icept / slope;  // gap^{2/3} hits zero here
    if (!(t_star > s_lo) || !(t_star < s_hi)) return t0;
    return t_star;
}

namespace {

template <typename ForEach>
std::vector<FlowState> trajectory_impl(const StieltjesEvaluator& base,
                                       const std::vector<double>& times, double tau_lo,
                                       double tau_hi, const FcOptions& opts,
                                       ForEach&& for_each) {
    std::vector<FlowState> states(times.size());
    for_each(static_cast<long>(times.size()), [&](long i) {
        FlowState st;
        st.s = times[static_cast<std::size_t>(i)];
        const auto [tau0, rho0] = density_minimum(base, st.s, tau_lo, tau_hi, opts);
        if (rho0 < kGapOpenEps) {
            EdgePair e;
            auto f = [&](double tau) { return fc_rho(base, st.s, tau, opts) - kGapOpenEps; };
            e.e_plus = bisect(f, tau0, tau_hi, 1e-9);
            e.e_minus = bisect(f, tau_lo, tau0, 1e-9);
            st.edges = e;
            st.gap = e.gap();
        } else {
            st.minimum = MinimumPoint{tau0, rho0};
        }
        states[static_cast<std::size_t>(i)] = st;
    });
    return states;
}

}  // namespace

std::vector<FlowState> flow_trajectory(const StieltjesEvaluator& base,
                                       const std::vector<double>& times, double tau_lo,
                                       double tau_hi, const FcOptions& opts) {
    return trajectory_impl(base, times, tau_lo, tau_hi, opts,
                           [](long n, auto&& body) { parallel_for(n, body); });
}

std::vector<FlowState> flow_trajectory_serial(const StieltjesEvaluator& base,
                                              const std::vector<double>& times, double tau_lo,
                                              double tau_hi, const FcOptions& opts) {
    return trajectory_impl(base, times, tau_lo, tau_hi, opts,
                           [](long n, auto&& body) { serial_for(n, body); });
}

}  // namespace cusp
