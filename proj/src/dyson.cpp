#include "cusp/dyson.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "cusp/parallel.hpp"

namespace cusp {

namespace {

// Exact reduction of the self-consistency iteration for profiles whose rows
// repeat (block models): indices with identical (a_i, s-row) carry identical
// m_i, so the N-dimensional map collapses to one dimension per class.
struct BlockReduction {
    Eigen::VectorXd a;        // representative shifts
    Eigen::MatrixXd s_sum;    // s_sum(b,b') = s(rep_b, rep_b') * count_b'
    std::vector<int> cls;     // class of each index
    int k = 0;
};

std::optional<BlockReduction> detect_blocks(const ModelSpec& model) {
    const int n = model.n;
    std::vector<int> cls(n, -1);
    std::vector<int> reps;
    for (int i = 0; i < n; ++i) {
        for (std::size_t b = 0; b < reps.size(); ++b) {
            const int r = reps[b];
            if (model.a(i) == model.a(r) && model.s.row(i) == model.s.row(r)) {
                cls[i] = static_cast<int>(b);
                break;
            }
        }
        if (cls[i] < 0) {
            cls[i] = static_cast<int>(reps.size());
            reps.push_back(i);
            if (reps.size() > 8) return std::nullopt;  // not worth reducing
        }
    }
    const int k = static_cast<int>(reps.size());
    std::vector<double> count(k, 0.0);
    for (int i = 0; i < n; ++i) count[cls[i]] += 1.0;

    BlockReduction red;
    red.k = k;
    red.cls = std::move(cls);
    red.a.resize(k);
    red.s_sum.resize(k, k);
    for (int b = 0; b < k; ++b) {
        red.a(b) = model.a(reps[b]);
        for (int b2 = 0; b2 < k; ++b2) red.s_sum(b, b2) = model.s(reps[b], reps[b2]) * count[b2];
    }
    return red;
}

// Damped fixed point for -1/m = z - a + Sm, with periodic Newton steps on
// the defect F(m) = 1/m + z - a + Sm. The plain damped map stalls near
// edges and cusps, where its multiplier degenerates to a near-unit
// rotation; the line-searched Newton step converges there.
void iterate(Eigen::VectorXcd& m, const Eigen::VectorXd& a, cxd z,
             const Eigen::MatrixXd& s_mat, const SolverOptions& opts, double& residual_out,
             long& iters_out) {
    const auto n = m.size();
    auto defect = [&](const Eigen::VectorXcd& v, const Eigen::VectorXcd& sv) {
        Eigen::VectorXcd f(n);
        for (Eigen::Index i = 0; i < n; ++i) f(i) = 1.0 / v(i) + z - a(i) + sv(i);
        return f;
    };
    auto sup = [](const Eigen::VectorXcd& f) { return f.cwiseAbs().maxCoeff(); };
    auto all_positive = [&](const Eigen::VectorXcd& v) {
        for (Eigen::Index i = 0; i < n; ++i)
            if (!(v(i).imag() > 0.0)) return false;
        return true;
    };

    const long newton_every = (n <= 16) ? 1 : 25;
    double theta = opts.theta0;
    Eigen::VectorXcd sm = s_mat * m;
    Eigen::VectorXcd f = defect(m, sm);
    double res = sup(f);
    long it = 0;
    while (res > opts.tolerance) {
        if (++it > opts.max_iterations)
            throw DivergenceError("solve_point: no convergence within max_iterations", res);

        // Newton is only safe once the damped map has locked onto the
        // Herglotz branch; far away it can target the reflected root. At a
        // degenerate (edge/cusp) root the residual is non-monotone along the
        // Newton path, so run a short burst of full steps and keep the best.
        if (res <= 0.02 && it % newton_every == 0) {
            Eigen::VectorXcd cand = m;
            Eigen::VectorXcd best = m, sbest = sm, fbest = f;
            double rbest = res;
            bool ok = true;
            for (int sub = 0; sub < 8 && ok; ++sub) {
                // J = dF/dm = -diag(1/m^2) + S
                Eigen::MatrixXcd jac = s_mat.cast<cxd>();
                for (Eigen::Index i = 0; i < n; ++i) jac(i, i) -= 1.0 / (cand(i) * cand(i));
                Eigen::VectorXcd scand = s_mat * cand;
                const Eigen::VectorXcd fcand = defect(cand, scand);
                const Eigen::VectorXcd step = jac.partialPivLu().solve(-fcand);
                double t = 1.0;
                ok = false;
                for (int back = 0; back < 20; ++back, t *= 0.5) {
                    Eigen::VectorXcd trial = cand + t * step;
                    if (!all_positive(trial)) continue;
                    cand.swap(trial);
                    ok = true;
                    break;
                }
                if (!ok) break;
                Eigen::VectorXcd strial = s_mat * cand;
                Eigen::VectorXcd ftrial = defect(cand, strial);
                const double rtrial = sup(ftrial);
                if (rtrial < rbest) {
                    best = cand;
                    sbest.swap(strial);
                    fbest.swap(ftrial);
                    rbest = rtrial;
                }
                if (rbest <= opts.tolerance || rtrial > 1e3 * res) break;
            }
            if (rbest < 0.6 * res) {
                m.swap(best);
                sm.swap(sbest);
                f.swap(fbest);
                res = rbest;
                continue;
            }
        }

        Eigen::VectorXcd next(n);
        for (Eigen::Index i = 0; i < n; ++i)
            next(i) = (1.0 - theta) * m(i) + theta * (-1.0 / (z - a(i) + sm(i)));
        if (!all_positive(next)) {
            // restart inside the upper half-plane with stronger damping
            m.setConstant(cxd(0.0, 1.0));
            sm = s_mat * m;
            f = defect(m, sm);
            res = sup(f);
            theta = std::max(theta * 0.5, 1e-8);
            continue;
        }

        Eigen::VectorXcd snext = s_mat * next;
        Eigen::VectorXcd fnext = defect(next, snext);
        const double rnext = sup(fnext);
        if (rnext > res && theta > 1e-8) {
            theta *= 0.5;  // reject the step
            continue;
        }
        m.swap(next);
        sm.swap(snext);
        f.swap(fnext);
        res = rnext;
        theta = std::min(theta * 1.02, opts.theta0);
    }
    residual_out = res;
    iters_out += it;
}

}  // namespace

StieltjesSolution solve_point(const ModelSpec& model, SpectralPoint zp,
                              const SolverOptions& opts, const Eigen::VectorXcd* warm_start) {
    if (!(zp.eta > 0.0)) throw DomainError("solve_point: eta must be positive");
    const int n = model.n;

    StieltjesSolution sol;
    sol.z = zp;

    std::optional<BlockReduction> red;
    if (opts.block_reduction) red = detect_blocks(model);

    // Cold starts at small eta are continued down from eta ~ 1, warm-starting
    // each stage; the map contracts quickly high up in the half-plane.
    auto eta_chain = [&](bool have_warm) {
        std::vector<double> etas;
        if (!have_warm && zp.eta < 0.05) {
            double e = 1.0;
            while (e > 4.0 * zp.eta) {
                etas.push_back(e);
                e *= 0.2;
            }
        }
        etas.push_back(zp.eta);
        return etas;
    };

    if (red) {
        const int k = red->k;
        Eigen::VectorXcd mk = Eigen::VectorXcd::Constant(k, cxd(0.0, 1.0));
        bool have_warm = false;
        if (warm_start && warm_start->size() == n) {
            for (int b = 0, i = 0; b < k && i < n; ++i)
                if (red->cls[i] == b) { mk(b) = (*warm_start)(i); ++b; }
            have_warm = true;
            for (int b = 0; b < k; ++b)
                if (!(mk(b).imag() > 0.0)) {
                    mk.setConstant(cxd(0.0, 1.0));
                    have_warm = false;
                    break;
                }
        }
        for (double eta : eta_chain(have_warm))
            iterate(mk, red->a, cxd(zp.tau, eta), red->s_sum, opts, sol.residual, sol.iterations);
        sol.m.resize(n);
        for (int i = 0; i < n; ++i) sol.m(i) = mk(red->cls[i]);
    } else {
        Eigen::VectorXcd m = Eigen::VectorXcd::Constant(n, cxd(0.0, 1.0));
        bool have_warm = false;
        if (warm_start && warm_start->size() == n) {
            m = *warm_start;
            have_warm = true;
            for (Eigen::Index i = 0; i < m.size(); ++i)
                if (!(m(i).imag() > 0.0)) {
                    m.setConstant(cxd(0.0, 1.0));
                    have_warm = false;
                    break;
                }
        }
        for (double eta : eta_chain(have_warm))
            iterate(m, model.a, cxd(zp.tau, eta), model.s, opts, sol.residual, sol.iterations);
        sol.m = std::move(m);
    }
    return sol;
}

Eigen::VectorXcd solve_derivative(const ModelSpec& model, const StieltjesSolution& sol,
                                  const SolverOptions& opts) {
    const int n = model.n;
    if (sol.m.size() != n) throw DomainError("solve_derivative: solution size mismatch");
    const Eigen::VectorXcd m2 = sol.m.array().square();

    std::optional<BlockReduction> red;
    if (opts.block_reduction) red = detect_blocks(model);

    Eigen::VectorXcd mp(n);
    if (red) {
        const int k = red->k;
        Eigen::VectorXcd m2k(k);
        std::vector<bool> seen(k, false);
        for (int i = 0; i < n; ++i)
            if (!seen[red->cls[i]]) { m2k(red->cls[i]) = m2(i); seen[red->cls[i]] = true; }
        Eigen::MatrixXcd b = Eigen::MatrixXcd::Identity(k, k) -
                             m2k.asDiagonal() * red->s_sum.cast<cxd>();
        Eigen::VectorXcd sol_k = b.partialPivLu().solve(m2k);
        const double rel = (b * sol_k - m2k).norm() / std::max(1e-300, m2k.norm());
        if (!(rel < 1e-6))
            throw NumericError("solve_derivative: near-singular stability operator; increase eta");
        for (int i = 0; i < n; ++i) mp(i) = sol_k(red->cls[i]);
    } else {
        Eigen::MatrixXcd b = Eigen::MatrixXcd::Identity(n, n) -
                             m2.asDiagonal() * model.s.cast<cxd>();
        mp = b.partialPivLu().solve(m2);
        const double rel = (b * mp - m2).norm() / std::max(1e-300, m2.norm());
        if (!(rel < 1e-6))
            throw NumericError("solve_derivative: near-singular stability operator; increase eta");
    }
    return mp;
}

double DensityProfile::integral() const {
    double sum = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i)
        sum += 0.5 * (rho[i] + rho[i - 1]) * (grid[i] - grid[i - 1]);
    return sum;
}

double DensityProfile::second_moment() const {
    double sum = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double f0 = grid[i - 1] * grid[i - 1] * rho[i - 1];
        const double f1 = grid[i] * grid[i] * rho[i];
        sum += 0.5 * (f0 + f1) * (grid[i] - grid[i - 1]);
    }
    return sum;
}

double DensityProfile::cumulative(double tau) const {
    double sum = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i] <= tau) {
            sum += 0.5 * (rho[i] + rho[i - 1]) * (grid[i] - grid[i - 1]);
        } else {
            if (grid[i - 1] < tau) {
                const double f = interp(tau);
                sum += 0.5 * (rho[i - 1] + f) * (tau - grid[i - 1]);
            }
            break;
        }
    }
    return sum;
}

double DensityProfile::interp(double tau) const {
    if (grid.empty()) throw DomainError("DensityProfile: empty grid");
    if (tau <= grid.front()) return rho.front();
    if (tau >= grid.back()) return rho.back();
    auto it = std::upper_bound(grid.begin(), grid.end(), tau);
    const std::size_t i = static_cast<std::size_t>(it - grid.begin());
    const double w = (tau - grid[i - 1]) / (grid[i] - grid[i - 1]);
    return (1.0 - w) * rho[i - 1] + w * rho[i];
}

double rho_at(const ModelSpec& model, double tau, double eta_floor, const SolverOptions& opts) {
    if (!(eta_floor > 0.0)) throw DomainError("rho_at: eta_floor must be positive");
    const auto hi = solve_point(model, {tau, 2.0 * eta_floor}, opts);
    const auto lo = solve_point(model, {tau, eta_floor}, opts, &hi.m);
    return std::max(0.0, 2.0 * lo.rho() - hi.rho());
}

namespace {

template <typename ForEach>
DensityProfile density_grid_impl(const ModelSpec& model, double lo, double hi,
                                 double resolution, double eta_floor,
                                 const SolverOptions& opts, ForEach&& for_each) {
    if (!(lo < hi)) throw DomainError("density_grid: need lo < hi");
    if (!(resolution > 0.0)) throw DomainError("density_grid: resolution must be positive");

    const int coarse = 257;
    std::vector<double> grid(coarse);
    for (int i = 0; i < coarse; ++i)
        grid[i] = lo + (hi - lo) * i / (coarse - 1);

    std::vector<double> rho(grid.size());
    auto eval_all = [&](const std::vector<double>& taus, std::vector<double>& out) {
        out.resize(taus.size());
        for_each(static_cast<long>(taus.size()), [&](long i) {
            out[static_cast<std::size_t>(i)] =
                rho_at(model, taus[static_cast<std::size_t>(i)], eta_floor, opts);
        });
    };
    eval_all(grid, rho);

    const double min_dx = std::max(1e-9, (hi - lo) * 1e-9);
    const std::size_t max_points = 20000;
    for (int round = 0; round < 24; ++round) {
        std::vector<double> inserts;
        for (std::size_t i = 1; i < grid.size(); ++i)
            if (std::abs(rho[i] - rho[i - 1]) > resolution && grid[i] - grid[i - 1] > min_dx)
                inserts.push_back(0.5 * (grid[i] + grid[i - 1]));
        if (inserts.empty() || grid.size() + inserts.size() > max_points) break;

        std::vector<double> vals;
        eval_all(inserts, vals);
        std::vector<double> g2, r2;
        g2.reserve(grid.size() + inserts.size());
        r2.reserve(grid.size() + inserts.size());
        std::size_t j = 0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            while (j < inserts.size() && inserts[j] < grid[i]) {
                g2.push_back(inserts[j]);
                r2.push_back(vals[j]);
                ++j;
            }
            g2.push_back(grid[i]);
            r2.push_back(rho[i]);
        }
        grid.swap(g2);
        rho.swap(r2);
    }

    DensityProfile profile;
    profile.grid = std::move(grid);
    profile.rho = std::move(rho);
    profile.eta_eval = eta_floor;
    return profile;
}

}  // namespace

DensityProfile density_grid(const ModelSpec& model, double lo, double hi, double resolution,
                            double eta_floor, const SolverOptions& opts) {
    return density_grid_impl(model, lo, hi, resolution, eta_floor, opts,
                             [](long n, auto&& body) { parallel_for(n, body); });
}

DensityProfile density_grid_serial(const ModelSpec& model, double lo, double hi,
                                   double resolution, double eta_floor,
                                   const SolverOptions& opts) {
    return density_grid_impl(model, lo, hi, resolution, eta_floor, opts,
                             [](long n, auto&& body) { serial_for(n, body); });
}

double ward_check(const Eigen::MatrixXcd& g, double eta) {
    if (!(eta > 0.0)) throw DomainError("ward_check: eta must be positive");
    const Eigen::Index n = g.rows();
    double worst = 0.0;
    for (Eigen::Index b = 0; b < n; ++b) {
        const double lhs = g.col(b).squaredNorm();
        const double rhs = g(b, b).imag() / eta;
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

}  // namespace cusp
