#include "cusp/shape.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "cusp/numerics.hpp"

namespace cusp {

namespace {

SupportMap build_support(const DensityProfile& profile, double threshold,
                         const RhoFn* refine) {
    if (threshold >= *std::max_element(profile.rho.begin(), profile.rho.end()))
        throw DomainError("find_support: threshold at or above max density");

    SupportMap map;
    const auto& g = profile.grid;
    const auto& r = profile.rho;
    const std::size_t n = g.size();

    std::size_t i = 0;
    while (i < n) {
        while (i < n && r[i] <= threshold) ++i;
        if (i == n) break;
        const std::size_t start = i;
        while (i < n && r[i] > threshold) ++i;
        const std::size_t stop = i - 1;  // last index above threshold

        double lo = g[start];
        double hi = g[stop];
        if (start > 0) {
            // crossing between g[start-1] and g[start]
            if (refine) {
                lo = bisect([&](double x) { return (*refine)(x) - threshold; },
                            g[start - 1], g[start], 1e-8);
            } else {
                const double w = (threshold - r[start - 1]) / (r[start] - r[start - 1]);
                lo = g[start - 1] + w * (g[start] - g[start - 1]);
            }
        }
        if (stop + 1 < n) {
            if (refine) {
                hi = bisect([&](double x) { return (*refine)(x) - threshold; },
                            g[stop], g[stop + 1], 1e-8);
            } else {
                const double w = (r[stop] - threshold) / (r[stop] - r[stop + 1]);
                hi = g[stop] + w * (g[stop + 1] - g[stop]);
            }
        }
        map.intervals.push_back({lo, hi});
    }
    for (std::size_t k = 1; k < map.intervals.size(); ++k)
        map.gaps.push_back({map.intervals[k - 1].hi, map.intervals[k].lo});
    return map;
}

}  // namespace

SupportMap find_support(const DensityProfile& profile, double threshold) {
    return build_support(profile, threshold, nullptr);
}

SupportMap find_support(const DensityProfile& profile, double threshold, const RhoFn& rho) {
    return build_support(profile, threshold, &rho);
}

double psi_edge(double lambda) {
    if (lambda < 0.0) throw DomainError("psi_edge: lambda must be nonnegative");
    if (lambda == 0.0) return 0.0;
    const double root = std::sqrt(lambda * (1.0 + lambda));
    const double plus = 1.0 + 2.0 * lambda + 2.0 * root;
    const double p23 = std::cbrt(plus * plus);
    // (1+2l-2sqrt(l(1+l))) = 1/plus exactly
    return root / (p23 + 1.0 / p23 + 1.0);
}

double psi_min(double lambda) {
    const double al = std::abs(lambda);
    const double hyp = std::sqrt(1.0 + al * al);
    const double q = hyp + al;  // (hyp - al) = 1/q
    const double q23 = std::cbrt(q * q);
    return hyp / (q23 + 1.0 / q23 - 1.0) - 1.0;
}

SigmaDiagnostics compute_sigma(const StieltjesSolution& sol) {
    const double rho = sol.rho();
    if (rho <= 1e-14)
        throw NumericError("compute_sigma: degenerate density at this spectral point");
    const Eigen::Index n = sol.m.size();
    SigmaDiagnostics d;
    d.f.resize(n);
    d.p.resize(n);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const cxd m = sol.m(i);
        d.f(i) = m.imag() / (rho * std::abs(m));
        d.p(i) = (m.real() > 0.0) ? 1 : (m.real() < 0.0 ? -1 : 0);
        acc += d.p(i) * d.f(i) * d.f(i) * d.f(i);
    }
    d.sigma = acc / static_cast<double>(n);
    return d;
}

namespace {

struct VariantParts {
    Eigen::VectorXcd mpair;     // entrywise m-product
    const Eigen::MatrixXd* rs;  // set when R = S
    Eigen::MatrixXcd rt;        // materialised when R = T or T^t
    bool uses_s;
};

VariantParts variant_parts(const ModelSpec& model, const Eigen::VectorXcd& m,
                           StabilityVariant v) {
    VariantParts parts;
    auto pair_of = [&](int which) -> Eigen::VectorXcd {
        switch (which) {
            case 0: return m.cwiseAbs2().cast<cxd>();
            case 1: return m.array().square();
            default: return m.conjugate().array().square();
        }
    };
    const int idx = static_cast<int>(v);
    parts.mpair = pair_of(idx % 3);
    const int rsel = idx / 3;
    parts.uses_s = (rsel == 0);
    if (rsel == 0) {
        parts.rs = &model.s;
    } else if (rsel == 1) {
        parts.rt = model.t;
    } else {
        parts.rt = model.t.transpose();
    }
    return parts;
}

// Exact spectrum of B = 1 - diag(mpair) S for block-structured profiles:
// the operator preserves the span of block indicators, where it reduces to a
// k x k matrix, and acts as the identity on the complement.
struct ReducedStability {
    Eigen::MatrixXcd k_red;       // diag(mpair_red) * s_sum
    Eigen::VectorXcd mpair_red;
    Eigen::MatrixXd s_sum;
    std::vector<int> cls;
    int k;
};

std::optional<ReducedStability> reduce_stability(const ModelSpec& model,
                                                 const Eigen::VectorXcd& mpair) {
    const int n = model.n;
    std::vector<int> cls(n, -1);
    std::vector<int> reps;
    for (int i = 0; i < n; ++i) {
        for (std::size_t b = 0; b < reps.size(); ++b) {
            const int r = reps[b];
            if (model.a(i) == model.a(r) && mpair(i) == mpair(r) &&
                model.s.row(i) == model.s.row(r)) {
                cls[i] = static_cast<int>(b);
                break;
            }
        }
        if (cls[i] < 0) {
            cls[i] = static_cast<int>(reps.size());
            reps.push_back(i);
            if (reps.size() > 8) return std::nullopt;
        }
    }
    const int k = static_cast<int>(reps.size());
    std::vector<double> count(k, 0.0);
    for (int i = 0; i < n; ++i) count[cls[i]] += 1.0;

    ReducedStability red;
    red.k = k;
    red.cls = std::move(cls);
    red.s_sum.resize(k, k);
    red.mpair_red.resize(k);
    for (int b = 0; b < k; ++b) {
        red.mpair_red(b) = mpair(reps[b]);
        for (int b2 = 0; b2 < k; ++b2)
            red.s_sum(b, b2) = model.s(reps[b], reps[b2]) * count[b2];
    }
    red.k_red = red.mpair_red.asDiagonal() * red.s_sum.cast<cxd>();
    return red;
}

// Inverse iteration for the smallest-modulus eigenvalue of a dense operator.
std::pair<cxd, Eigen::VectorXcd> smallest_eigenpair(const Eigen::MatrixXcd& b) {
    const Eigen::Index n = b.rows();
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(b);
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = cxd(1.0, 0.1 + 1e-3 * i);
    v.normalize();
    cxd beta = 0.0;
    for (int it = 0; it < 300; ++it) {
        Eigen::VectorXcd w = lu.solve(v);
        const double norm = w.norm();
        if (!(norm > 0.0) || !std::isfinite(norm)) break;
        w /= norm;
        const cxd beta_new = w.dot(b * w);  // Rayleigh quotient, w normalised
        const double drift = (w - w * (w.dot(v) / std::abs(w.dot(v)))).norm();
        v.swap(w);
        if (std::abs(beta_new - beta) <= 1e-14 + 1e-12 * std::abs(beta_new) && drift < 1e-10) {
            beta = beta_new;
            break;
        }
        beta = beta_new;
    }
    // polish the estimate
    beta = v.dot(b * v);
    const double rel = (b * v - beta * v).norm();
    if (!(rel < 1e-7)) {
        if (n > 2048)
            throw NumericError("stability_spectrum: inverse iteration failed for large operator");
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(b);
        Eigen::Index best = 0;
        es.eigenvalues().cwiseAbs().minCoeff(&best);
        return {es.eigenvalues()(best), es.eigenvectors().col(best)};
    }
    return {beta, v};
}

}  // namespace

StabilityReport stability_spectrum(const ModelSpec& model, const StieltjesSolution& sol,
                                   StabilityVariant variant) {
    const int n = model.n;
    if (sol.m.size() != n) throw DomainError("stability_spectrum: solution size mismatch");
    VariantParts parts = variant_parts(model, sol.m, variant);

    StabilityReport rep;
    rep.variant = variant;

    Eigen::VectorXcd right, left;
    cxd beta;

    std::optional<ReducedStability> red;
    if (parts.uses_s) red = reduce_stability(model, parts.mpair);

    if (red) {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(red->k_red);
        // candidate eigenvalues of B: 1 - mu over the reduced block, plus 1
        // on the complement (if any index class repeats)
        Eigen::Index best = -1;
        double best_mod = std::numeric_limits<double>::infinity();
        for (Eigen::Index j = 0; j < red->k; ++j) {
            const double mod = std::abs(1.0 - es.eigenvalues()(j));
            if (mod < best_mod) { best_mod = mod; best = j; }
        }
        const bool complement_exists = n > red->k;
        if (complement_exists && 1.0 < best_mod) {
            // identity eigenvalue on the complement wins
            int block = -1;
            std::vector<int> first(red->k, -1);
            for (int i = 0; i < n && block < 0; ++i) {
                if (first[red->cls[i]] < 0) first[red->cls[i]] = i;
                else block = i;
            }
            beta = 1.0;
            right = Eigen::VectorXcd::Zero(n);
            right(first[red->cls[block]]) = 1.0;
            right(block) = -1.0;
            left = right;
        } else {
            beta = 1.0 - es.eigenvalues()(best);
            const Eigen::VectorXcd u = es.eigenvectors().col(best);
            right.resize(n);
            for (int i = 0; i < n; ++i) right(i) = u(red->cls[i]);
            // left problem in the block subspace: s_sum * diag(conj(mpair))
            Eigen::MatrixXcd l_red = red->s_sum.cast<cxd>() *
                                     red->mpair_red.conjugate().asDiagonal();
            Eigen::ComplexEigenSolver<Eigen::MatrixXcd> esl(l_red);
            Eigen::Index bl = 0;
            double dist = std::numeric_limits<double>::infinity();
            const cxd target = std::conj(es.eigenvalues()(best));
            for (Eigen::Index j = 0; j < red->k; ++j) {
                const double d = std::abs(esl.eigenvalues()(j) - target);
                if (d < dist) { dist = d; bl = j; }
            }
            const Eigen::VectorXcd w = esl.eigenvectors().col(bl);
            left.resize(n);
            for (int i = 0; i < n; ++i) left(i) = w(red->cls[i]);
        }
    } else {
        if (n > 4096) throw NumericError("stability_spectrum: operator too large for dense path");
        Eigen::MatrixXcd b;
        if (parts.uses_s)
            b = Eigen::MatrixXcd::Identity(n, n) - parts.mpair.asDiagonal() * model.s.cast<cxd>();
        else
            b = Eigen::MatrixXcd::Identity(n, n) - parts.mpair.asDiagonal() * parts.rt;
        auto [bv, rv] = smallest_eigenpair(b);
        beta = bv;
        right = rv;
        const cxd shift = std::conj(beta) + cxd(1e-11, 1e-11) * (1.0 + std::abs(beta));
        auto [lv_beta, lv] = smallest_eigenpair(Eigen::MatrixXcd(
            b.adjoint() - shift * Eigen::MatrixXcd::Identity(n, n)));
        (void)lv_beta;
        left = lv;
    }

    // normalise: |right| = 1 in the N-weighted norm, <left, right> = 1
    const double nr = std::sqrt(right.squaredNorm() / n);
    right /= nr;
    const cxd ip = left.dot(right) / static_cast<double>(n);
    if (std::abs(ip) < 1e-300)
        throw NumericError("stability_spectrum: left/right eigenvectors orthogonal");
    left /= std::conj(ip);

    rep.beta = beta;
    rep.right_vec = std::move(right);
    rep.left_vec = std::move(left);

    const double rho = sol.rho();
    const double eta = sol.z.eta;
    double denom = std::numeric_limits<double>::infinity();
    if (rho > 1e-14) {
        const double sigma = std::abs(compute_sigma(sol).sigma);
        denom = eta / rho + rho * (rho + sigma);
    }
    rep.comparison_ratio = std::abs(rep.beta) / denom;
    return rep;
}

FluctuationScale compute_eta_f(const DensityProfile& profile, const SupportMap& support,
                               double tau, long n) {
    if (profile.grid.empty() || tau < profile.grid.front() || tau > profile.grid.back())
        throw DomainError("compute_eta_f: tau outside the profiled window");
    if (n <= 0) throw DomainError("compute_eta_f: n must be positive");

    const double nf = static_cast<double>(n);

    // inside a gap (or outside all intervals): gap-length formulas
    bool inside = false;
    for (const auto& iv : support.intervals)
        if (tau >= iv.lo && tau <= iv.hi) { inside = true; break; }

    if (!inside) {
        double delta = 1.0;  // semi-infinite gaps are capped at 1
        for (const auto& gap : support.gaps)
            if (tau > gap.lo && tau < gap.hi) { delta = std::min(gap.length(), 1.0); break; }
        FluctuationScale out;
        if (delta > std::pow(nf, -0.75)) {
            out.eta_f = std::pow(delta, 1.0 / 9.0) * std::pow(nf, -2.0 / 3.0);
            out.regime = EtaFRegime::EdgeInsideGap;
        } else {
            out.eta_f = std::pow(nf, -0.75);
            out.regime = EtaFRegime::EdgeSmallGap;
        }
        return out;
    }

    // inside the support: solve for the symmetric window carrying mass 1/N
    const double span = profile.grid.back() - profile.grid.front();
    auto mass = [&](double h) {
        return profile.cumulative(tau + h) - profile.cumulative(tau - h);
    };
    double eta_f;
    if (mass(span) <= 1.0 / nf) {
        eta_f = span;
    } else {
        eta_f = bisect([&](double h) { return mass(h) - 1.0 / nf; }, 0.0, span,
                       1e-14 + 1e-10 * span);
    }
    FluctuationScale out;
    out.eta_f = eta_f;
    out.regime = (profile.interp(tau) < std::pow(nf, -0.25)) ? EtaFRegime::CuspOrMinimum
                                                             : EtaFRegime::Bulk;
    return out;
}

namespace {

struct LinearFit {
    double prefactor;
    double residual;
};

// least squares of rho ~ pref * basis(x), relative L2 misfit
LinearFit fit_prefactor(const std::vector<double>& rho, const std::vector<double>& basis) {
    double num = 0, den = 0, rr = 0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        num += rho[i] * basis[i];
        den += basis[i] * basis[i];
        rr += rho[i] * rho[i];
    }
    const double pref = num / den;
    double rss = 0;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        const double r = rho[i] - pref * basis[i];
        rss += r * r;
    }
    return {pref, std::sqrt(rss / std::max(rr, 1e-300))};
}

std::vector<double> log_spaced(double lo, double hi, int count) {
    std::vector<double> out(count);
    const double l0 = std::log(lo), l1 = std::log(hi);
    for (int i = 0; i < count; ++i) out[i] = std::exp(l0 + (l1 - l0) * i / (count - 1));
    return out;
}

}  // namespace

SingularityReport classify(const ModelSpec& model, const DensityProfile& profile,
                           const SupportMap& support, double near,
                           const ClassifyOptions& opts) {
    auto rho = [&](double tau) { return rho_at(model, tau, opts.eta_floor, opts.solver); };
    // below this level a minimum cannot be told apart from zero at the
    // eta floor the classifier evaluates at
    const double thr_cusp = opts.cusp_threshold_factor * std::cbrt(opts.eta_floor);

    // Candidate features: internal gaps, extremal support edges, interior minima.
    struct Feature { double location; int type; double aux_lo, aux_hi; };  // 0 gap, 1 edge, 2 min
    std::vector<Feature> feats;
    for (const auto& gap : support.gaps)
        feats.push_back({0.5 * (gap.lo + gap.hi), 0, gap.lo, gap.hi});
    if (!support.intervals.empty()) {
        feats.push_back({support.intervals.front().lo, 1, 0, 0});
        feats.push_back({support.intervals.back().hi, 1, 0, 0});
    }
    // discrete interior minima of the profile
    for (std::size_t i = 1; i + 1 < profile.grid.size(); ++i) {
        if (profile.rho[i] <= profile.rho[i - 1] && profile.rho[i] <= profile.rho[i + 1]) {
            bool interior = false;
            for (const auto& iv : support.intervals)
                if (profile.grid[i] > iv.lo + 1e-6 && profile.grid[i] < iv.hi - 1e-6) interior = true;
            if (interior && profile.rho[i] < 0.5 * *std::max_element(profile.rho.begin(), profile.rho.end()))
                feats.push_back({profile.grid[i], 2, 0, 0});
        }
    }
    if (feats.empty()) throw DomainError("classify: no gap or local minimum in the profile");
    auto nearest = *std::min_element(feats.begin(), feats.end(), [&](const Feature& a, const Feature& b) {
        auto dist = [&](const Feature& f) {
            if (f.type == 0 && near >= f.aux_lo && near <= f.aux_hi) return 0.0;
            return std::abs(f.location - near);
        };
        return dist(a) < dist(b);
    });

    SingularityReport rep;

    if (nearest.type == 1) {
        // extremal support edge: treated as the edge of a macroscopic gap of capped length 1
        const bool is_left_end = nearest.location == support.intervals.front().lo;
        const double edge = nearest.location;
        const double into = is_left_end ? 1.0 : -1.0;  // direction into the band
        const double delta = 1.0;

        auto xs = log_spaced(0.1 * delta * 1e-3, 0.01, 24);
        std::vector<double> vals, basis;
        for (double x : xs) {
            vals.push_back(rho(edge + into * x));
            basis.push_back(psi_edge(x / delta));
        }
        auto fit = fit_prefactor(vals, basis);
        const double gamma = 0.5 * std::pow(fit.prefactor * 2.0 * kPi /
                                            (std::sqrt(3.0) * std::cbrt(delta)), 0.75);
        auto slope_xs = log_spaced(1e-4, 1e-2, 16);
        std::vector<double> slope_vals;
        for (double x : slope_xs) slope_vals.push_back(rho(edge + into * x));
        const auto pl = fit_power_law(slope_xs, slope_vals);

        rep.kind = SingKind::Edge;
        rep.location = edge;
        rep.gap = delta;
        rep.gamma = gamma;
        rep.base_point = edge;
        rep.t_rho = 3.0 * std::pow(delta, 2.0 / 3.0) / std::pow(2.0 * gamma, 4.0 / 3.0);
        rep.fit_residual = fit.residual;
        rep.exponent = pl.exponent;
    } else {
        // gap, cusp, or non-zero minimum around an interior density minimum
        double lo_br, hi_br;
        if (nearest.type == 0) {
            lo_br = nearest.aux_lo - 0.2 * (nearest.aux_hi - nearest.aux_lo) - 1e-3;
            hi_br = nearest.aux_hi + 0.2 * (nearest.aux_hi - nearest.aux_lo) + 1e-3;
        } else {
            lo_br = nearest.location - 0.05;
            hi_br = nearest.location + 0.05;
        }
        const double tau0 = golden_min(rho, lo_br, hi_br, 1e-10);
        const double rho0 = rho(tau0);
        const double q1 = std::max(thr_cusp, 4.0 * rho0 + 1e-12);
        // widen the bracket until the density exceeds the probe level on both sides
        for (int grow = 0; grow < 40 && rho(hi_br) <= q1; ++grow) hi_br += 0.05;
        for (int grow = 0; grow < 40 && rho(lo_br) <= q1; ++grow) lo_br -= 0.05;
        if (rho(hi_br) <= q1 || rho(lo_br) <= q1)
            throw BracketError("classify: could not bracket the density feature");

        if (rho0 > thr_cusp || q1 / 8.0 <= 1.2 * rho0) {
            // non-zero local minimum
            const double m_loc = tau0;
            auto law = [&](double g4, double x) {
                return rho0 * (1.0 + psi_min(3.0 * std::sqrt(3.0) * g4 * x /
                                             (2.0 * std::pow(kPi * rho0, 3.0))));
            };
            const double r3 = rho0 * rho0 * rho0;
            auto xs = log_spaced(0.1 * r3, 10.0 * r3, 16);
            std::vector<double> pts, vals;
            for (double x : xs) { pts.push_back(x); pts.push_back(-x); }
            for (double x : pts) vals.push_back(rho(m_loc + x));
            auto misfit = [&](double lg) {
                const double g4 = std::exp(lg);
                double rss = 0, rr = 0;
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    const double r = vals[i] - law(g4, pts[i]);
                    rss += r * r;
                    rr += vals[i] * vals[i];
                }
                return rss / std::max(rr, 1e-300);
            };
            const double lg = golden_min(misfit, std::log(1e-4), std::log(1e4), 1e-6);
            const double gamma = std::pow(std::exp(lg), 0.25);

            auto slope_xs = log_spaced(std::min(20.0 * r3, 1e-3), 1e-2, 12);
            std::vector<double> slope_vals;
            for (double x : slope_xs) slope_vals.push_back(std::max(rho(m_loc + x) - rho0, 1e-300));
            const auto pl = fit_power_law(slope_xs, slope_vals);

            rep.kind = SingKind::Minimum;
            rep.location = m_loc;
            rep.rho_min = rho0;
            rep.gamma = gamma;
            rep.base_point = m_loc;
            rep.t_rho = -kPi * kPi * rho0 * rho0 / std::pow(gamma, 4.0);
            rep.fit_residual = std::sqrt(misfit(lg));
            rep.exponent = pl.exponent;
        } else {
            // distinguish an exact cusp from a resolvable gap by how the
            // level-set width shrinks as the level is lowered
            const double q2 = q1 / 8.0;
            auto width_at = [&](double q) {
                const double right = bisect([&](double x) { return rho(x) - q; },
                                            tau0, hi_br, 1e-10);
                const double left = bisect([&](double x) { return rho(x) - q; },
                                           lo_br, tau0, 1e-10);
                return std::pair<double, double>(left, right);
            };
            const auto [l1, r1] = width_at(q1);
            const auto [l2, r2] = width_at(q2);
            const bool is_gap = (r2 - l2) > 0.25 * (r1 - l1) && (r2 - l2) > 1e-7;

            if (is_gap) {
                const double eps_ref = std::max(1e-9, q2 * 1e-3);
                const double e_minus = bisect([&](double x) { return rho(x) - eps_ref; },
                                              lo_br, tau0, 1e-9);
                const double e_plus = bisect([&](double x) { return rho(x) - eps_ref; },
                                             tau0, hi_br, 1e-9);
                const double delta = e_plus - e_minus;

                auto xs = log_spaced(0.1 * delta, 10.0 * delta, 14);
                std::vector<double> vals, basis;
                for (double x : xs) {
                    vals.push_back(rho(e_plus + x));
                    basis.push_back(psi_edge(x / delta));
                    vals.push_back(rho(e_minus - x));
                    basis.push_back(psi_edge(x / delta));
                }
                auto fit = fit_prefactor(vals, basis);
                const double gamma = 0.5 * std::pow(fit.prefactor * 2.0 * kPi /
                                                    (std::sqrt(3.0) * std::cbrt(delta)), 0.75);

                auto slope_xs = log_spaced(0.005 * delta, 0.05 * delta, 10);
                std::vector<double> slope_vals;
                for (double x : slope_xs) slope_vals.push_back(rho(e_plus + x));
                const auto pl = fit_power_law(slope_xs, slope_vals);

                rep.kind = SingKind::Edge;
                rep.location = (std::abs(near - e_minus) <= std::abs(near - e_plus)) ? e_minus
                                                                                     : e_plus;
                rep.gap = delta;
                rep.gamma = gamma;
                rep.base_point = 0.5 * (e_minus + e_plus);
                rep.t_rho = 3.0 * std::pow(delta, 2.0 / 3.0) /
                            std::pow(2.0 * gamma, 4.0 / 3.0);
                rep.fit_residual = fit.residual;
                rep.exponent = pl.exponent;
            } else {
                // exact cusp
                auto xs = log_spaced(1e-6, 1e-2, 20);
                std::vector<double> vals, basis;
                for (double x : xs) {
                    vals.push_back(rho(tau0 + x));
                    basis.push_back(std::cbrt(x));
                    vals.push_back(rho(tau0 - x));
                    basis.push_back(std::cbrt(x));
                }
                auto fit = fit_prefactor(vals, basis);
                const double gamma = std::pow(fit.prefactor * 2.0 * kPi / std::sqrt(3.0), 0.75);

                auto slope_xs = log_spaced(1e-6, 1e-3, 16);
                std::vector<double> slope_vals;
                for (double x : slope_xs) slope_vals.push_back(rho(tau0 + x));
                const auto pl = fit_power_law(slope_xs, slope_vals);

                rep.kind = SingKind::Cusp;
                rep.location = tau0;
                rep.rho_min = rho0;
                rep.gamma = gamma;
                rep.base_point = tau0;
                rep.t_rho = 0.0;
                rep.fit_residual = fit.residual;
                rep.exponent = pl.exponent;
            }
        }
    }

    if (!(rep.fit_residual <= opts.residual_bound))
        throw UnclassifiableError("classify: shape-law misfit above acceptance bound", rep);
    return rep;
}

}  // namespace cusp
