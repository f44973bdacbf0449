#include "cusp/pearcey.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "cusp/numerics.hpp"
#include "cusp/parallel.hpp"

namespace cusp {

namespace {

struct QNode {
    cxd pos;
    cxd weight;
};

// 12-node Gauss-Legendre nodes along the straight segment [a, b], with the
// traversal direction folded into the weights.
void add_segment(std::vector<QNode>& out, cxd a, cxd b, int panels) {
    const cxd d = (b - a) / static_cast<double>(panels);
    for (int p = 0; p < panels; ++p) {
        const cxd mid = a + (static_cast<double>(p) + 0.5) * d;
        for (std::size_t k = 0; k < kGl12Nodes.size(); ++k)
            out.push_back({mid + 0.5 * kGl12Nodes[k] * d, 0.5 * kGl12Weights[k] * d});
    }
}

// z-contour of the Pearcey integral: V-branches through +-delta opening at
// 45 degrees, traversed from the upper-right through +delta to the
// lower-right and from the lower-left through -delta to the upper-left.
std::vector<QNode> xi_contour(const ContourSpec& c, int density_divisor) {
    const double r = c.truncation_radius;
    const double d = c.deformation_offset;
    const int panels =
        std::max(1, static_cast<int>(std::ceil(r)) * c.panels_per_unit / density_divisor);
    const cxd ur = std::polar(1.0, kPi / 4.0);
    const cxd lr = std::polar(1.0, -kPi / 4.0);
    std::vector<QNode> out;
    add_segment(out, d + r * ur, cxd(d, 0.0), panels);
    add_segment(out, cxd(d, 0.0), d + r * lr, panels);
    add_segment(out, -d - r * ur, cxd(-d, 0.0), panels);
    add_segment(out, cxd(-d, 0.0), -d - r * lr, panels);
    return out;
}

// w-contour: the imaginary axis, upward.
std::vector<QNode> phi_contour(const ContourSpec& c, int density_divisor) {
    const double r = c.truncation_radius;
    const int panels =
        std::max(1, 2 * static_cast<int>(std::ceil(r)) * c.panels_per_unit / density_divisor);
    std::vector<QNode> out;
    add_segment(out, cxd(0.0, -r), cxd(0.0, r), panels);
    return out;
}

template <typename ForEach>
cxd pearcey_sum(double x, double y, double alpha, const ContourSpec& c, int divisor,
                ForEach&& for_each) {
    const auto zs = xi_contour(c, divisor);
    const auto ws = phi_contour(c, divisor);

    std::vector<cxd> zf(zs.size()), wf(ws.size());
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const cxd z = zs[i].pos;
        zf[i] = zs[i].weight * std::exp(0.25 * z * z * z * z - 0.5 * alpha * z * z + x * z);
    }
    for (std::size_t j = 0; j < ws.size(); ++j) {
        const cxd w = ws[j].pos;
        wf[j] = ws[j].weight * std::exp(-0.25 * w * w * w * w + 0.5 * alpha * w * w - y * w);
    }

    // per-z row sums, reduced in index order: bit-identical for any thread count
    std::vector<cxd> rows(zs.size());
    for_each(static_cast<long>(zs.size()), [&](long i) {
        const cxd z = zs[static_cast<std::size_t>(i)].pos;
        cxd acc = 0.0;
        for (std::size_t j = 0; j < ws.size(); ++j) acc += wf[j] / (ws[j].pos - z);
        rows[static_cast<std::size_t>(i)] = acc * zf[static_cast<std::size_t>(i)];
    });
    cxd total = 0.0;
    for (const cxd& r : rows) total += r;
    return total * (-1.0 / (4.0 * kPi * kPi));  // 1/(2 pi i)^2
}

template <typename ForEach>
KernelEvaluation pearcey_impl(double x, double y, double alpha, const ContourSpec& c,
                              ForEach&& for_each) {
    if (std::abs(x) > 0.5 * c.truncation_radius || std::abs(y) > 0.5 * c.truncation_radius)
        throw DomainError("pearcey_kernel: |x|,|y| must be at most R/2");
    const cxd full = pearcey_sum(x, y, alpha, c, 1, for_each);
    const cxd half = pearcey_sum(x, y, alpha, c, 2, for_each);
    const cxd quarter = pearcey_sum(x, y, alpha, c, 4, for_each);

    KernelEvaluation out;
    out.value = full.real();
    out.abs_error_estimate = std::abs(full - half);
    out.imag_defect = std::abs(full.imag());
    out.config = c;
    const double prev = std::abs(half - quarter);
    if (out.abs_error_estimate > 1e-12 && prev > 1e-12 && out.abs_error_estimate > 0.5 * prev)
        throw AccuracyError("pearcey_kernel: quadrature refinement is not converging");
    return out;
}

}  // namespace

KernelEvaluation pearcey_kernel(double x, double y, double alpha, const ContourSpec& contour) {
    return pearcey_impl(x, y, alpha, contour,
                        [](long n, auto&& body) { parallel_for(n, body); });
}

KernelEvaluation pearcey_kernel_serial(double x, double y, double alpha,
                                       const ContourSpec& contour) {
    return pearcey_impl(x, y, alpha, contour,
                        [](long n, auto&& body) { serial_for(n, body); });
}

double pearcey_correlation(const std::vector<double>& points, double alpha,
                           const ContourSpec& contour) {
    const std::size_t k = points.size();
    if (k == 0 || k > 8) throw DomainError("pearcey_correlation: need 1..8 points");
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (points[i] == points[j])
                throw DomainError("pearcey_correlation: points must be distinct");
    Eigen::MatrixXd m(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            m(i, j) = pearcey_kernel(points[i], points[j], alpha, contour).value;
    return m.determinant();
}

// ---------------------------------------------------------------------------
// finite-N kernel

namespace {

struct Panel {
    double a, b;
};

// Panels marching from `from` (fine end) toward `to` with geometric growth;
// cap_at(x) bounds the width where the integrand still oscillates.
template <typename CapFn>
std::vector<Panel> march(double from, double to, double w0, CapFn&& cap_at) {
    std::vector<Panel> out;
    const double dir = (to >= from) ? 1.0 : -1.0;
    const double span = std::abs(to - from);
    double pos = from;
    double w = w0;
    for (int guard = 0; guard < 100000 && dir * (to - pos) > 1e-14 * (span + 1.0); ++guard) {
        double width = std::min({w, dir * (to - pos), std::max(cap_at(pos), w0)});
        out.push_back({pos, pos + dir * width});
        pos += dir * width;
        w = width * 1.6;
    }
    return out;
}

}  // namespace

FiniteKernelEvaluator::FiniteKernelEvaluator(FiniteKernelInput input, ContourSpec contour)
    : input_(std::move(input)), contour_(contour) {
    const auto& ev = input_.eigenvalues;
    if (ev.empty()) throw DomainError("finite_kernel: empty spectrum");
    if (!(input_.ct > 0.0)) throw DomainError("finite_kernel: ct must be positive");
    if (!std::is_sorted(ev.begin(), ev.end()))
        throw DomainError("finite_kernel: eigenvalues must be sorted");
    if (input_.n <= 0) input_.n = static_cast<long>(ev.size());
    const double n = static_cast<double>(input_.n);
    const double xi = input_.xi;
    const double ct = input_.ct;

    const long split = std::lower_bound(ev.begin(), ev.end(), xi) - ev.begin();
    const long count = static_cast<long>(ev.size());

    const double clear_left = (split > 0) ? xi - ev[split - 1] : 1e300;
    const double clear_right = (split < count) ? ev[split] - xi : 1e300;
    const double clearance = std::min(clear_left, clear_right);
    {
        // rejection uses raw spacing scales; the quadrature scales below are
        // clearance-aware and would vanish together with it
        auto raw = [&](long lo, long hi) {
            return (hi > lo) ? (ev[hi] - ev[lo]) / static_cast<double>(hi - lo)
                             : std::sqrt(ct);
        };
        double d_check = std::sqrt(ct);
        if (split > 0) d_check = std::min(d_check, raw(std::max<long>(0, split - 7), split - 1));
        if (split < count)
            d_check = std::min(d_check, raw(split, std::min(count - 1, split + 6)));
        if (!(clearance > 0.0) || clearance < input_.margin_spacings * d_check)
            throw DomainError("finite_kernel: xi too close to an eigenvalue (contour conflict)");
    }

    // one-sided local spacings so a cluster-edge estimate never averages
    // across the spectral gap; sparse clusters fall back to the clearance
    // scale rather than anything macroscopic (oversized contours cost
    // precision exponentially)
    const double d_fallback = std::min(std::sqrt(ct), 2.0 * std::min(clearance, 1.0));
    auto spacing_below = [&](long idx) {  // spacing just below ev[idx]
        const long lo = std::max<long>(0, idx - 6);
        if (idx <= lo) return d_fallback;
        return (ev[idx] - ev[lo]) / static_cast<double>(idx - lo);
    };
    auto spacing_above = [&](long idx) {
        const long hi = std::min<long>(count - 1, idx + 6);
        if (hi <= idx) return d_fallback;
        return (ev[hi] - ev[idx]) / static_cast<double>(hi - idx);
    };
    auto cluster_spacing = [&](bool right_side) {
        // inner spacing of one cluster, falling back to the other side
        const double own = right_side ? spacing_above(split) : spacing_below(split - 1);
        if (own < d_fallback) return own;
        const double other =
            right_side ? (split > 0 ? spacing_below(split - 1) : own)
                       : (split < count ? spacing_above(split) : own);
        return std::min(own, other);
    };

    double d_near = d_fallback;
    if (split > 0) d_near = std::min(d_near, cluster_spacing(false));
    if (split < count) d_near = std::min(d_near, cluster_spacing(true));

    // the exponential weight confines the contours to this window around xi
    const double live_r = 1.5 * std::sqrt(2.0 * ct * 60.0 / n) + 4.0 * d_near;
    const double fine =
        std::max(std::min(d_near / 4.0, clearance / 4.0), clearance / 64.0);

    // Oversized margins cost precision: the integrand on the contour exceeds
    // the kernel value by ~exp(n * margin * window / ct), which must stay
    // well inside double range. `window` bounds |u - z| seen in evaluations.
    const double scale_x = input_.gamma * std::pow(n, 0.75);
    const double span = 0.5 * (ev.back() - ev.front()) +
                        std::abs(input_.base_point) + std::abs(xi);
    const double window = std::abs(xi - input_.base_point) + 8.0 / scale_x;
    auto clamp_margin = [&](double want, double floor_d) {
        const double cap = 20.0 * ct / (n * (window + span) + 1e-300);
        return std::min(want, std::max(floor_d, cap));
    };
    const double h_cap = std::sqrt(40.0 * ct / n);

    auto phase_cap_live = [&](double x_at) {
        // resolve ~1 period of the product's phase (pi per eigenvalue) per panel
        if (count < 16) return 0.8 * d_near;
        long j = std::lower_bound(ev.begin(), ev.end(), x_at) - ev.begin();
        j = std::min(std::max<long>(j, 4), count - 5);
        return 0.8 * (ev[j + 4] - ev[j - 4]) / 8.0;
    };
    auto cap_at = [&](double x_at) {
        if (std::abs(x_at - xi) > live_r) return 1e300;  // dead zone: free growth
        return phase_cap_live(x_at);
    };

    auto build_z = [&](std::vector<Node>& nodes, int divisor) {
        // divisor and panels_per_unit jointly set the node density
        const double scale = divisor * 4.0 / std::max(1, contour_.panels_per_unit);
        std::vector<QNode> seg;
        auto scaled_cap = [&, scale](double x_at) { return cap_at(x_at) * scale; };
        auto horizontal = [&](double y, double from_x, double to_x, double fine_end) {
            const double other = (fine_end == from_x) ? to_x : from_x;
            for (const Panel& p : march(fine_end, other, fine * scale, scaled_cap)) {
                const double lo = std::min(p.a, p.b), hi = std::max(p.a, p.b);
                if (to_x >= from_x)
                    add_segment(seg, cxd(lo, y), cxd(hi, y), 1);
                else
                    add_segment(seg, cxd(hi, y), cxd(lo, y), 1);
            }
        };
        auto vertical = [&](double x, double h, bool up, bool graded) {
            if (graded) {
                const double cap_v = std::max(phase_cap_live(x), fine) * scale;
                for (const Panel& p : march(0.0, h, fine * scale,
                                            [&](double) { return cap_v; })) {
                    if (up) {
                        add_segment(seg, cxd(x, p.a), cxd(x, p.b), 1);
                        add_segment(seg, cxd(x, -p.b), cxd(x, -p.a), 1);
                    } else {
                        add_segment(seg, cxd(x, p.b), cxd(x, p.a), 1);
                        add_segment(seg, cxd(x, -p.a), cxd(x, -p.b), 1);
                    }
                }
            } else {
                if (up)
                    add_segment(seg, cxd(x, -h), cxd(x, h), 2);
                else
                    add_segment(seg, cxd(x, h), cxd(x, -h), 2);
            }
        };
        // counterclockwise rectangle around a cluster [lo_x, hi_x] x [-h, h];
        // inner = side facing xi
        auto rect = [&](double lo_x, double hi_x, double h, bool inner_is_right) {
            const double inner = inner_is_right ? hi_x : lo_x;
            horizontal(-h, lo_x, hi_x, inner);
            vertical(hi_x, h, true, inner_is_right);
            horizontal(h, hi_x, lo_x, inner);
            vertical(lo_x, h, false, !inner_is_right);
        };
        if (split > 0) {
            const double d_out = std::min(spacing_above(0), d_fallback * 3.0);
            const double d_in = cluster_spacing(false);
            const double lo_x = ev.front() - clamp_margin(3.0 * d_out, d_out);
            const double hi_x = ev[split - 1] + std::min(0.5 * clear_left,
                                                         clamp_margin(3.0 * d_in, d_in));
            rect(lo_x, hi_x, std::min(3.0 * d_in, std::max(d_in, h_cap)), true);
        }
        if (split < count) {
            const double d_out = std::min(spacing_below(count - 1), d_fallback * 3.0);
            const double d_in = cluster_spacing(true);
            const double lo_x = ev[split] - std::min(0.5 * clear_right,
                                                     clamp_margin(3.0 * d_in, d_in));
            const double hi_x = ev.back() + clamp_margin(3.0 * d_out, d_out);
            rect(lo_x, hi_x, std::min(3.0 * d_in, std::max(d_in, h_cap)), false);
        }
        nodes.reserve(seg.size());
        for (const QNode& q : seg) nodes.push_back({q.pos, q.weight, 0.0});
    };

    // v-independent real part of the w-exponent, used to truncate the line
    auto q_base_re = [&](double y) {
        double acc = 0.5 * n * (xi * xi - y * y) / ct;
        for (double lam : ev) acc += 0.5 * std::log((xi - lam) * (xi - lam) + y * y);
        return acc;
    };
    auto build_w = [&](std::vector<Node>& nodes, int divisor) {
        const double scale = divisor * 4.0 / std::max(1, contour_.panels_per_unit);
        cxd m_probe = 0.0;
        for (double lam : ev) m_probe += 1.0 / (cxd(xi, clearance) - lam);
        const double rate = std::abs(m_probe.real()) + n * window / ct + 1.0;
        const double cap = std::max(2.0 * kPi / rate, fine * 0.25) * scale;
        std::vector<QNode> seg;
        double y0 = 0.0, w = fine * scale;
        double max_re = q_base_re(1e-3 * fine);
        for (int guard = 0; guard < 100000; ++guard) {
            const double width = std::min(w, cap);
            const double y1 = y0 + width;
            add_segment(seg, cxd(xi, y0), cxd(xi, y1), 1);
            add_segment(seg, cxd(xi, -y1), cxd(xi, -y0), 1);
            const double re_end = q_base_re(y1);
            max_re = std::max(max_re, re_end);
            if (re_end < max_re - 60.0 || y1 > 10.0) break;
            y0 = y1;
            w = width * 1.5;
        }
        nodes.reserve(seg.size());
        for (const QNode& q : seg) nodes.push_back({q.pos, q.weight, 0.0});
    };

    build_z(z_nodes_, 1);
    build_z(z_nodes_half_, 2);
    build_w(w_nodes_, 1);
    build_w(w_nodes_half_, 2);

    auto fill_logprod = [&](std::vector<Node>& nodes) {
        parallel_for(static_cast<long>(nodes.size()), [&](long i) {
            cxd acc = 0.0;
            for (double lam : ev) acc += std::log(nodes[static_cast<std::size_t>(i)].pos - lam);
            nodes[static_cast<std::size_t>(i)].logprod = acc;
        });
    };
    fill_logprod(z_nodes_);
    fill_logprod(z_nodes_half_);
    fill_logprod(w_nodes_);
    fill_logprod(w_nodes_half_);
}

double FiniteKernelEvaluator::eval_on(const std::vector<Node>& zs, const std::vector<Node>& ws,
                                      double u, double v, bool conjugated,
                                      double* imag_defect, double* roundoff) const {
    const double n = static_cast<double>(input_.n);
    const double ct = input_.ct;
    const double xi = input_.xi;

    std::vector<cxd> za(zs.size()), wb(ws.size());
    double max_p = -1e300, max_q = -1e300;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const cxd z = zs[i].pos;
        const cxd lin = conjugated ? 2.0 * u * (z - xi) : (2.0 * z * u - u * u);
        za[i] = n * (-z * z + lin) / (2.0 * ct) - zs[i].logprod;
        max_p = std::max(max_p, za[i].real());
    }
    for (std::size_t j = 0; j < ws.size(); ++j) {
        const cxd w = ws[j].pos;
        const cxd lin = conjugated ? -2.0 * v * (w - xi) : (-2.0 * v * w + v * v);
        wb[j] = n * (w * w + lin) / (2.0 * ct) + ws[j].logprod;
        max_q = std::max(max_q, wb[j].real());
    }
    for (std::size_t i = 0; i < zs.size(); ++i)
        za[i] = zs[i].weight * std::exp(za[i] - max_p);
    for (std::size_t j = 0; j < ws.size(); ++j)
        wb[j] = ws[j].weight * std::exp(wb[j] - max_q);

    std::vector<cxd> rows(zs.size());
    std::vector<double> rows_abs(zs.size());
    parallel_for(static_cast<long>(zs.size()), [&](long i) {
        const cxd z = zs[static_cast<std::size_t>(i)].pos;
        cxd acc = 0.0;
        double acc_abs = 0.0;
        for (std::size_t j = 0; j < ws.size(); ++j) {
            const cxd term = wb[j] / (ws[j].pos - z);
            acc += term;
            acc_abs += std::abs(term);
        }
        rows[static_cast<std::size_t>(i)] = acc * za[static_cast<std::size_t>(i)];
        rows_abs[static_cast<std::size_t>(i)] =
            acc_abs * std::abs(za[static_cast<std::size_t>(i)]);
    });
    cxd total = 0.0;
    double total_abs = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        total += rows[i];
        total_abs += rows_abs[i];
    }
    if (max_p + max_q > 600.0)
        throw AccuracyError(
            "finite_kernel: exponent overflow; evaluation point too far from xi");
    const double prefactor = n / (4.0 * kPi * kPi * ct) * std::exp(max_p + max_q);
    total *= -prefactor;
    if (imag_defect) *imag_defect = std::abs(total.imag());
    if (roundoff) *roundoff = 2e-16 * total_abs * prefactor;  // cancellation floor
    return total.real();
}

KernelEvaluation FiniteKernelEvaluator::evaluate(double u, double v) const {
    KernelEvaluation out;
    out.config = contour_;
    double roundoff = 0.0;
    out.value = eval_on(z_nodes_, w_nodes_, u, v, true, &out.imag_defect, &roundoff);
    out.abs_error_estimate =
        std::abs(out.value - eval_on(z_nodes_half_, w_nodes_half_, u, v, true, nullptr)) +
        roundoff;
    return out;
}

KernelEvaluation FiniteKernelEvaluator::evaluate_unconjugated(double u, double v) const {
    KernelEvaluation out;
    out.config = contour_;
    double roundoff = 0.0;
    out.value = eval_on(z_nodes_, w_nodes_, u, v, false, &out.imag_defect, &roundoff);
    out.abs_error_estimate =
        std::abs(out.value - eval_on(z_nodes_half_, w_nodes_half_, u, v, false, nullptr)) +
        roundoff;
    return out;
}

double FiniteKernelEvaluator::rescaled(double x, double y) const {
    const double scale = input_.gamma * std::pow(static_cast<double>(input_.n), 0.75);
    return evaluate(input_.base_point + x / scale, input_.base_point + y / scale).value / scale;
}

KernelEvaluation finite_kernel(const FiniteKernelInput& input, double u, double v,
                               const ContourSpec& contour) {
    return FiniteKernelEvaluator(input, contour).evaluate(u, v);
}

double rescale_kernel(const FiniteKernelInput& input, double x, double y,
                      const ContourSpec& contour) {
    return FiniteKernelEvaluator(input, contour).rescaled(x, y);
}

KernelEvaluation finite_kernel_diagonal(const FiniteKernelInput& input, double u,
                                        const ContourSpec& contour) {
    const auto& ev = input.eigenvalues;
    if (ev.empty()) throw DomainError("finite_kernel_diagonal: empty spectrum");

    // split point: the midpoint of the eigenvalue gap nearest to u (or u
    // itself outside the spectrum), so the contours separate cleanly
    FiniteKernelInput local = input;
    local.base_point = u;
    const long count = static_cast<long>(ev.size());
    const long at = std::lower_bound(ev.begin(), ev.end(), u) - ev.begin();
    double split_pt;
    if (at == 0) {
        split_pt = std::min(u, ev.front() - 1e-3 * (1.0 + std::abs(ev.front())));
    } else if (at == count) {
        split_pt = std::max(u, ev.back() + 1e-3 * (1.0 + std::abs(ev.back())));
    } else {
        // widest gap whose midpoint stays close to u; the conjugation factor
        // grows like exp(n (u - xi)^2 / 2ct), so distant splits lose precision
        const double n_eff = static_cast<double>(input.n > 0 ? input.n : count);
        const double radius = 0.5 * std::sqrt(40.0 * input.ct / n_eff);
        split_pt = 0.5 * (ev[at - 1] + ev[at]);
        double best_gap = -1.0;
        for (long j = 1; j < count; ++j) {
            const double gap = ev[j] - ev[j - 1];
            const double mid = 0.5 * (ev[j - 1] + ev[j]);
            if (std::abs(mid - u) <= radius && gap > best_gap) {
                best_gap = gap;
                split_pt = mid;
            }
        }
    }
    local.xi = split_pt;
    local.margin_spacings = std::min(input.margin_spacings, 0.05);
    return FiniteKernelEvaluator(local, contour).evaluate(u, u);
}

}  // namespace cusp
