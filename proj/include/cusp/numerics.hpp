#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "cusp/common.hpp"

namespace cusp {

// 12-point Gauss-Legendre rule on [-1,1].
inline constexpr std::array<double, 12> kGl12Nodes = {
    -0.9815606342467192, -0.9041172563704749, -0.7699026741943047,
    -0.5873179542866175, -0.3678314989981802, -0.1252334085114689,
    0.1252334085114689,  0.3678314989981802,  0.5873179542866175,
    0.7699026741943047,  0.9041172563704749,  0.9815606342467192};

inline constexpr std::array<double, 12> kGl12Weights = {
    0.0471753363865118, 0.1069393259953184, 0.1600783285433462,
    0.2031674267230659, 0.2334925365383548, 0.2491470458134028,
    0.2491470458134028, 0.2334925365383548, 0.2031674267230659,
    0.1600783285433462, 0.1069393259953184, 0.0471753363865118};

// Composite Gauss-Legendre over [a,b] with n panels.
template <typename F>
double integrate_gl(F&& f, double a, double b, int panels) {
    double sum = 0.0;
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (std::size_t k = 0; k < kGl12Nodes.size(); ++k)
            sum += kGl12Weights[k] * f(mid + 0.5 * h * kGl12Nodes[k]);
    }
    return sum * 0.5 * h;
}

// Doubling refinement until successive composite rules agree.
template <typename F>
double integrate_adaptive(F&& f, double a, double b, double tol, int max_panels = 1 << 16) {
    int panels = 8;
    double prev = integrate_gl(f, a, b, panels);
    while (panels < max_panels) {
        panels *= 2;
        const double cur = integrate_gl(f, a, b, panels);
        if (std::abs(cur - prev) <= tol * (1.0 + std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

// Bisection for f(lo) and f(hi) of opposite sign, to absolute tolerance xtol.
template <typename F>
double bisect(F&& f, double lo, double hi, double xtol) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0))
        throw BracketError("bisect: no sign change in bracket");
    while (hi - lo > xtol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Golden-section minimisation of a unimodal function.
template <typename F>
double golden_min(F&& f, double lo, double hi, double xtol) {
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > xtol) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

struct PowerLawFit {
    double exponent;
    double prefactor;   // y ~ prefactor * x^exponent
    double residual;    // rms residual of log y
};

// Least-squares line through (log x, log y).
inline PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw DomainError("fit_power_law: need >= 2 samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw DomainError("fit_power_law: nonpositive sample");
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double denom = n * sxx - sx * sx;
    const double k = (n * sxy - sx * sy) / denom;
    const double b = (sy - k * sx) / n;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = std::log(y[i]) - (b + k * std::log(x[i]));
        rss += r * r;
    }
    return {k, std::exp(b), std::sqrt(rss / n)};
}

}  // namespace cusp
