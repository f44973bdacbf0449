#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <vector>

#include "cusp/common.hpp"
#include "cusp/pearcey.hpp"

using namespace cusp;

namespace {

// Brute-force oracle: plain trapezoid sums at 10x the default node density
// on contours with an independently chosen offset delta' = 2 delta. Shares
// no code with the implementation.
cxd pearcey_brute(double x, double y, double alpha, double delta = 1.0, double radius = 8.0,
                  int nodes_per_unit = 480) {
    const int n = static_cast<int>(radius * nodes_per_unit);
    const double h = radius / n;
    const cxd ur = std::polar(1.0, kPi / 4.0);
    const cxd lr = std::polar(1.0, -kPi / 4.0);

    std::vector<std::pair<cxd, cxd>> zs;  // (position, dz weight)
    for (int i = 0; i < n; ++i) {
        const double t = (i + 0.5) * h;
        zs.push_back({delta + t * ur, -h * ur});   // from +inf e^{i pi/4} down to delta
        zs.push_back({delta + t * lr, h * lr});    // out to +inf e^{-i pi/4}
        zs.push_back({-delta - t * ur, h * ur});   // from -inf e^{i pi/4} up to -delta
        zs.push_back({-delta - t * lr, -h * lr});  // out to -inf e^{-i pi/4}
    }
    std::vector<std::pair<cxd, cxd>> ws;
    for (int i = -n; i < n; ++i) {
        const double v = (i + 0.5) * h;
        ws.push_back({cxd(0.0, v), cxd(0.0, h)});
    }

    cxd total = 0.0;
    for (const auto& [z, dz] : zs) {
        const cxd zf = std::exp(0.25 * z * z * z * z - 0.5 * alpha * z * z + x * z) * dz;
        cxd acc = 0.0;
        for (const auto& [w, dw] : ws) {
            acc += std::exp(-0.25 * w * w * w * w + 0.5 * alpha * w * w - y * w) * dw /
                   (w - z);
        }
        total += zf * acc;
    }
    return total * (-1.0 / (4.0 * kPi * kPi));
}

}  // namespace

TEST_CASE("kernel values are real") {
    for (double alpha : {-2.0, 0.0, 2.0})
        for (double x = -3.0; x <= 3.0; x += 1.5)
            for (double y = -3.0; y <= 3.0; y += 1.5) {
                const auto k = pearcey_kernel(x, y, alpha);
                CHECK(k.imag_defect <= 1e-8);
            }
}

TEST_CASE("agreement with the brute-force oracle at the origin") {
    const auto k = pearcey_kernel(0.0, 0.0, 0.0);
    const cxd oracle = pearcey_brute(0.0, 0.0, 0.0);
    CHECK(std::abs(k.value - oracle.real()) < 1e-6);
    CHECK(k.abs_error_estimate < 1e-8);
}

TEST_CASE("agreement with the oracle across arguments") {
    // the corner at the V-vertex limits the oracle's trapezoid to O(h^2);
    // 1500 nodes/unit brings it under the comparison tolerance
    struct Probe { double x, a; };
    for (const auto& p : {Probe{1.0, 0.0}, Probe{-2.0, 1.0}, Probe{0.5, -1.0}}) {
        const auto k = pearcey_kernel(p.x, -0.7, p.a);
        const cxd oracle = pearcey_brute(p.x, -0.7, p.a, 1.0, 6.0, 1500);
        CHECK(std::abs(k.value - oracle.real()) < 1e-6);
    }
}

TEST_CASE("measured kernel asymmetry is recorded, not bounded") {
    // symmetry in (x, y) is not part of the contract; log the measured size
    double worst = 0.0;
    for (double x : {-1.5, 0.5, 2.0})
        for (double y : {-0.5, 1.0}) {
            const double a = pearcey_kernel(x, y, 1.0).value;
            const double b = pearcey_kernel(y, x, 1.0).value;
            worst = std::max(worst, std::abs(a - b));
        }
    MESSAGE("max |K(x,y) - K(y,x)| over probes: ", worst);
    CHECK(std::isfinite(worst));
}

TEST_CASE("invariance under admissible contour deformations") {
    ContourSpec a;  // delta = 0.5, R = 8
    ContourSpec b;
    b.deformation_offset = 1.0;
    b.truncation_radius = 12.0;
    const double va = pearcey_kernel(1.0, -1.0, 0.0, a).value;
    const double vb = pearcey_kernel(1.0, -1.0, 0.0, b).value;
    CHECK(std::abs(va - vb) <= 1e-8);
}

TEST_CASE("parallel and serial kernel evaluations are identical") {
    for (double x : {-1.2, 0.3, 2.1}) {
        const auto p = pearcey_kernel(x, 0.4, 1.0);
        const auto s = pearcey_kernel_serial(x, 0.4, 1.0);
        CHECK(p.value == s.value);
        CHECK(p.abs_error_estimate == s.abs_error_estimate);
    }
}

TEST_CASE("one-point correlation is the nonnegative diagonal") {
    for (double x = -2.0; x <= 2.0; x += 0.8) {
        const double rho1 = pearcey_correlation({x}, 0.0);
        CHECK(rho1 == pearcey_kernel(x, x, 0.0).value);
        CHECK(rho1 >= 0.0);
    }
}

TEST_CASE("two-point correlation vanishes at coinciding points") {
    const double x = 0.4;
    const double det = pearcey_correlation({x, x + 1e-3}, 0.0);
    const double diag = pearcey_kernel(x, x, 0.0).value;
    CHECK(std::abs(det) <= 1e-4 * diag * diag);
}

TEST_CASE("two-point correlation matches the oracle") {
    const double det = pearcey_correlation({-1.0, 1.0}, 0.0);
    const double k11 = pearcey_brute(-1.0, -1.0, 0.0).real();
    const double k12 = pearcey_brute(-1.0, 1.0, 0.0).real();
    const double k21 = pearcey_brute(1.0, -1.0, 0.0).real();
    const double k22 = pearcey_brute(1.0, 1.0, 0.0).real();
    CHECK(std::abs(det - (k11 * k22 - k12 * k21)) < 1e-6);
}

TEST_CASE("single Gaussian eigenvalue reduces to the Gaussian density") {
    FiniteKernelInput input;
    input.eigenvalues = {0.0};
    input.ct = 1.0;
    input.xi = 3.0;
    input.base_point = 0.0;
    const FiniteKernelEvaluator kernel(input);

    double worst = 0.0;
    double trace = 0.0;
    const double h = 0.02;
    for (double u = -6.0; u <= 6.0; u += h) {
        const auto k = kernel.evaluate(u, u);
        const double expected = std::exp(-0.5 * u * u) / std::sqrt(2.0 * kPi);
        worst = std::max(worst, std::abs(k.value - expected));
        trace += k.value * h;
    }
    CHECK(worst <= 1e-4);
    CHECK(trace == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("finite-N kernel properties on a deformed random spectrum") {
    // deterministic spectrum with a central gap: +-1 diagonal plus a small
    // random Hermitian perturbation
    const int n = 64;
    Rng rng(314159);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) h(i, i) = (i < n / 2) ? -1.3 : 1.3;
    for (int i = 0; i < n; ++i) {
        h(i, i) += rng.normal() / std::sqrt(static_cast<double>(n));
        for (int j = i + 1; j < n; ++j) {
            const cxd w = cxd(rng.normal(), rng.normal()) / std::sqrt(2.0 * n);
            h(i, j) += w;
            h(j, i) += std::conj(w);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    FiniteKernelInput input;
    input.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
    input.ct = 0.2;
    input.xi = 0.0;
    input.base_point = 0.0;
    const FiniteKernelEvaluator kernel(input);

    SUBCASE("trace normalisation") {
        const double lo = input.eigenvalues.front() - 2.0;
        const double hi = input.eigenvalues.back() + 2.0;
        const double h_int = (hi - lo) / 1200;
        double trace = 0.0;
        for (double u = lo; u <= hi; u += h_int)
            trace += finite_kernel_diagonal(input, u).value * h_int;
        CHECK(trace / n == doctest::Approx(1.0).epsilon(1e-3));
    }

    SUBCASE("quadrature refinement shrinks the error estimate") {
        ContourSpec fine;
        fine.panels_per_unit = 8;
        const FiniteKernelEvaluator kernel_fine(input, fine);
        const auto coarse = kernel.evaluate(0.9, 1.1);
        const auto refined = kernel_fine.evaluate(0.9, 1.1);
        CHECK(refined.abs_error_estimate <= 0.5 * coarse.abs_error_estimate + 1e-12);
    }

    SUBCASE("conjugation freedom leaves determinants unchanged") {
        // points in the microscopic window around xi where both kernel
        // normalisations stay representable
        const std::vector<double> pts{-0.15, 0.05, 0.18};
        const std::size_t k = pts.size();
        Eigen::MatrixXd a(k, k), b(k, k);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                a(i, j) = kernel.evaluate(pts[i], pts[j]).value / n;
                b(i, j) = kernel.evaluate_unconjugated(pts[i], pts[j]).value / n;
            }
        const double da = a.determinant();
        const double db = b.determinant();
        CHECK(da == doctest::Approx(db).epsilon(1e-6));
    }

    SUBCASE("xi inside the spectrum is rejected") {
        FiniteKernelInput bad = input;
        bad.xi = input.eigenvalues[n / 4];
        CHECK_THROWS_AS(FiniteKernelEvaluator{bad}, DomainError);
    }
}

TEST_CASE("rescaled kernel diagonal is nonnegative") {
    FiniteKernelInput input;
    input.eigenvalues = {0.0};
    input.ct = 1.0;
    input.xi = 3.0;
    input.base_point = 0.0;
    input.gamma = 1.0;
    const FiniteKernelEvaluator kernel(input);
    for (double x = -2.0; x <= 2.0; x += 0.5)
        CHECK(kernel.rescaled(x, x) >= -1e-6);
}
