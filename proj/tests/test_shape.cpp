#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cusp/numerics.hpp"
#include "cusp/shape.hpp"
#include "cusp/tuning.hpp"

using namespace cusp;

namespace {

// quadrature of f over [0, inf) with substitutions absorbing the sqrt
// behaviour at 0 and the x^{-5/3}..x^{-11/3} tails (x = 1/t^3 makes the
// slowest tail integrand linear in t)
template <typename F>
double integrate_halfline(F&& f) {
    auto head = integrate_gl([&](double u) { return f(u * u) * 2.0 * u; }, 0.0, 1.0, 2000);
    auto mid = integrate_gl(f, 1.0, 100.0, 4000);
    auto tail = integrate_gl(
        [&](double t) { return f(1.0 / (t * t * t)) * 3.0 / (t * t * t * t); }, 1e-6,
        std::pow(100.0, -1.0 / 3.0), 4000);
    return head + mid + tail;
}

const TwoBlockTuning& cusp_tuning() {
    static TwoBlockTuning t = tune_two_block_cusp(64);
    return t;
}

}  // namespace

TEST_CASE("edge shape function values") {
    CHECK(psi_edge(0.0) == 0.0);
    // frozen from a 80-bit quadrature-free evaluation of the closed form
    CHECK(psi_edge(1.0) == doctest::Approx(0.310991).epsilon(1e-5));
    const double lam = 1e6;
    CHECK(std::abs(psi_edge(lam) / std::cbrt(lam) - std::pow(2.0, -4.0 / 3.0)) < 1e-3);
    CHECK_THROWS_AS(psi_edge(-0.1), DomainError);
}

TEST_CASE("edge shape integral identities") {
    const double pre = 3.0 * std::sqrt(3.0) / (2.0 * kPi);
    const double i1 =
        integrate_halfline([](double x) { return psi_edge(x) / ((x + 0.5) * (x + 0.5)); });
    const double i2 =
        integrate_halfline([](double x) { return psi_edge(x) / std::pow(x + 0.5, 4.0); });
    const double i3 =
        integrate_halfline([](double x) { return psi_edge(x) / (x * (1.0 + x)); });
    CHECK(std::abs(pre * i1 - 0.5) < 1e-6);
    CHECK(std::abs(pre * i2 - 8.0 / 27.0) < 1e-6);
    // equals pi/(2 sqrt(3)); pinned by the gap-closure rate of the flow
    CHECK(std::abs(i3 - kPi / (2.0 * std::sqrt(3.0))) < 1e-6);
}

TEST_CASE("minimum shape function") {
    CHECK(psi_min(0.0) == 0.0);
    for (double lam : {0.3, 1.7, 12.0, 400.0}) {
        CHECK(psi_min(-lam) == doctest::Approx(psi_min(lam)).epsilon(1e-14));
    }
    for (double lam = 1e-3; lam <= 1e3; lam *= 3.7) {
        const double ref = std::min(lam * lam, std::cbrt(lam));
        const double ratio = psi_min(lam) / ref;
        CHECK(ratio > 1.0 / 30.0);
        CHECK(ratio < 30.0);
    }
}

TEST_CASE("support of the semicircle") {
    const auto model = flat_model(32);
    const auto profile = density_grid(model, -3.0, 3.0, 0.01, 1e-6);
    auto rho = [&](double tau) { return rho_at(model, tau, 1e-6); };
    const auto support = find_support(profile, 1e-4, rho);
    REQUIRE(support.intervals.size() == 1);
    CHECK(support.intervals[0].lo == doctest::Approx(-2.0).epsilon(1e-3));
    CHECK(support.intervals[0].hi == doctest::Approx(2.0).epsilon(1e-3));
    CHECK(support.gaps.empty());
}

TEST_CASE("support of a gapped two-block model vs dense scan") {
    const auto model = two_block_model(32, 32, 1, 1, 1, -1.06, 1.06);
    const auto profile = density_grid(model, -3.5, 3.5, 0.01, 1e-6);
    auto rho = [&](double tau) { return rho_at(model, tau, 1e-6); };
    const auto support = find_support(profile, 1e-4, rho);
    REQUIRE(support.intervals.size() == 2);
    REQUIRE(support.gaps.size() == 1);
    CHECK(support.gaps[0].length() > 0.0);

    // independent dense scan at a fixed small eta
    const double thr = 1e-4;
    double scan_lo = 0, scan_hi = 0;
    bool inside = false;
    double prev = -0.8;
    for (double tau = -0.8; tau <= 0.8; tau += 1e-4) {
        const double r = solve_point(model, {tau, 1e-7}).rho();
        if (!inside && r <= thr) { scan_lo = tau; inside = true; }
        if (inside && r > thr) { scan_hi = prev; break; }
        prev = tau;
    }
    CHECK(support.gaps[0].lo == doctest::Approx(scan_lo).epsilon(0.02));
    CHECK(support.gaps[0].hi == doctest::Approx(scan_hi).epsilon(0.02));
}

TEST_CASE("support of the tuned cusp model is a single interval") {
    const auto& tuned = cusp_tuning();
    const auto profile = density_grid(tuned.model, -3.5, 3.5, 0.01, 1e-6);
    auto rho = [&](double tau) { return rho_at(tuned.model, tau, 1e-6); };
    const auto support = find_support(profile, 1e-4, rho);
    CHECK(support.intervals.size() == 1);
    CHECK(rho_at(tuned.model, 0.0, 1e-9) < 10.0 * 1e-4);
}

TEST_CASE("critical shift of the symmetric two-block family is 1") {
    // bisection on the extrapolated minimum resolves the critical shift to
    // a few parts in 1e5 at the eta floor used
    CHECK(cusp_tuning().delta == doctest::Approx(1.0).epsilon(5e-5));
}

TEST_CASE("classify: semicircle edge") {
    const auto model = flat_model(32);
    const auto profile = density_grid(model, -3.0, 3.0, 0.01, 1e-6);
    auto rho = [&](double tau) { return rho_at(model, tau, 1e-6); };
    const auto support = find_support(profile, 1e-4, rho);
    const auto rep = classify(model, profile, support, 2.0);
    CHECK(rep.kind == SingKind::Edge);
    CHECK(rep.exponent == doctest::Approx(0.5).epsilon(0.04));
    CHECK(rep.gamma > 0.0);
}

TEST_CASE("classify: tuned cusp") {
    const auto& tuned = cusp_tuning();
    const auto profile = density_grid(tuned.model, -3.5, 3.5, 0.01, 1e-6);
    auto rho = [&](double tau) { return rho_at(tuned.model, tau, 1e-6); };
    const auto support = find_support(profile, 1e-4, rho);
    const auto rep = classify(tuned.model, profile, support, 0.1);
    CHECK(rep.kind == SingKind::Cusp);
    CHECK(std::abs(rep.exponent - 1.0 / 3.0) < 0.02);
    CHECK(rep.t_rho == 0.0);
    // the symmetric critical two-block has shape slope exactly 1
    CHECK(rep.gamma == doctest::Approx(1.0).epsilon(0.02));
    CHECK(rep.base_point == doctest::Approx(0.0).epsilon(1e-4));
}

TEST_CASE("classify: slightly sub-critical gap fits the edge law") {
    const auto tuned = tune_two_block_gap(64, 5e-3);
    const auto profile = density_grid(tuned.model, -3.5, 3.5, 0.01, 1e-6);
    auto rho = [&](double tau) { return rho_at(tuned.model, tau, 1e-6); };
    const auto support = find_support(profile, 1e-4, rho);
    const auto rep = classify(tuned.model, profile, support, 0.0);
    CHECK(rep.kind == SingKind::Edge);
    CHECK(rep.gap == doctest::Approx(5e-3).epsilon(0.05));
    CHECK(rep.fit_residual <= 0.05);

    SUBCASE("gamma agrees between the edge law and the cusp asymptote") {
        // cusp-law fit in the matching regime gap << x << 1
        std::vector<double> xs, vals;
        for (double x = 20.0 * rep.gap; x < 0.25; x *= 1.4) {
            xs.push_back(x);
            vals.push_back(rho(rep.base_point + x));
        }
        double num = 0, den = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            num += vals[i] * std::cbrt(xs[i]);
            den += std::cbrt(xs[i]) * std::cbrt(xs[i]);
        }
        const double gamma_cusp = std::pow(num / den * 2.0 * kPi / std::sqrt(3.0), 0.75);
        CHECK(gamma_cusp == doctest::Approx(rep.gamma).epsilon(0.10));
    }
}

TEST_CASE("classify: post-critical minimum") {
    const auto tuned = tune_two_block_minimum(64, 0.05);
    const auto profile = density_grid(tuned.model, -3.5, 3.5, 0.01, 1e-6);
    auto rho = [&](double tau) { return rho_at(tuned.model, tau, 1e-6); };
    const auto support = find_support(profile, 1e-4, rho);
    const auto rep = classify(tuned.model, profile, support, 0.0);
    CHECK(rep.kind == SingKind::Minimum);
    CHECK(rep.rho_min == doctest::Approx(0.05).epsilon(0.02));
    CHECK(rep.gamma > 0.0);
    CHECK(rep.t_rho < 0.0);
}

TEST_CASE("sigma diagnostics on the flat model") {
    const auto model = flat_model(32);
    const auto sol = solve_point(model, {0.0, 1e-6});
    const auto d = compute_sigma(sol);
    CHECK(d.sigma == 0.0);
    for (int i = 0; i < model.n; ++i) {
        CHECK(d.p(i) == 0);
        CHECK(d.f(i) == doctest::Approx(kPi).epsilon(1e-4));
    }
}

namespace {

// asymmetric cusp: in the mirror-symmetric family sigma vanishes at 0 for
// every shift, so sigma checks need a lopsided model
const TwoBlockTuning& asym_cusp_tuning() {
    static TwoBlockTuning t = [] {
        TwoBlockRay ray;
        ray.n1 = 20;
        ray.n2 = 44;
        ray.s11 = 1.0;
        ray.s12 = 0.9;
        ray.s22 = 1.2;
        ray.dir1 = -1.3;
        ray.dir2 = 0.8;
        ray.delta_lo = 0.5;
        ray.delta_hi = 2.5;
        ray.tau_lo = -1.4;
        ray.tau_hi = 1.0;
        return tune_two_block_cusp(ray);
    }();
    return t;
}

}  // namespace

TEST_CASE("sigma vanishes at the tuned cusp") {
    const auto& tuned = asym_cusp_tuning();
    const auto sol = solve_point(tuned.model, {tuned.location, 1e-5});
    const auto d = compute_sigma(sol);
    CHECK(std::abs(d.sigma) <= 1e-2);
}

TEST_CASE("sigma grows like a cube root away from the cusp") {
    const auto& tuned = asym_cusp_tuning();
    std::vector<double> xs, vals;
    double holder_const = 0.0;
    for (double x = 1e-4; x <= 0.05; x *= 1.9) {
        const auto sol = solve_point(tuned.model, {tuned.location + x, 1e-7});
        const double s = std::abs(compute_sigma(sol).sigma);
        xs.push_back(x);
        vals.push_back(s);
        holder_const = std::max(holder_const, s / std::cbrt(x));
    }
    const auto fit = fit_power_law(xs, vals);
    CHECK(fit.exponent == doctest::Approx(1.0 / 3.0).epsilon(0.35));
    // frozen calibration bound for this model family
    CHECK(holder_const <= 300.0);
}

TEST_CASE("sigma rejects a degenerate density") {
    StieltjesSolution sol;
    sol.m = Eigen::VectorXcd::Constant(8, cxd(0.5, 1e-15));
    sol.z = {0.0, 1e-15};
    sol.residual = 0.0;
    CHECK_THROWS_AS(compute_sigma(sol), NumericError);
}

TEST_CASE("stability operator on the flat model") {
    const auto model = flat_model(48);
    SUBCASE("|m|^2 S variant in the bulk") {
        const auto sol = solve_point(model, {0.0, 1e-6});
        const auto rep = stability_spectrum(model, sol, StabilityVariant::AbsSqS);
        CHECK(std::abs(rep.beta) < 1e-5);
    }
    SUBCASE("m^2 S variant at the edge") {
        const auto sol = solve_point(model, {2.0, 1e-8});
        const auto rep = stability_spectrum(model, sol, StabilityVariant::SqS);
        CHECK(std::abs(rep.beta) < 1e-3);
    }
}

TEST_CASE("stability eigenpairs satisfy their defining relations") {
    // a profile without any block structure
    const int n = 24;
    ModelSpec model;
    model.n = n;
    model.a.resize(n);
    model.s.resize(n, n);
    model.t.resize(n, n);
    Rng rng(11);
    for (int i = 0; i < n; ++i) model.a(i) = 0.4 * (rng.uniform() - 0.5);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double v = (1.0 + 0.5 * rng.uniform()) / n;
            model.s(i, j) = v;
            model.s(j, i) = v;
            const cxd tv = (i == j) ? cxd(0.0) : 0.3 * v * std::exp(cxd(0.0, 2.0 * rng.uniform()));
            model.t(i, j) = tv;
            model.t(j, i) = tv;
        }
    model.refresh_witnesses();
    REQUIRE(validate(model).pass);

    const auto sol = solve_point(model, {0.3, 1e-3});
    for (int v = 0; v < 9; ++v) {
        const auto variant = static_cast<StabilityVariant>(v);
        const auto rep = stability_spectrum(model, sol, variant);
        // rebuild the operator and verify B b = beta b, B* l = conj(beta) l
        Eigen::VectorXcd mp;
        switch (v % 3) {
            case 0: mp = sol.m.cwiseAbs2().cast<cxd>(); break;
            case 1: mp = sol.m.array().square(); break;
            default: mp = sol.m.conjugate().array().square(); break;
        }
        Eigen::MatrixXcd r;
        if (v / 3 == 0) r = model.s.cast<cxd>();
        else if (v / 3 == 1) r = model.t;
        else r = model.t.transpose();
        const Eigen::MatrixXcd b =
            Eigen::MatrixXcd::Identity(n, n) - Eigen::MatrixXcd(mp.asDiagonal()) * r;
        const double norm_b = b.norm();
        CHECK((b * rep.right_vec - rep.beta * rep.right_vec).norm() <=
              1e-8 * norm_b * rep.right_vec.norm());
        CHECK((b.adjoint() * rep.left_vec - std::conj(rep.beta) * rep.left_vec).norm() <=
              1e-8 * norm_b * rep.left_vec.norm());
        const cxd ip = rep.left_vec.dot(rep.right_vec) / static_cast<double>(n);
        CHECK(std::abs(ip - 1.0) < 1e-8);
    }
}

TEST_CASE("stability comparison ratio is order one across the cusp scan") {
    const auto& tuned = cusp_tuning();
    // frozen regression band from the calibration run
    for (double eta = 1e-4; eta <= 1e-2; eta *= 4.0) {
        const auto sol = solve_point(tuned.model, {0.0, eta});
        const auto rep = stability_spectrum(tuned.model, sol, StabilityVariant::SqS);
        CHECK(rep.comparison_ratio > 1.0 / 10.0);
        CHECK(rep.comparison_ratio < 10.0);
    }
}

TEST_CASE("fluctuation scale") {
    SUBCASE("locally constant density") {
        DensityProfile p;
        for (double x = -1.0; x <= 1.0 + 1e-12; x += 0.01) {
            p.grid.push_back(x);
            p.rho.push_back(0.5);
        }
        p.eta_eval = 1e-6;
        SupportMap support;
        support.intervals.push_back({-1.0, 1.0});
        const long n = 1000;
        const auto fs = compute_eta_f(p, support, 0.0, n);
        CHECK(fs.eta_f == doctest::Approx(1.0 / (2.0 * n * 0.5)).epsilon(1e-6));
        CHECK(fs.regime == EtaFRegime::Bulk);
    }
    SUBCASE("gap cases") {
        DensityProfile p;
        p.grid = {-1.0, -0.5, 0.5, 1.0};
        p.rho = {0.3, 0.0, 0.0, 0.3};
        p.eta_eval = 1e-6;
        SupportMap support;
        support.intervals.push_back({-1.0, -0.5});
        support.intervals.push_back({0.5, 1.0});

        SupportMap wide = support;
        wide.gaps.push_back({-0.5, -0.5 + 1e-2});
        const auto a = compute_eta_f(p, wide, -0.4995, 1000000);
        CHECK(a.eta_f == doctest::Approx(5.9948e-5).epsilon(1e-3));
        CHECK(a.regime == EtaFRegime::EdgeInsideGap);

        SupportMap narrow = support;
        narrow.gaps.push_back({-0.5, -0.5 + 1e-5});
        const auto b = compute_eta_f(p, narrow, -0.5 + 5e-6, 10000);
        CHECK(b.eta_f == doctest::Approx(1e-3).epsilon(1e-9));
        CHECK(b.regime == EtaFRegime::EdgeSmallGap);
    }
    SUBCASE("near-cusp regime") {
        const auto& tuned = cusp_tuning();
        const auto profile = density_grid(tuned.model, -3.2, 3.2, 0.01, 1e-6);
        auto rho = [&](double tau) { return rho_at(tuned.model, tau, 1e-6); };
        const auto support = find_support(profile, 1e-4, rho);
        const auto fs = compute_eta_f(profile, support, 0.0, 100000);
        CHECK(fs.regime == EtaFRegime::CuspOrMinimum);
        CHECK(fs.eta_f > 0.0);
    }
    SUBCASE("tau outside the grid") {
        DensityProfile p;
        p.grid = {-1.0, 1.0};
        p.rho = {0.3, 0.3};
        SupportMap s;
        s.intervals.push_back({-1.0, 1.0});
        CHECK_THROWS_AS(compute_eta_f(p, s, 5.0, 100), DomainError);
    }
}
