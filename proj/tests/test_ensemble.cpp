#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cusp/ensemble.hpp"
#include "cusp/flow.hpp"
#include "cusp/tuning.hpp"

using namespace cusp;

namespace {

const TwoBlockTuning& cusp_model() {
    static TwoBlockTuning t = tune_two_block_cusp(400);
    return t;
}

}  // namespace

TEST_CASE("entry moments match the profile") {
    EnsembleConfig cfg;
    cfg.model = two_block_model(2, 2, 1.0, 0.6, 1.4, -0.5, 0.5);
    cfg.base_seed = 2024;
    const int draws = 10000;
    const double s01 = cfg.model.s(0, 1);

    SUBCASE("gaussian law") {
        cfg.entry_law = EntryLaw::Gaussian;
        cxd mean = 0.0;
        double var = 0.0;
        for (int t = 0; t < draws; ++t) {
            const cxd w = sample_matrix(cfg, t)(0, 1);
            mean += w;
            var += std::norm(w);
        }
        mean /= static_cast<double>(draws);
        var /= static_cast<double>(draws);
        const double se_mean = std::sqrt(s01 / draws);
        CHECK(std::abs(mean) <= 4.0 * se_mean);
        CHECK(std::abs(var - s01) <= 4.0 * s01 / std::sqrt(static_cast<double>(draws)));
    }
    SUBCASE("rademacher-like law") {
        cfg.entry_law = EntryLaw::RademacherLike;
        cxd mean = 0.0;
        cxd second = 0.0;
        for (int t = 0; t < draws; ++t) {
            const cxd w = sample_matrix(cfg, t)(0, 1);
            mean += w;
            second += w * w;
            CHECK(std::abs(std::norm(w) - s01) < 1e-14);  // fixed modulus
        }
        mean /= static_cast<double>(draws);
        second /= static_cast<double>(draws);
        CHECK(std::abs(mean) <= 4.0 * std::sqrt(s01 / draws));
        CHECK(std::abs(second) <= 4.0 * s01 / std::sqrt(static_cast<double>(draws)));
    }
}

TEST_CASE("sampled matrices are exactly Hermitian and reproducible") {
    EnsembleConfig cfg;
    cfg.model = flat_model(32);
    cfg.base_seed = 99;
    const auto h1 = sample_matrix(cfg, 3);
    const auto h2 = sample_matrix(cfg, 3);
    CHECK((h1 - h1.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((h1 - h2).cwiseAbs().maxCoeff() == 0.0);
    const auto h3 = sample_matrix(cfg, 4);
    CHECK((h1 - h3).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("gaussian augmentation") {
    EnsembleConfig cfg;
    cfg.model = flat_model(16);
    const auto h = sample_matrix(cfg, 0);
    SUBCASE("zero time is the identity") {
        CHECK((add_gue(h, 0.0, 5) - h).cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("variance increases by ct/N") {
        const double ct = 0.4;
        const int draws = 10000;
        double var = 0.0;
        for (int t = 0; t < draws; ++t) {
            const cxd before = h(0, 1);
            const cxd after = add_gue(h, ct, trial_seed(7, t))(0, 1);
            var += std::norm(after - before);
        }
        var /= draws;
        const double expect = ct / 16.0;
        CHECK(std::abs(var - expect) <= 4.0 * expect / std::sqrt(static_cast<double>(draws)));
    }
    SUBCASE("real-symmetric inputs are rejected by the pipeline") {
        EnsembleConfig bad;
        bad.model = flat_model(8, Symmetry::RealSymmetric);
        bad.gue_time = 0.1;
        CHECK_THROWS_AS(run_trials(bad), DomainError);
    }
}

TEST_CASE("gaussian augmentation moves the self-consistent density along the flow") {
    const auto& tuned = cusp_model();
    const double ct = 0.05;
    const ModelSpec augmented = tuned.model.with_gue(ct);
    DysonEvaluator base(tuned.model);
    int probes = 0;
    for (double tau : {-1.5, -0.6, 0.0, 0.4, 1.1}) {
        for (double eta : {1e-3, 1e-2}) {
            const cxd direct = solve_point(augmented, {tau, eta}).avg();
            const cxd flowed = fc_solve(base, ct, {tau, eta});
            CHECK(std::abs(direct - flowed) < 1e-6);
            ++probes;
        }
    }
    CHECK(probes == 10);
}

TEST_CASE("trials are reproducible and thread-count independent") {
    EnsembleConfig cfg;
    cfg.model = flat_model(48);
    cfg.trials = 6;
    cfg.base_seed = 11;
    cfg.gue_time = 0.02;
    const auto par = run_trials(cfg);
    const auto ser = run_trials_serial(cfg);
    REQUIRE(par.size() == ser.size());
    for (std::size_t t = 0; t < par.size(); ++t)
        CHECK((par[t].eigenvalues - ser[t].eigenvalues).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("quantiles of the semicircle") {
    const auto model = flat_model(16);
    const auto profile = density_grid(model, -2.5, 2.5, 0.01, 1e-6);
    SUBCASE("median at zero for n = 2") {
        const auto g = quantiles(profile, 2);
        CHECK(g[0] == doctest::Approx(0.0).epsilon(1e-4));
    }
    SUBCASE("second quartile at zero for n = 4") {
        const auto g = quantiles(profile, 4);
        CHECK(g[1] == doctest::Approx(0.0).epsilon(1e-4));
    }
    SUBCASE("quantiles are monotone") {
        const auto g = quantiles(profile, 64);
        for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] >= g[i - 1]);
    }
}

TEST_CASE("the cusp quantile sits at the cusp") {
    const auto& tuned = cusp_model();
    const auto profile = density_grid(tuned.model, -3.2, 3.2, 0.01, 1e-6);
    const int n = 400;
    const long k_c = quantile_index(profile, tuned.location, n);
    const auto gamma = quantiles(profile, n);
    CHECK(std::abs(gamma[static_cast<std::size_t>(k_c - 1)] - tuned.location) < 2e-2);
}

TEST_CASE("rigidity on the flat model with shuffled control") {
    EnsembleConfig cfg;
    cfg.model = flat_model(256);
    cfg.trials = 20;
    cfg.base_seed = 5;
    const auto samples = run_trials(cfg);
    const auto profile = density_grid(cfg.model, -2.6, 2.6, 0.005, 1e-7);

    // regression band calibrated at this size; the acceptance suite pins the
    // production sizes
    const auto stats = verify_rigidity(samples, profile);
    const auto* bulk = stats.find("bulk rigidity");
    REQUIRE(bulk != nullptr);
    CHECK(bulk->pass_fraction >= 0.7);
    CHECK(bulk->mean_stat < 4.5);

    RigidityOptions shuffled;
    shuffled.shuffle_control = true;
    const auto control = verify_rigidity(samples, profile, nullptr, shuffled);
    CHECK(control.find("bulk rigidity")->pass_fraction <= 0.05);
}

TEST_CASE("local law on the flat model") {
    EnsembleConfig cfg;
    cfg.model = flat_model(256);
    cfg.trials = 8;
    cfg.base_seed = 21;
    cfg.keep_vectors = true;
    const auto samples = run_trials(cfg);
    const auto profile = density_grid(cfg.model, -2.6, 2.6, 0.005, 1e-7);
    auto rho = [&](double tau) { return rho_at(cfg.model, tau, 1e-7); };
    const auto support = find_support(profile, 1e-4, rho);

    const auto stats = verify_local_law(samples, cfg.model, profile, support);
    CHECK(stats.find("averaged local law")->pass_fraction >= 0.95);
    CHECK(stats.find("isotropic local law")->pass_fraction >= 0.95);
    CHECK(stats.find("ward identity")->max_stat <= 1e-9);
}

TEST_CASE("delocalization with a localized negative control") {
    EnsembleConfig cfg;
    cfg.model = flat_model(128);
    cfg.trials = 4;
    cfg.base_seed = 31;
    cfg.keep_vectors = true;
    const auto samples = run_trials(cfg);
    const auto stats = verify_delocalization(samples);
    CHECK(stats.find("delocalization pairs")->pass_fraction >= 0.95);
    CHECK(stats.find("delocalization max")->pass_fraction == 1.0);

    // deterministic localized spectrum: eigenvectors are coordinate vectors
    SpectrumSample diag;
    diag.eigenvalues = Eigen::VectorXd::LinSpaced(128, -1.0, 1.0);
    diag.eigenvectors = Eigen::MatrixXcd::Identity(128, 128);
    const auto control = verify_delocalization({diag});
    CHECK(control.find("delocalization max")->pass_fraction == 0.0);
    CHECK(control.find("delocalization max")->max_stat == 128.0);
}

TEST_CASE("cusp statistics on a small tuned ensemble") {
    const auto& tuned = cusp_model();
    const double n = 400;
    const double ct = std::pow(n, -0.4);

    // sample the pre-flow model and add the Gaussian component
    EnsembleConfig cfg;
    cfg.model = tuned.model.with_gue(-ct);
    REQUIRE(validate(cfg.model).pass);
    cfg.trials = 48;
    cfg.base_seed = 77;
    cfg.gue_time = ct;
    const auto samples = run_trials(cfg);

    const auto profile = density_grid(tuned.model, -3.2, 3.2, 0.01, 1e-6);
    auto rho = [&](double tau) { return rho_at(tuned.model, tau, 1e-6); };
    const auto support = find_support(profile, 1e-4, rho);
    const auto report = classify(tuned.model, profile, support, tuned.location);
    REQUIRE(report.kind == SingKind::Cusp);

    const auto stats = cusp_statistics(samples, report, ct);
    CHECK(stats.alpha == 0.0);
    // desk-size sanity: the rescaled histogram tracks the kernel diagonal
    CHECK(stats.l1_distance < 0.35);

    SUBCASE("disjoint halves agree within Monte-Carlo error") {
        std::vector<SpectrumSample> a(samples.begin(), samples.begin() + 24);
        std::vector<SpectrumSample> b(samples.begin() + 24, samples.end());
        const auto sa = cusp_statistics(a, report, ct);
        const auto sb = cusp_statistics(b, report, ct);
        // per-bin MC fluctuation of the window-averaged L1 statistic
        double se = 0.0;
        const double bw = sa.hist_centers[1] - sa.hist_centers[0];
        const double window = 0.5 * bw * sa.hist_density.size();
        for (std::size_t i = 0; i < sa.hist_density.size(); ++i)
            se += std::sqrt(std::max(sa.hist_density[i], 0.2) / (24.0 * bw)) * bw;
        se /= 2.0 * window;
        CHECK(std::abs(sa.l1_distance - sb.l1_distance) <= 3.0 * se);
    }

    SUBCASE("insufficient statistics are flagged") {
        SingularityReport far = report;
        far.base_point = 50.0;
        CHECK_THROWS_AS(cusp_statistics(samples, far, ct), InsufficientStatisticsError);
    }
}

TEST_CASE("alpha parameter of the limiting kernel") {
    SingularityReport rep;
    rep.kind = SingKind::Cusp;
    CHECK(pearcey_alpha(rep, 1000) == 0.0);
    rep.kind = SingKind::Edge;
    rep.gamma = 1.0;
    rep.gap = 4e-3;
    CHECK(pearcey_alpha(rep, 10000) ==
          doctest::Approx(3.0 * std::pow(1e-3, 2.0 / 3.0) * 100.0));
    rep.kind = SingKind::Minimum;
    rep.rho_min = 0.02;
    CHECK(pearcey_alpha(rep, 10000) ==
          doctest::Approx(-std::pow(kPi * 0.02, 2.0) * 100.0));
}
