#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cusp/ensemble.hpp"
#include "cusp/flow.hpp"
#include "cusp/tuning.hpp"

using namespace cusp;

// The rescaled finite-N kernel of sampled spectra, averaged over draws,
// approaches the limiting kernel on the microscopic window. Desk-scale
// toleranceswere fixed at calibration.
TEST_CASE("rescaled finite-N kernel approaches the limiting kernel") {
    const int n = 2000;
    const int trials = 20;
    const double ct = std::pow(static_cast<double>(n), -0.4);

    const TwoBlockTuning tuned = tune_two_block_cusp(n);
    const DensityProfile profile = density_grid(tuned.model, -3.2, 3.2, 0.01, 1e-6);
    auto rho = [&](double tau) { return rho_at(tuned.model, tau, 1e-6); };
    const SupportMap support = find_support(profile, 1e-4, rho);
    const SingularityReport report = classify(tuned.model, profile, support, tuned.location);
    REQUIRE(report.kind == SingKind::Cusp);
    const double gamma = report.gamma;
    const double b = report.base_point;

    // deterministic crossing point of the vertical contour: the image of the
    // physical cusp under the inverse flow
    DysonEvaluator base_t(tuned.model.with_gue(-ct));
    const double xi = xi_probe(base_t, ct, b);

    EnsembleConfig cfg;
    cfg.model = tuned.model.with_gue(-ct);
    cfg.trials = trials;
    cfg.base_seed = 4242;
    const auto samples = run_trials(cfg);

    const std::vector<double> pts{-2.0, -1.0, 0.0, 1.0, 2.0};
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(5, 5);
    int used = 0;
    for (const auto& sample : samples) {
        FiniteKernelInput input;
        input.eigenvalues.assign(sample.eigenvalues.data(), sample.eigenvalues.data() + n);
        input.ct = ct;
        input.xi = xi;
        input.base_point = b;
        input.gamma = gamma;
        input.n = n;
        input.margin_spacings = 0.5;
        try {
            const FiniteKernelEvaluator kernel(input);
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) mean(i, j) += kernel.rescaled(pts[i], pts[j]);
            ++used;
        } catch (const DomainError&) {
            // an eigenvalue drifted onto the contour crossing; skip the draw
        }
    }
    INFO("usable draws: ", used, " of ", trials);
    REQUIRE(used >= trials / 2);
    mean /= static_cast<double>(used);

    double sup = 0.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const double ref = pearcey_kernel(pts[i], pts[j], 0.0).value;
            sup = std::max(sup, std::abs(mean(i, j) - ref));
        }
    CHECK(sup <= 0.1);

    SUBCASE("tail of the rescaled empirical density") {
        const auto stats = cusp_statistics(samples, report, ct);
        CHECK(std::abs(stats.tail_exponent - 1.0 / 3.0) <= 0.1);
    }
}
