#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cusp/model.hpp"
#include "cusp/common.hpp"

using namespace cusp;

TEST_CASE("flat model validates with unit witnesses") {
    const auto m = flat_model(32);
    const auto report = validate(m);
    CHECK(report.pass);
    CHECK(report.c == doctest::Approx(1.0));
    CHECK(report.C == doctest::Approx(1.0));
}

TEST_CASE("a vanishing variance entry fails flatness") {
    auto m = flat_model(16);
    m.s(3, 7) = 0.0;
    m.s(7, 3) = 0.0;
    m.refresh_witnesses();
    const auto report = validate(m);
    CHECK_FALSE(report.pass);
    bool flatness_failed = false;
    for (const auto& c : report.checks)
        if (c.name == "flatness (c/N)" && !c.pass) flatness_failed = true;
    CHECK(flatness_failed);
}

TEST_CASE("real-symmetric models need t == s off-diagonal") {
    auto m = flat_model(8, Symmetry::RealSymmetric);
    m.t(1, 2) = 0.5 / 8;
    m.t(2, 1) = 0.5 / 8;
    const auto report = validate(m);
    CHECK_FALSE(report.pass);
}

TEST_CASE("two-block with equal parameters degenerates to the flat model") {
    const auto tb = two_block_model(8, 8, 1, 1, 1, 0, 0);
    const auto fl = flat_model(16);
    CHECK((tb.s - fl.s).cwiseAbs().maxCoeff() == 0.0);
    CHECK((tb.a - fl.a).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-block admissible parameters always validate") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int n1 = 1 + static_cast<int>(rng.uniform() * 12);
        const int n2 = 1 + static_cast<int>(rng.uniform() * 12);
        const double s11 = 0.1 + rng.uniform();
        const double s12 = 0.1 + rng.uniform();
        const double s22 = 0.1 + rng.uniform();
        const double a1 = 2.0 * rng.uniform() - 1.0;
        const double a2 = 2.0 * rng.uniform() - 1.0;
        const auto m = two_block_model(n1, n2, s11, s12, s22, a1, a2);
        CHECK(validate(m).pass);
    }
}

TEST_CASE("nonpositive variances are rejected") {
    CHECK_THROWS_AS(two_block_model(4, 4, 1, -1, 1, 0, 0), DomainError);
    CHECK_THROWS_AS(two_block_model(4, 4, 0, 1, 1, 0, 0), DomainError);
}

TEST_CASE("gue augmentation raises every variance by ct/N") {
    const auto m = flat_model(10);
    const auto mg = m.with_gue(0.3);
    CHECK(mg.s(2, 5) == doctest::Approx(1.0 / 10 + 0.3 / 10));
    CHECK(validate(mg).pass);
}
