#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "corpus.hpp"
#include "qfint/interp.hpp"
#include "qfint/oracle.hpp"

using namespace qfint;
using qfint::testing::Rng;

namespace {

// Coefficients of exp(Σ f_j z^j) through degree `deg`, by repeated series multiplication.
std::vector<double> exp_series(const std::vector<double>& f, std::size_t deg) {
    std::vector<double> result(deg + 1, 0.0), term(deg + 1, 0.0), g(deg + 1, 0.0);
    for (std::size_t j = 1; j < f.size() && j <= deg; ++j) g[j] = f[j];
    result[0] = 1.0;
    term[0] = 1.0;
    for (std::size_t p = 1; p <= deg; ++p) {
        std::vector<double> next(deg + 1, 0.0);
        for (std::size_t a = 0; a <= deg; ++a)
            for (std::size_t b = 1; a + b <= deg; ++b) next[a + b] += term[a] * g[b];
        for (double& v : next) v /= static_cast<double>(p);
        term = next;
        for (std::size_t i = 0; i <= deg; ++i) result[i] += term[i];
    }
    return result;
}

}  // namespace

TEST(ChooseOrder, MinimalForTenFormsAtBetaThree) {
    // bound(6) = 10/(7·729·2) ≈ 9.80e-4 ≤ 1e-3 < bound(5) ≈ 3.43e-3
    const double eps = std::expm1(1e-3);
    const auto plan = choose_order(10, eps, 3.0);
    EXPECT_EQ(plan.k, 6u);
    EXPECT_NEAR(plan.bound, 0.0009798157946306093, 1e-18);
    EXPECT_GT(truncation_bound(10, 5, 3.0), std::log1p(eps));
}

TEST(ChooseOrder, ZeroOrderAndMonotone) {
    EXPECT_EQ(choose_order(1, std::expm1(0.5), 10.0).k, 0u);
    EXPECT_EQ(choose_order(0, 1e-9, 2.0).k, 0u);
    const double eps = std::expm1(1e-3);
    EXPECT_GT(choose_order(10, eps, 1.1).k, choose_order(10, eps, 3.0).k);
    EXPECT_EQ(choose_order(10, eps, 1.1).k, 76u);
    EXPECT_THROW(choose_order(3, 0.1, 1.0), std::invalid_argument);
}

TEST(ChooseOrder, PropertyMinimalAndMonotone) {
    Rng rng(71);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t m = rng.between(1, 200);
        const double eps = std::pow(10.0, -rng.uniform(0.5, 9.0));
        const double beta = rng.uniform(1.05, 20.0);
        const auto plan = choose_order(m, eps, beta);
        EXPECT_LE(plan.bound, std::log1p(eps));
        if (plan.k > 0) {
            EXPECT_GT(truncation_bound(m, plan.k - 1, beta), std::log1p(eps));
        }
        EXPECT_LE(choose_order(m, eps, beta * 1.5).k, plan.k);
        EXPECT_GE(choose_order(m, eps / 10.0, beta).k, plan.k);
        EXPECT_LE(truncation_bound(m, plan.k + 1, beta), plan.bound);
    }
}

TEST(LogTaylor, Examples) {
    const std::vector<double> c{1.0, 0.4, 0.08};
    const auto f = log_taylor(c, 2);
    EXPECT_EQ(f[0], 0.0);
    EXPECT_NEAR(f[1], 0.4, 1e-16);
    EXPECT_NEAR(f[2], 0.0, 1e-16);

    const auto g = log_taylor(std::vector<double>{1.0, -0.7}, 1);
    EXPECT_EQ(g[1], -0.7);

    const double a = 0.3, b = -0.45;
    const auto h = log_taylor(std::vector<double>{1.0, a + b, a * b}, 4);
    EXPECT_NEAR(h[1], a + b, 1e-16);
    EXPECT_NEAR(h[2], -(a * a + b * b) / 2.0, 1e-16);
    EXPECT_NEAR(h[3], (a * a * a + b * b * b) / 3.0, 1e-16);
    EXPECT_NEAR(h[4], -(std::pow(a, 4) + std::pow(b, 4)) / 4.0, 1e-16);

    EXPECT_THROW(log_taylor(std::vector<double>{2.0, 1.0}, 1), std::invalid_argument);
}

TEST(LogTaylor, ExpRoundTrip) {
    Rng rng(73);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t deg = rng.between(1, 8);
        std::vector<double> c(deg + 1);
        c[0] = 1.0;
        for (std::size_t i = 1; i <= deg; ++i) c[i] = rng.uniform(-1.0, 1.0);
        const auto f = log_taylor(c, 8);
        const auto back = exp_series(f, 8);
        for (std::size_t i = 0; i <= 8; ++i) EXPECT_NEAR(back[i], i <= deg ? c[i] : 0.0, 1e-10);
    }
}

TEST(Integrate, EmptyInstanceIsOne) {
    const auto est = integrate(build_instance(4, {}), ToleranceConfig{}, 1e-6);
    EXPECT_EQ(est.value, 1.0);
    EXPECT_EQ(est.log_value, 0.0);
    EXPECT_EQ(est.plan.k, 0u);
}

TEST(Integrate, TwoSmallIdentityForms) {
    ToleranceConfig cfg;
    cfg.mode = BoundMode::uniform;
    const auto inst = build_instance(2, {SymMatrix::identity(2, 0.02), SymMatrix::identity(2, 0.02)});
    const double exact = oracle::exact_value(inst, 1.0).real();
    EXPECT_NEAR(exact, 1.0408, 1e-15);
    const auto est = integrate(inst, cfg, 1e-6);
    EXPECT_LE(std::abs(est.value - exact) / exact, 1e-6);
    EXPECT_LE(std::abs(est.log_value - std::log(exact)), est.additive_log_error_bound);
    EXPECT_EQ(est.additive_log_error_bound, est.plan.bound);
    EXPECT_GT(est.value, 0.0);
}

TEST(Integrate, RejectsInadmissible) {
    ToleranceConfig cfg;
    cfg.mode = BoundMode::uniform;
    const auto inst = build_instance(2, {SymMatrix::identity(2, 0.2), SymMatrix::identity(2, 0.2)});
    try {
        integrate(inst, cfg, 1e-3);
        FAIL() << "expected AdmissibilityError";
    } catch (const AdmissibilityError& e) {
        EXPECT_FALSE(e.report().pass);
        EXPECT_NEAR(e.report().margins[0], -0.075, 1e-15);
    }
    EXPECT_THROW(integrate(inst, cfg, 0.0), std::invalid_argument);
}

TEST(Integrate, CertifiedIntervalContainsOracle) {
    Rng rng(79);
    for (int trial = 0; trial < 60; ++trial) {
        ToleranceConfig cfg;
        cfg.mode = trial % 2 ? BoundMode::uniform : BoundMode::local;
        const auto inst = qfint::testing::random_admissible(rng, cfg);
        const double exact = oracle::exact_value(inst, 1.0).real();
        for (double eps : {1e-1, 1e-2, 1e-4, 1e-8}) {
            const auto est = integrate(inst, cfg, eps);
            EXPECT_LE(std::abs(est.log_value - std::log(exact)), est.additive_log_error_bound + 1e-14);
            EXPECT_LE(std::abs(est.value - exact) / exact, eps);
        }
    }
}

TEST(Integrate, FullOrderIsExactWhenSeriesConverges) {
    // with k far beyond m the truncation bound is negligible
    Rng rng(83);
    ToleranceConfig cfg;
    for (int trial = 0; trial < 20; ++trial) {
        const auto inst = qfint::testing::random_admissible(rng, cfg);
        const auto est = integrate(inst, cfg, 1e-13);
        const double exact = oracle::exact_value(inst, 1.0).real();
        EXPECT_NEAR(est.value, exact, 1e-12 * exact);
    }
}
