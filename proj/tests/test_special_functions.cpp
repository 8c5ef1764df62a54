#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "fracpois/errors.hpp"
#include "fracpois/special_functions.hpp"
#include "oracle_values.hpp"

using namespace fracpois;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(GmlSeries, TrivialAndExponentialReductions) {
    EXPECT_EQ(gml_series({1, 1, 1}, 0.0), 1.0);
    EXPECT_NEAR(gml_series({1, 3, 3}, -1.0), std::exp(-1.0) / 2.0, 1e-15);
    EXPECT_NEAR(ml_series(1, 1, 1), std::numbers::e, 1e-15);
    EXPECT_NEAR(ml_series(1, 2, 0.5), (std::exp(0.5) - 1.0) / 0.5, 1e-15);
}

TEST(GmlSeries, MatchesHighPrecisionOracles) {
    EXPECT_LT(rel(gml_series({0.7, 1.4, 2.5}, -0.8), oracle::gml_07_14_25_m08), 1e-14);
    EXPECT_LT(rel(ml_series(0.5, 1, -1), oracle::ml_05_1_m1), 1e-14);
    EXPECT_LT(rel(ml_series(0.5, 0.5, -1), oracle::ml_05_05_m1), 1e-14);
    EXPECT_LT(rel(gml_series({0.7, 1.4, 2}, -3), oracle::gml_07_14_2_m3), 1e-13);
    EXPECT_LT(rel(gml_series({0.5, 2.5, 3}, -2), oracle::gml_05_25_3_m2), 1e-13);
}

TEST(GmlSeries, ReducesToTwoParameterFunction) {
    for (double a : {0.3, 0.6, 1.0})
        for (double b : {0.5, 1.0, 2.3})
            for (double x = -5.0; x <= 5.0; x += 0.5) {
                const double m = ml_series(a, b, x);
                EXPECT_NEAR(gml_series({a, b, 1.0}, x), m, 1e-13 * std::max(1.0, std::abs(m)));
            }
}

TEST(GmlSeries, ExponentialCollapseForUnitOrder) {
    for (int k = 0; k <= 10; ++k)
        for (double x = -5.0; x <= 0.0; x += 0.25)
            EXPECT_NEAR(gml_series({1, k + 1.0, k + 1.0}, x), std::exp(x) / std::tgamma(k + 1.0), 1e-12);
}

TEST(GmlSeries, RejectsBadParametersAndStopsAtTermCap) {
    EXPECT_THROW(gml_series({0.0, 1, 1}, 1.0), InvalidParam);
    EXPECT_THROW(gml_series({1.5, 1, 1}, 1.0), InvalidParam);
    EXPECT_THROW(gml_series({0.5, -1, 1}, 1.0), InvalidParam);
    EXPECT_THROW(gml_series({0.5, 1, 0}, 1.0), InvalidParam);
    SeriesPolicy p;
    p.max_terms = 3;
    EXPECT_THROW(gml_series({0.5, 1, 1}, -2.0, p), NonConvergence);
    p.max_terms = 0;
    EXPECT_THROW(gml_series({0.5, 1, 1}, -2.0, p), InvalidParam);
}

TEST(GmlSeries, LargePochhammerParameterStaysFinite) {
    // (gamma)_r and x^r overflow separately long before the product does
    const double v = gml_neg_scaled({0.5, 0.5 * 400 + 1.0, 401}, 300.0, 400).value;
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GT(v, 1e-4);
    EXPECT_LT(v, 1.0);
    // an alternating series whose sum is far below its terms cannot be represented
    EXPECT_THROW(gml_series_scaled({0.5, 201.5, 401}, -20.0, 400), NumericalInstability);
}

TEST(SeriesPolicy, MaxTermsFromEnvironment) {
    ::setenv("FRACPOIS_MAX_TERMS", "123", 1);
    EXPECT_EQ(SeriesPolicy::from_environment().max_terms, 123);
    ::setenv("FRACPOIS_MAX_TERMS", "abc", 1);
    EXPECT_THROW(SeriesPolicy::from_environment(), InvalidParam);
    ::unsetenv("FRACPOIS_MAX_TERMS");
    EXPECT_EQ(SeriesPolicy::from_environment().max_terms, SeriesPolicy{}.max_terms);
}

TEST(WrightSeries, KnownValues) {
    EXPECT_NEAR(wright_series(-0.5, 0.5, 0.0), 1.0 / std::sqrt(std::numbers::pi), 1e-16);
    EXPECT_LT(rel(wright_series(-0.5, 0.5, -1.0), oracle::wright_m05_05_m1), 1e-14);
    EXPECT_LT(rel(wright_series(-0.3, 0.7, -2.0), oracle::wright_m03_07_m2), 1e-14);
}

TEST(WrightSeries, FlagsCancellation) {
    try {
        wright_series(-0.3, 0.7, -10.0, {}, 1e3);
        FAIL() << "expected cancellation warning";
    } catch (const CancellationWarning& w) {
        EXPECT_GT(w.ratio(), 1e3);
    }
}

TEST(IntegralRoutes, TwoSidedCutRepresentation) {
    EXPECT_LT(rel(ml_neg_integral(0.5, 1.0), oracle::ml_05_1_m1), 1e-10);
    EXPECT_NEAR(ml_neg_integral(0.999, 1.0), std::exp(-1.0), 1e-2);
    EXPECT_NEAR(ml_neg_integral(0.7, 2.0), ml_series(0.7, 1, -std::pow(2.0, 0.7)), 1e-8);
    EXPECT_THROW(ml_neg_integral(1.0, 1.0), InvalidParam);
    EXPECT_THROW(ml_neg_integral(0.5, 0.0), InvalidParam);
}

TEST(IntegralRoutes, TwoParameterRepresentation) {
    EXPECT_NEAR(ml2_neg_integral(0.5, 0.5, 1.0), oracle::ml_05_05_m1, 1e-8);
    EXPECT_NEAR(ml2_neg_integral(0.6, 1.0, 1.5), ml_neg_integral(0.6, 1.5), 1e-8);
    EXPECT_NEAR(ml2_neg_integral(0.5, 0.9, 0.3), oracle::ml_05_09_at_t03, 1e-8);
    EXPECT_NEAR(ml_nu_nu_neg_integral(0.5, 1.0), oracle::ml_05_05_m1, 1e-8);
    EXPECT_THROW(ml2_neg_integral(0.5, 1.5, 1.0), InvalidParam);
    EXPECT_THROW(ml2_neg_integral(0.5, 0.0, 1.0), InvalidParam);
}

TEST(IntegralRoutes, AgreeWithSeriesOnGrid) {
    for (double nu : {0.3, 0.5, 0.7, 0.9})
        for (double t : {0.1, 1.0, 5.0}) {
            const double x = std::pow(t, nu);
            EXPECT_NEAR(ml_neg_integral(nu, t), ml(nu, 1, -x), 1e-8) << nu << " " << t;
            for (double beta : {nu, 0.5 * (nu + 1.0), 1.0, nu + 0.9})
                EXPECT_NEAR(ml2_neg_integral(nu, beta, t), ml(nu, beta, -x), 1e-8) << nu << " " << beta << " " << t;
            EXPECT_NEAR(ml_nu_nu_neg_integral(nu, t), ml(nu, nu, -x), 1e-8);
        }
}

TEST(IntegralRoutes, CauchyMeanForm) {
    for (double nu : {0.4, 0.6})
        for (double t : {0.2, 1.0, 4.0}) EXPECT_NEAR(ml_neg_cauchy_mean(nu, t), ml_neg_integral(nu, t), 1e-8);
    EXPECT_LT(rel(ml_neg_cauchy_mean(0.6, 1.5), oracle::ml_06_1_at_t15), 1e-10);
}

TEST(IntegralRoutes, LargeTimeApproximation) {
    EXPECT_NEAR(ml_large_t_approx(0.5, 1.0, 100.0), std::tgamma(0.5) / (10.0 * std::numbers::pi), 1e-15);
    EXPECT_NEAR(ml_large_t_approx(0.5, 0.5, 100.0), std::tgamma(1.5) / (100.0 * std::numbers::pi), 1e-15);
    const double ratio = ml(0.5, 1, -10.0) / ml_large_t_approx(0.5, 1.0, 100.0);
    EXPECT_GE(ratio, 0.9);
    EXPECT_LE(ratio, 1.1);
}

TEST(IntegralRoutes, WrightRepresentation) {
    EXPECT_NEAR(wright_neg_integral(0.5, 0.5, 1.0), oracle::wright_05_05_m1, 1e-6);
    EXPECT_NEAR(wright_neg_integral(0.3, 0.7, 2.0), oracle::wright_03_07_m2pow03, 1e-6);
    EXPECT_NEAR(wright_neg_integral(0.4, 0.5, 1.0), oracle::wright_04_05_m1, 1e-6);
    EXPECT_NEAR(wright_neg_integral(0.5, 0.5, 50.0), wright_series(0.5, 0.5, -std::sqrt(50.0)), 1e-6);
    EXPECT_THROW(wright_neg_integral(0.5, 1.0, 1.0), InvalidParam);
}

TEST(Dispatch, LargeNegativeArguments) {
    EXPECT_LT(rel(ml(0.5, 1, -10.0), oracle::ml_05_1_m10), 1e-13);
    EXPECT_LT(rel(ml(0.9, 1, -50.0), oracle::ml_09_1_m50), 1e-12);
    EXPECT_LT(rel(gml({0.3, 2.2, 5}, -5.0), oracle::gml_03_22_5_m5), 1e-12);
    for (const auto& r : oracle::ml_large_argument) EXPECT_LT(rel(ml(r.nu, 1, -r.x), r.value), 1e-12);
    const Evaluation e = gml_eval({0.9, 1, 1}, -50.0);
    EXPECT_EQ(e.route, Route::integral);
}

TEST(Dispatch, CountLawGrid) {
    for (const auto& r : oracle::count_law_grid) {
        const Evaluation e = gml_neg_scaled({r.nu, r.nu * r.k + 1.0, r.k + 1.0}, r.x, r.k);
        EXPECT_NEAR(e.value, r.value, 2e-11) << r.nu << " " << r.x << " " << r.k;
    }
}

TEST(Dispatch, ForcedRoutesAgree) {
    const MLSpec s{0.7, 1.4, 2.0};
    const double a = gml_neg_scaled(s, 3.0, 0.0, {}, RouteChoice::series).value;
    const double b = gml_neg_scaled(s, 3.0, 0.0, {}, RouteChoice::integral).value;
    EXPECT_NEAR(a, oracle::gml_07_14_2_m3, 1e-14);
    EXPECT_NEAR(b, oracle::gml_07_14_2_m3, 1e-13);
}

TEST(Dispatch, RecurrenceInThirdParameter) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double nu = 0.1 + 0.9 * unit(rng);
        const int n = static_cast<int>(unit(rng) * 6);
        const double m = 2 + static_cast<int>(unit(rng) * 8);
        const double z = 0.2 + 2.0 * unit(rng);
        const double x = 10.0 * unit(rng);
        const double lhs = gml_neg_scaled({nu, n * nu + z, m}, x, n).value +
                           gml_neg_scaled({nu, (n + 1) * nu + z, m}, x, n + 1).value;
        const double rhs = gml_neg_scaled({nu, n * nu + z, m - 1}, x, n).value;
        EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(rhs)));
    }
}

TEST(MWright, GaussianCaseAndOracles) {
    for (double z : {0.0, 0.5, 2.0, 7.0})
        EXPECT_NEAR(m_wright(0.5, z), std::exp(-z * z / 4.0) / std::sqrt(std::numbers::pi), 1e-16);
    for (const auto& r : oracle::m_wright) EXPECT_LT(rel(m_wright(r.nu, r.z), r.value), 1e-13) << r.nu << " " << r.z;
    EXPECT_LT(rel(m_wright(0.3, 10.0), oracle::wright_m03_07_m10), 1e-12);
    EXPECT_LT(rel(wright_hankel_integral(0.7, 0.3, 3.0), oracle::wright_m07_03_m3), 1e-12);
}

TEST(MWright, UnitMass) {
    for (double nu : {0.2, 0.5, 0.8}) {
        const QuadResult q = integrate([nu](double z) { return m_wright(nu, z); }, 0.0, 60.0);
        EXPECT_NEAR(q.value, 1.0, 1e-10) << nu;
    }
}
