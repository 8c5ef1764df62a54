#include <cmath>
#include <numbers>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fracpois/errors.hpp"
#include "fracpois/verify.hpp"

using namespace fracpois;

TEST(Grid, ValidationAndNodes) {
    EXPECT_THROW((GridSpec{0.0, 1.0, 5}.validate()), InvalidParam);
    EXPECT_THROW((GridSpec{1.0, 1.0, 5}.validate()), InvalidParam);
    EXPECT_THROW((GridSpec{0.1, 1.0, 1}.validate()), InvalidParam);
    const auto lin = GridSpec{0.5, 1.5, 3}.nodes();
    EXPECT_EQ(lin, (std::vector<double>{0.5, 1.0, 1.5}));
    const auto log = GridSpec{0.01, 100.0, 5, GridSpec::Spacing::logarithmic}.nodes();
    EXPECT_NEAR(log[2], 1.0, 1e-15);
    EXPECT_EQ(log.back(), 100.0);
}

TEST(Laplace, ForwardQuadrature) {
    EXPECT_NEAR(laplace_forward([](double) { return 1.0; }, 2.0), 0.5, 1e-12);
    EXPECT_NEAR(laplace_forward([](double t) { return std::exp(t); }, 3.0, {}, {1.0, 1.0}), 0.5, 1e-10);
    // t^{-1/2}: Gamma(1/2) / sqrt(s)
    EXPECT_NEAR(laplace_forward([](double t) { return 1.0 / std::sqrt(t); }, 4.0, {}, {0.5, 0.0}),
                std::sqrt(std::numbers::pi) / 2.0, 1e-10);
    EXPECT_NEAR(laplace_forward([](double t) { return interarrival_pdf({1, 0.5, 1}, t); }, 1.0, {}, {0.5, 0.0}), 0.5,
                1e-6);
    EXPECT_NEAR(laplace_forward([](double t) { return waiting_time_pdf({2, 0.5, 1}, 1, t); }, 1.0), 0.25, 1e-6);
    EXPECT_THROW(laplace_forward([](double) { return 1.0; }, 0.0), InvalidParam);
    EXPECT_THROW(laplace_forward([](double) { return 1.0; }, 1.0, {}, {1.0, 2.0}), InvalidParam);
}

TEST(Laplace, TransformPairExamples) {
    const double s_first[] = {4.0};
    bool seen = false;
    for (const CheckReport& r : verify_transform_pairs({1, 0.5, 1}, s_first)) {
        EXPECT_TRUE(r.pass) << r.name << " " << r.detail;
        if (r.name == "laplace-pmf" && r.detail.rfind("k=2", 0) == 0) {
            EXPECT_NEAR(r.rhs, std::pow(4.0, -0.5) / std::pow(3.0, 3), 1e-15);
            seen = true;
        }
    }
    EXPECT_TRUE(seen);

    const double s_one[] = {1.0};
    const auto poisson2 = verify_transform_pairs({2, 1.0, 1}, s_one);
    ASSERT_FALSE(poisson2.empty());
    EXPECT_EQ(poisson2.front().name, "laplace-pmf");
    EXPECT_NEAR(poisson2.front().rhs, 0.75, 1e-15);
    EXPECT_NEAR(poisson2.front().lhs, 0.75, 1e-6);

    const double s_two[] = {2.0};
    int renewal = 0;
    for (const CheckReport& r : verify_transform_pairs({2, 0.5, 1}, s_two))
        if (r.name == "laplace-renewal") {
            EXPECT_NEAR(r.rhs, std::pow(2.0, -1.5) / (std::sqrt(2.0) + 2.0), 1e-15);
            EXPECT_TRUE(r.pass);
            ++renewal;
        }
    EXPECT_EQ(renewal, 1);
    // every identity of the third-order model at a spread of s
    const double grid[] = {1.5, 3.0, 10.0};
    for (const CheckReport& r : verify_transform_pairs({3, 0.6, 1.3}, grid)) EXPECT_TRUE(r.pass) << r.detail;
}

TEST(Laplace, GmlPair) {
    EXPECT_TRUE(gml_laplace_pair({0.5, 1.0, 1.0}, -1.0, 2.0).pass);
    EXPECT_TRUE(gml_laplace_pair({0.7, 0.6, 2.5}, -0.4, 1.2).pass);
    const CheckReport grow = gml_laplace_pair({0.8, 1.2, 1.5}, 0.5, 2.0);
    EXPECT_TRUE(grow.pass) << grow.lhs << " " << grow.rhs;
    EXPECT_THROW(gml_laplace_pair({0.5, 1.0, 1.0}, 1.0, 0.9), InvalidParam);
}

TEST(Subordination, MatchesPmf) {
    EXPECT_NEAR(subordination_pmf(0, 0.5, 1, 1), pmf({1, 0.5, 1}, 0, 1), 1e-7);
    EXPECT_NEAR(subordination_pmf(3, 0.5, 1, 2), pmf({1, 0.5, 1}, 3, 2), 1e-7);
    // Gaussian kernel integral computed independently
    const double direct = integrate_checked(
        [](double y) { return std::exp(-y) * y * y / 2.0 * std::exp(-y * y / 4.0) / std::sqrt(std::numbers::pi); }, 0.0,
        60.0);
    EXPECT_NEAR(subordination_pmf(2, 0.5, 1, 1), direct, 1e-10);
    for (double nu : {0.3, 0.5, 0.7})
        for (double t : {0.5, 1.0, 2.0})
            for (int k = 0; k <= 5; ++k)
                EXPECT_NEAR(subordination_pmf(k, nu, 1.0, t), pmf({1, nu, 1.0}, k, t), 1e-7) << nu << " " << t << " " << k;
    double sum = 0.0;
    for (int k = 0; k <= normalization_cutoff({1, 0.7, 2.0}, 1.5); ++k) sum += subordination_pmf(k, 0.7, 2.0, 1.5);
    EXPECT_NEAR(sum, 1.0, 1e-7);
    EXPECT_THROW(subordination_pmf(0, 1.0, 1.0, 1.0), InvalidParam);
    EXPECT_THROW(subordination_pmf(0, 0.5, 1.0, 0.0), InvalidParam);
}

TEST(Subordination, GmlLaplaceIdentity) {
    EXPECT_TRUE(gml_laplace_identity(0, 0.5, 1.0).pass);
    const CheckReport r = gml_laplace_identity(2, 0.5, 1.0);
    EXPECT_TRUE(r.pass);
    EXPECT_LT(r.abs_err, 1e-7);
    EXPECT_TRUE(gml_laplace_identity(1, 0.3, 0.5, 1e-6).pass);
    // k = 0 at nu = 1/2 is E_{1/2}(-1) = e erfc(1)
    EXPECT_NEAR(gml_laplace_identity(0, 0.5, 1.0).rhs, std::exp(1.0) * std::erfc(1.0), 1e-14);
}

TEST(Caputo, PoissonEquationExact) {
    EXPECT_LT(caputo_residual_at({1, 1.0, 1.0}, 1, GridSpec{0.5, 2.0, 20001}), 1e-6);
    EXPECT_LT(caputo_residual_at({2, 1.0, 1.0}, 1, GridSpec{0.5, 2.0, 20001}), 1e-6);
}

TEST(Caputo, ResidualShrinksUnderRefinement) {
    const CheckReport a = caputo_residual({1, 0.5, 1.0}, 0);
    EXPECT_TRUE(a.pass) << a.detail;
    EXPECT_LE(a.lhs, 0.75);
    const CheckReport b = caputo_residual({2, 0.5, 1.0}, 1);
    EXPECT_TRUE(b.pass) << b.detail;
    const CheckReport c = caputo_residual({3, 0.75, 2.0}, 2);
    EXPECT_TRUE(c.pass) << c.detail;
}

TEST(Caputo, FinerGridSmallerResidual) {
    const double good = caputo_residual_at({1, 0.6, 1.0}, 1, GridSpec{0.5, 2.0, 257});
    const double coarse = caputo_residual_at({1, 0.6, 1.0}, 1, GridSpec{0.5, 2.0, 65});
    EXPECT_LT(good, coarse);
}

TEST(Caputo, Errors) {
    EXPECT_THROW(caputo_residual_at({1, 0.5, 1.0}, 0, GridSpec{0.1, 2.0, 9}), StepTooCoarse);
    EXPECT_THROW(caputo_residual_at({1, 0.5, 1.0}, 0, GridSpec{0.5, 2.0, 65, GridSpec::Spacing::logarithmic}),
                 InvalidParam);
    EXPECT_THROW(caputo_residual({1, 0.5, 1.0}, 0, {}, 0), InvalidParam);
}

TEST(Moments, FactorialMomentCheck) {
    for (int r = 1; r <= 3; ++r) {
        const CheckReport c = factorial_moment_check({1, 0.4, 1.5}, r, 2.0);
        EXPECT_TRUE(c.pass) << c.detail << " " << c.lhs << " " << c.rhs;
    }
}

TEST(Suite, GroupsAndAliases) {
    EXPECT_EQ(resolve_group("fk8"), "telescoping");
    EXPECT_EQ(resolve_group("gen-identity"), "gen-identity");
    EXPECT_EQ(resolve_group("caputo"), "caputo");
    EXPECT_THROW(resolve_group("nonsense"), InvalidParam);
    bool mc_default = true;
    for (const SuiteGroup& g : suite_groups())
        if (g.name == "monte-carlo") mc_default = g.in_default;
    EXPECT_FALSE(mc_default);
}

TEST(Suite, NamedSubsetsPass) {
    for (const char* name : {"gen-identity", "fk8"}) {
        const std::string only[] = {name};
        const auto reports = run_suite(only);
        ASSERT_FALSE(reports.empty());
        for (const CheckReport& r : reports) EXPECT_TRUE(r.pass) << r.name << " " << r.detail;
    }
}

TEST(Suite, ToleranceOverride) {
    const std::string only[] = {"reductions"};
    const auto strict = run_suite(only, {1e-300, 2});
    bool any_fail = false;
    for (const CheckReport& r : strict) {
        EXPECT_EQ(r.tol, 1e-300);
        any_fail |= !r.pass;
    }
    EXPECT_TRUE(any_fail);
    EXPECT_THROW(run_suite(only, {-1.0, 1}), InvalidParam);
}

TEST(Suite, JsonReport) {
    const std::string only[] = {"combinatorial"};
    const auto reports = run_suite(only);
    const auto j = nlohmann::json::parse(reports_to_json(reports));
    ASSERT_TRUE(j.is_array());
    ASSERT_EQ(j.size(), reports.size());
    for (const char* key : {"name", "lhs", "rhs", "abs_err", "rel_err", "tol", "pass", "detail"})
        EXPECT_TRUE(j[0].contains(key)) << key;
    EXPECT_EQ(j[0]["name"], "combinatorial/alternating-binomial");
    EXPECT_TRUE(j[0]["pass"].get<bool>());
    CheckReport inf = CheckReport::compare("x", 1.0, 0.0, 0.5);
    const auto k = nlohmann::json::parse(reports_to_json(std::span(&inf, 1)));
    EXPECT_TRUE(k[0]["rel_err"].is_null());
}
