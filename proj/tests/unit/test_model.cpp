#include "sharpe/error.hpp"
#include "sharpe/model.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace sharpe {
namespace {

using namespace sharpe::test;

// ============================================================================
// CoefficientFn
// ============================================================================

TEST(Coefficient, ConstantIgnoresState) {
    const auto f = CoefficientFn::constant(0.3);
    EXPECT_EQ(f(1.0), 0.3);
    EXPECT_EQ(f(1e6, 5.0), 0.3);
    EXPECT_TRUE(f.is_constant());
    EXPECT_EQ(f.constant_value(), 0.3);
}

TEST(Coefficient, TabulatedInterpolatesAndClamps) {
    const auto f = CoefficientFn::tabulated({1.0, 2.0, 4.0}, {0.1, 0.3, 0.2});
    EXPECT_DOUBLE_EQ(f(1.5), 0.2);
    EXPECT_DOUBLE_EQ(f(3.0), 0.25);
    EXPECT_EQ(f(0.1), 0.1);
    EXPECT_EQ(f(100.0), 0.2);
    EXPECT_FALSE(f.is_constant());
    EXPECT_THROW((void)f.constant_value(), UnsupportedError);
}

TEST(Coefficient, AffineInLog) {
    const auto f = CoefficientFn::affine_in_log(0.2, 0.05);
    EXPECT_DOUBLE_EQ(f(std::exp(2.0)), 0.3);
    EXPECT_THROW((void)f(0.0), DomainError);
}

TEST(Coefficient, RejectsBadTables) {
    EXPECT_THROW((void)CoefficientFn::tabulated({1.0, 1.0}, {0.1, 0.2}), ConfigError);
    EXPECT_THROW((void)CoefficientFn::tabulated({1.0, 2.0}, {0.1}), ConfigError);
    EXPECT_THROW((void)CoefficientFn::tabulated({}, {}), ConfigError);
    EXPECT_THROW((void)CoefficientFn::constant(NAN), ConfigError);
}

// ============================================================================
// mu_tilde
// ============================================================================

TEST(MuTilde, ReferenceParameters) {
    EXPECT_NEAR(mu_tilde(base_spec(), 100.0, 100.0), 0.07 - 0.027 * 0.9 * (2.0 / 3.0), 1e-15);
    EXPECT_NEAR(mu_tilde(base_spec(), 100.0, 100.0), 0.0538, 1e-12);
}

TEST(MuTilde, ZeroCorrelationOrFairTradedDrift) {
    EXPECT_EQ(mu_tilde(MarketSpec::constant(0.07, 0.2, 0.15, 0.3, 0.0, 0.05), 50.0, 80.0), 0.07);
    EXPECT_EQ(mu_tilde(MarketSpec::constant(0.07, 0.2, 0.05, 0.3, 0.7, 0.05), 50.0, 80.0), 0.07);
}

TEST(MuTilde, InvariantUnderTradedAssetRescaling) {
    const double base = mu_tilde(base_spec(), 100.0, 100.0);
    for (double lambda : {0.5, 2.0, 7.0}) {
        const auto s = MarketSpec::constant(kMu, kSigma, kR + lambda * (kA - kR), lambda * kB, kRho, kR);
        EXPECT_NEAR(mu_tilde(s, 100.0, 100.0), base, 1e-15);
    }
}

TEST(MuTilde, RejectsNonPositiveVolatility) {
    auto s = base_spec();
    s.sigma = CoefficientFn::tabulated({50.0, 150.0}, {0.0, 0.2});
    EXPECT_THROW((void)mu_tilde(s, 50.0, 100.0), DomainError);
    s = base_spec();
    s.b = CoefficientFn::constant(-0.1);
    EXPECT_THROW((void)mu_tilde(s, 100.0, 100.0), DomainError);
}

TEST(MarketSpec, ValidateRejectsBadScalars) {
    auto s = base_spec();
    s.rho = 1.2;
    EXPECT_THROW(s.validate(), ConfigError);
    s = base_spec();
    s.r = -0.01;
    EXPECT_THROW(s.validate(), ConfigError);
    EXPECT_NO_THROW(base_spec().validate());
}

TEST(MarketSpec, DependenceFlags) {
    auto s = base_spec();
    EXPECT_TRUE(s.is_constant());
    EXPECT_TRUE(s.h_independent());
    EXPECT_TRUE(s.s_independent());
    s.b = CoefficientFn::affine_in_log(0.3, 0.01);
    EXPECT_FALSE(s.h_independent());
    s = base_spec();
    s.sigma = CoefficientFn::tabulated({50.0, 150.0}, {0.25, 0.15});
    EXPECT_FALSE(s.s_independent());
    EXPECT_TRUE(s.h_independent());
}

TEST(SharpeParams, SignedLoading) {
    const SharpeParams p{0.2, 0.1};
    EXPECT_EQ(signed_loading(p, Side::seller), 0.2);
    EXPECT_EQ(signed_loading(p, Side::buyer), -0.1);
    EXPECT_THROW((SharpeParams{-0.1, 0.0}.validate()), ConfigError);
}

// ============================================================================
// Payoffs
// ============================================================================

TEST(Payoff, PutAndCallExact) {
    EXPECT_EQ(payoff_eval(Payoff::put(100.0), 80.0), 20.0);
    EXPECT_EQ(payoff_eval(Payoff::call(100.0), 100.0), 0.0);
    EXPECT_EQ(payoff_eval(Payoff::call(100.0), 120.0), 20.0);
    EXPECT_EQ(payoff_eval(Payoff::put(100.0, 2.0), 80.0), 40.0);
}

TEST(Payoff, ScaleIsExact) {
    const auto put = Payoff::put(100.0);
    for (double c : {0.0, 1.0, 2.5, 3.0})
        for (double S : {10.0, 80.0, 99.5, 150.0})
            EXPECT_EQ(payoff_eval(put.scaled(c), S), c * payoff_eval(put, S));
}

TEST(Payoff, CustomInterpolatesInLogAndContinuesLinearly) {
    const auto g = Payoff::custom({0.0, 1.0, 2.0}, {1.0, 3.0, 4.0});
    EXPECT_DOUBLE_EQ(g.at_log(0.5), 2.0);
    EXPECT_DOUBLE_EQ(g(std::exp(1.5)), 3.5);
    EXPECT_DOUBLE_EQ(g.at_log(-1.0), -1.0);
    EXPECT_DOUBLE_EQ(g.at_log(3.0), 5.0);
    EXPECT_EQ(g.monotonicity(), 1);
    EXPECT_EQ(Payoff::custom({0.0, 1.0, 2.0}, {1.0, 3.0, 2.0}).monotonicity(), 0);
}

TEST(Payoff, Errors) {
    EXPECT_THROW((void)payoff_eval(Payoff::put(100.0), 0.0), DomainError);
    EXPECT_THROW((void)payoff_eval(Payoff::put(100.0), -5.0), DomainError);
    EXPECT_THROW((void)Payoff::put(0.0), ConfigError);
    EXPECT_THROW((void)Payoff::call(100.0, -1.0), ConfigError);
    EXPECT_THROW((void)Payoff::custom({1.0, 0.0}, {1.0, 2.0}), ConfigError);
}

TEST(Payoff, Monotonicity) {
    EXPECT_EQ(Payoff::put(100.0).monotonicity(), -1);
    EXPECT_EQ(Payoff::call(100.0).monotonicity(), 1);
}

// ============================================================================
// Assumption validator
// ============================================================================

GridSpec sample_grid(int n = 21) {
    GridSpec g;
    g.x = Axis{std::log(50.0), std::log(200.0), n};
    g.y = Axis{std::log(50.0), std::log(200.0), n};
    return g;
}

TEST(Validator, ConstantSpecPasses) {
    const auto report = validate_assumptions(base_spec(), sample_grid(), Payoff::put(100.0));
    EXPECT_TRUE(report.all_pass());
    const auto* e = report.find("ellipticity");
    ASSERT_NE(e, nullptr);
    EXPECT_GT(e->estimate, 0.0);
    // smallest eigenvalue of [[s^2, rho s b], [rho s b, b^2]] bounds the sampled form from below
    const double tr = kSigma * kSigma + kB * kB;
    const double det = kSigma * kSigma * kB * kB * (1.0 - kRho * kRho);
    const double lmin = 0.5 * (tr - std::sqrt(tr * tr - 4.0 * det));
    EXPECT_GE(e->estimate, lmin * (1.0 - 1e-9));
}

TEST(Validator, PerfectCorrelationFailsEllipticity) {
    auto s = base_spec();
    s.rho = 1.0;
    const auto report = validate_assumptions(s, sample_grid());
    EXPECT_FALSE(report.find("ellipticity")->pass);
    EXPECT_FALSE(report.all_pass());
}

TEST(Validator, JumpInSigmaFailsLipschitz) {
    auto s = base_spec();
    s.sigma = CoefficientFn::tabulated({100.0 - 1e-6, 100.0 + 1e-6}, {0.1, 0.3});
    const auto report = validate_assumptions(s, sample_grid());
    EXPECT_FALSE(report.find("lipschitz_sigma")->pass);
    EXPECT_TRUE(report.find("lipschitz_mu")->pass);
}

TEST(Validator, RejectsDegenerateGrid) {
    GridSpec g = sample_grid();
    g.x.n = 1;
    EXPECT_THROW((void)validate_assumptions(base_spec(), g), ConfigError);
}

TEST(Validator, StochVolSpec) {
    StochVolSpec s;
    s.mu = 0.08;
    s.beta_fn = CoefficientFn::tabulated({0.1, 0.4}, {0.1, 0.4});
    s.a = CoefficientFn::tabulated({0.1, 0.4}, {0.2, -0.4});
    s.b = CoefficientFn::constant(0.2);
    s.rho = -0.3;
    s.r = 0.05;
    GridSpec g;
    g.x = Axis{std::log(50.0), std::log(200.0), 11};
    g.y = Axis{0.1, 0.4, 11};
    EXPECT_TRUE(validate_assumptions(s, g).all_pass());

    s.beta_fn = CoefficientFn::tabulated({0.1, 0.4}, {0.4, 0.1});
    EXPECT_FALSE(validate_assumptions(s, g).find("monotone_beta")->pass);
    g.y.reset();
    EXPECT_THROW((void)validate_assumptions(s, g), ConfigError);
}

}  // namespace
}  // namespace sharpe
