#include "sharpe/analytic.hpp"
#include "sharpe/error.hpp"
#include "sharpe/montecarlo.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

namespace sharpe {
namespace {

using namespace sharpe::test;

MCConfig config(std::int64_t paths, int steps = 1, std::uint64_t seed = 11) {
    MCConfig c;
    c.n_paths = paths;
    c.n_steps = steps;
    c.seed = seed;
    return c;
}

// ============================================================================
// Random numbers
// ============================================================================

TEST(PathRng, ReproducibleStreams) {
    PathRng a(5, 17), b(5, 17), c(5, 18), d(6, 17);
    for (int i = 0; i < 10; ++i) {
        const auto x = a();
        EXPECT_EQ(x, b());
        EXPECT_NE(x, c());
        EXPECT_NE(x, d());
    }
}

TEST(PathRng, NormalMoments) {
    PathRng g(1, 0);
    const int n = 1000000;
    double s1 = 0.0, s2 = 0.0, s4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = g.normal();
        s1 += z;
        s2 += z * z;
        s4 += z * z * z * z;
    }
    EXPECT_NEAR(s1 / n, 0.0, 5e-3);
    EXPECT_NEAR(s2 / n, 1.0, 5e-3);
    EXPECT_NEAR(s4 / n, 3.0, 3e-2);
}

TEST(MCConfig, Validation) {
    MCConfig c = config(101);
    c.antithetic = true;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_THROW(config(0).validate(), ConfigError);
    EXPECT_THROW(config(10, 0).validate(), ConfigError);
}

// ============================================================================
// Paths
// ============================================================================

TEST(SimulatePair, DiscountedTradedAssetIsMartingaleUnderPricingMeasure) {
    MCConfig c = config(200000, 4);
    c.scheme = MCScheme::exact_gbm;
    const auto paths = simulate_pair(base_spec(), MinimalMartingale{}, c, kS, kS, kT);
    ASSERT_EQ(paths.S.size(), 200000u * 5u);
    double sum = 0.0, sum2 = 0.0;
    for (std::int64_t p = 0; p < paths.n_paths; ++p) {
        const double v = paths.h(p, 4) * std::exp(-kR * kT);
        sum += v;
        sum2 += v * v;
    }
    const double n = static_cast<double>(paths.n_paths);
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, kS, 4.0 * se);
    EXPECT_EQ(paths.s(0, 0), kS);
}

TEST(SimulatePair, LogReturnCorrelation) {
    MCConfig c = config(100000, 1);
    c.scheme = MCScheme::exact_gbm;
    const auto paths = simulate_pair(base_spec(), Physical{}, c, kS, kS, kT);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::int64_t p = 0; p < paths.n_paths; ++p) {
        const double x = std::log(paths.s(p, 1) / kS);
        const double y = std::log(paths.h(p, 1) / kS);
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    const double n = static_cast<double>(paths.n_paths);
    const double cov = sxy / n - sx * sy / (n * n);
    const double corr = cov / std::sqrt((sxx / n - sx * sx / (n * n)) * (syy / n - sy * sy / (n * n)));
    EXPECT_NEAR(corr, kRho, 5e-3);
    EXPECT_NEAR(sx / n, (kMu - 0.5 * kSigma * kSigma) * kT, 4.0 * kSigma / std::sqrt(n));
}

TEST(SimulatePair, TerminalCsv) {
    const auto paths = simulate_pair(base_spec(), Physical{}, config(3, 2), kS, kS, kT);
    std::stringstream out;
    write_terminal_csv(paths, out);
    std::string line;
    std::getline(out, line);
    EXPECT_EQ(line, "path,S_T,H_T");
    int rows = 0;
    while (std::getline(out, line)) ++rows;
    EXPECT_EQ(rows, 3);
}

// ============================================================================
// Pricing
// ============================================================================

TEST(PriceMc, AgreesWithClosedForm) {
    MCConfig c = config(200000);
    c.scheme = MCScheme::exact_gbm;
    for (Side side : {Side::seller, Side::buyer})
        for (const Payoff& payoff : {Payoff::put(kK), Payoff::call(kK)}) {
            const auto est = price_mc(base_spec(), payoff, base_sharpe(), side, c, kS, kS, kT);
            const double exact = price_closed_form(base_spec(), payoff, base_sharpe(), side, kS, kT);
            EXPECT_NEAR(est.mean, exact, 3.5 * est.std_error);
            EXPECT_EQ(est.n_paths, 200000);
            EXPECT_EQ(est.seed, 11u);
            EXPECT_TRUE(std::holds_alternative<PHat>(est.measure));
        }
}

TEST(PriceMc, EulerLogMatchesExactForConstantCoefficients) {
    MCConfig e = config(50000, 10);
    MCConfig x = e;
    x.scheme = MCScheme::exact_gbm;
    const auto a = price_mc(base_spec(), Payoff::put(kK), base_sharpe(), Side::seller, e, kS, kS, kT);
    const auto b = price_mc(base_spec(), Payoff::put(kK), base_sharpe(), Side::seller, x, kS, kS, kT);
    EXPECT_NEAR(a.mean, b.mean, 1e-9 * b.mean);
}

TEST(PriceMc, ThreadCountDoesNotChangeResult) {
    MCConfig one = config(30000, 5);
    one.n_threads = 1;
    MCConfig four = one;
    four.n_threads = 4;
    const auto a = price_mc(base_spec(), Payoff::call(kK), base_sharpe(), Side::seller, one, kS, kS, kT);
    const auto b = price_mc(base_spec(), Payoff::call(kK), base_sharpe(), Side::seller, four, kS, kS, kT);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
}

TEST(PriceMc, AntitheticReducesErrorForPut) {
    MCConfig plain = config(100000);
    plain.scheme = MCScheme::exact_gbm;
    MCConfig anti = plain;
    anti.antithetic = true;
    const auto a = price_mc(base_spec(), Payoff::put(kK), base_sharpe(), Side::seller, plain, kS, kS, kT);
    const auto b = price_mc(base_spec(), Payoff::put(kK), base_sharpe(), Side::seller, anti, kS, kS, kT);
    EXPECT_LT(b.std_error, a.std_error);
    const double exact = price_closed_form(base_spec(), Payoff::put(kK), base_sharpe(), Side::seller, kS, kT);
    EXPECT_NEAR(b.mean, exact, 4.0 * b.std_error);
}

TEST(PriceMc, Refusals) {
    const auto butterfly = Payoff::custom({4.0, 4.6, 5.2}, {0.0, 1.0, 0.0});
    EXPECT_THROW((void)price_mc(base_spec(), butterfly, base_sharpe(), Side::seller, config(100), kS, kS, kT),
                 UnsupportedError);
    auto s = base_spec();
    s.sigma = CoefficientFn::tabulated({50.0, 150.0}, {0.25, 0.15});
    EXPECT_THROW((void)price_mc(s, Payoff::put(kK), base_sharpe(), Side::seller, config(100), kS, kS, kT),
                 UnsupportedError);
    auto h = base_spec();
    h.b = CoefficientFn::affine_in_log(0.3, 0.01);
    MCConfig x = config(100);
    x.scheme = MCScheme::exact_gbm;
    EXPECT_THROW((void)price_mc(h, Payoff::put(kK), base_sharpe(), Side::seller, x, kS, kS, kT), ConfigError);
    EXPECT_THROW((void)price_mc(base_spec(), Payoff::put(kK), base_sharpe(), Side::seller, config(100), -1.0, kS, kT),
                 DomainError);
}

TEST(PriceUnder, MinimalMartingaleIsZeroLoadingPrice) {
    MCConfig c = config(200000);
    c.scheme = MCScheme::exact_gbm;
    const auto est = price_under(base_spec(), Payoff::call(kK), MinimalMartingale{}, c, kS, kS, kT);
    const double exact = price_closed_form(base_spec(), Payoff::call(kK), SharpeParams{}, Side::seller, kS, kT);
    EXPECT_NEAR(est.mean, exact, 3.5 * est.std_error);
    EXPECT_FALSE(describe(est.measure).empty());
}

TEST(PriceStochvolMc, RunsAndWarnsOnCoarseSteps) {
    const auto spec = mean_reverting_vol();
    const auto est = price_stochvol_mc(spec, Payoff::put(kK), kAlpha, config(20000, 50), kS, 0.2, kT);
    EXPECT_GT(est.mean, 0.0);
    EXPECT_GT(est.std_error, 0.0);
    EXPECT_TRUE(est.warnings.empty());
    auto fast = spec;
    fast.a = CoefficientFn::tabulated({0.1, 0.4}, {40.0, -80.0});
    const auto coarse = price_stochvol_mc(fast, Payoff::put(kK), kAlpha, config(1000, 2), kS, 0.2, kT);
    EXPECT_FALSE(coarse.warnings.empty());
    MCConfig x = config(100);
    x.scheme = MCScheme::exact_gbm;
    EXPECT_THROW((void)price_stochvol_mc(spec, Payoff::put(kK), kAlpha, x, kS, 0.2, kT), ConfigError);
}

// ============================================================================
// Good-deal bounds
// ============================================================================

BoundsResolution coarse_resolution() {
    BoundsResolution r;
    r.n_x = 201;
    r.n_t = 200;
    r.half_width = 2.5;
    return r;
}

TEST(GoodDealBounds, CollapsedInterval) {
    const auto b = good_deal_bounds(base_spec(), Payoff::put(kK), 0.0, 0.0, BoundsMethod::pde,
                                    coarse_resolution(), kS, kS, kT);
    EXPECT_EQ(b.lower, b.upper);
}

TEST(GoodDealBounds, PdeBracketsMidPrice) {
    const auto b = good_deal_bounds(base_spec(), Payoff::call(kK), 0.2, 0.1, BoundsMethod::pde,
                                    coarse_resolution(), kS, kS, kT);
    const double mid = price_closed_form(base_spec(), Payoff::call(kK), SharpeParams{}, Side::seller, kS, kT);
    EXPECT_LT(b.lower, mid);
    EXPECT_GT(b.upper, mid);
    EXPECT_NEAR(b.upper, price_closed_form(base_spec(), Payoff::call(kK), base_sharpe(), Side::seller, kS, kT),
                0.01 * b.upper);
}

TEST(GoodDealBounds, MonteCarloAgreesWithPde) {
    BoundsResolution r = coarse_resolution();
    r.mc = config(40000, 20);
    const auto mc = good_deal_bounds(base_spec(), Payoff::put(kK), 0.2, 0.2, BoundsMethod::mc, r, kS, kS, kT);
    const auto pde = good_deal_bounds(base_spec(), Payoff::put(kK), 0.2, 0.2, BoundsMethod::pde, r, kS, kS, kT);
    EXPECT_NEAR(mc.lower, pde.lower, 4.0 * mc.lower_std_error + 0.02);
    EXPECT_NEAR(mc.upper, pde.upper, 4.0 * mc.upper_std_error + 0.02);
    EXPECT_EQ(mc.method, BoundsMethod::mc);
    EXPECT_GT(mc.upper_std_error, 0.0);
}

}  // namespace
}  // namespace sharpe
