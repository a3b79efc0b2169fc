#include "sharpe/analytic.hpp"
#include "sharpe/error.hpp"
#include "sharpe/statics.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

namespace sharpe {
namespace {

using namespace sharpe::test;

SweepPoint point(const MarketSpec& s, double v, SharpeParams p = base_sharpe()) { return {s, p, v}; }

TEST(Statics, AxisNames) {
    for (SweepAxis a : {SweepAxis::alpha, SweepAxis::rho, SweepAxis::mu, SweepAxis::sigma, SweepAxis::a,
                        SweepAxis::b})
        EXPECT_EQ(parse_sweep_axis(to_string(a)), a);
    EXPECT_THROW((void)parse_sweep_axis("gamma"), ConfigError);
}

TEST(Statics, SweepValues) {
    const auto v = sweep_values(0.0, 0.4, 5);
    ASSERT_EQ(v.size(), 5u);
    EXPECT_EQ(v.front(), 0.0);
    EXPECT_EQ(v.back(), 0.4);
    EXPECT_DOUBLE_EQ(v[2], 0.2);
    EXPECT_EQ(sweep_values(0.3, 0.3, 1), std::vector<double>{0.3});
    EXPECT_THROW((void)sweep_values(1.0, 0.0, 3), ConfigError);
    EXPECT_THROW((void)sweep_values(0.0, 1.0, 0), ConfigError);
}

TEST(Statics, ExpectedDirections) {
    const auto s = base_spec();
    const ShapeHypothesis call{1, true};
    const ShapeHypothesis put{-1, true};
    const auto lo = point(s, 0.0), hi = point(s, 1.0);
    EXPECT_EQ(expected_direction(SweepAxis::alpha, SweepColumn::seller, lo, hi, put), Direction::increasing);
    EXPECT_EQ(expected_direction(SweepAxis::alpha, SweepColumn::buyer, lo, hi, put), Direction::decreasing);
    EXPECT_EQ(expected_direction(SweepAxis::alpha, SweepColumn::alpha0, lo, hi, put), Direction::constant);
    EXPECT_EQ(expected_direction(SweepAxis::mu, SweepColumn::seller, lo, hi, put), Direction::decreasing);
    EXPECT_EQ(expected_direction(SweepAxis::mu, SweepColumn::seller, lo, hi, call), Direction::increasing);
    EXPECT_EQ(expected_direction(SweepAxis::a, SweepColumn::buyer, lo, hi, call), Direction::decreasing);
    EXPECT_EQ(expected_direction(SweepAxis::b, SweepColumn::seller, lo, hi, call), Direction::increasing);
    EXPECT_EQ(expected_direction(SweepAxis::rho, SweepColumn::seller, lo, hi, call), Direction::decreasing);
    EXPECT_EQ(expected_direction(SweepAxis::rho, SweepColumn::buyer, lo, hi, call), Direction::none);
    EXPECT_EQ(expected_direction(SweepAxis::rho, SweepColumn::seller, lo, hi, put), Direction::none);
    // alpha sqrt(1 - rho^2) = 0.0872 >= rho (a - r) / b = 0.081 holds for the seller only
    EXPECT_EQ(expected_direction(SweepAxis::sigma, SweepColumn::seller, lo, hi, call), Direction::increasing);
    EXPECT_EQ(expected_direction(SweepAxis::sigma, SweepColumn::alpha0, lo, hi, call), Direction::none);
    EXPECT_EQ(expected_direction(SweepAxis::sigma, SweepColumn::buyer, lo, hi, call), Direction::none);

    auto low_mu = s;
    low_mu.mu = CoefficientFn::constant(0.01);
    EXPECT_EQ(expected_direction(SweepAxis::mu, SweepColumn::seller, point(low_mu, 0.01), point(s, 0.07), call),
              Direction::none);
    auto uncorrelated = s;
    uncorrelated.rho = 0.0;
    EXPECT_EQ(expected_direction(SweepAxis::a, SweepColumn::seller, point(uncorrelated, 0), point(uncorrelated, 1),
                                 ShapeHypothesis{}),
              Direction::constant);
    EXPECT_THROW((void)expected_direction(SweepAxis::mu, SweepColumn::seller, hi, lo, call), ConfigError);
}

TEST(Statics, SurfaceShape) {
    const auto put = solve_1d(base_spec(), Payoff::put(kK), base_sharpe(), Side::seller, log_grid(201, 100)).first;
    const ShapeHypothesis sp = surface_shape(put);
    EXPECT_EQ(sp.delta_sign, -1);
    EXPECT_TRUE(sp.convex);
    const auto fly = Payoff::custom({4.0, 4.6, 5.2}, {0.0, 10.0, 0.0});
    const auto bf = solve_1d(base_spec(), fly, base_sharpe(), Side::seller, log_grid(201, 100)).first;
    const ShapeHypothesis sb = surface_shape(bf);
    EXPECT_EQ(sb.delta_sign, 0);
    EXPECT_FALSE(sb.convex);
}

// ============================================================================
// Sweeps
// ============================================================================

TEST(Sweep, AlphaCallOrderedAndMonotone) {
    const auto r = run_sweep(base_spec(), Payoff::call(kK), base_sharpe(), SweepAxis::alpha,
                             sweep_values(0.0, 0.4, 9), kS, kT);
    ASSERT_EQ(r.rows.size(), 9u);
    EXPECT_TRUE(r.all_ok());
    EXPECT_EQ(r.rows.front().buyer, r.rows.front().seller);
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
        EXPECT_GE(r.rows[i].seller, r.rows[i - 1].seller);
        EXPECT_LE(r.rows[i].buyer, r.rows[i - 1].buyer);
        EXPECT_EQ(r.rows[i].expected[2], Direction::increasing);
    }
}

TEST(Sweep, RhoCallSellerDecreasing) {
    const auto r = run_sweep(base_spec(), Payoff::call(kK), base_sharpe(), SweepAxis::rho,
                             sweep_values(0.0, 0.99, 12), kS, kT);
    EXPECT_TRUE(r.all_ok());
    for (std::size_t i = 1; i < r.rows.size(); ++i) {
        EXPECT_LE(r.rows[i].seller, r.rows[i - 1].seller);
        EXPECT_EQ(r.rows[i].expected[2], Direction::decreasing);
        EXPECT_EQ(r.rows[i].expected[0], Direction::none);
    }
}

TEST(Sweep, AllAxesClosedFormPass) {
    struct Case {
        SweepAxis axis;
        double lo, hi;
    };
    for (const Payoff& payoff : {Payoff::put(kK), Payoff::call(kK)})
        for (const Case c : {Case{SweepAxis::mu, 0.05, 0.15}, Case{SweepAxis::a, 0.05, 0.2},
                             Case{SweepAxis::b, 0.1, 0.5}, Case{SweepAxis::sigma, 0.1, 0.4}}) {
            const auto r = run_sweep(base_spec(), payoff, base_sharpe(), c.axis, sweep_values(c.lo, c.hi, 10),
                                     kS, kT);
            EXPECT_TRUE(r.all_ok()) << to_string(c.axis) << " " << to_string(payoff.kind());
        }
}

TEST(Sweep, SinglePointMatchesPrice) {
    const auto r = run_sweep(base_spec(), Payoff::put(kK), base_sharpe(), SweepAxis::rho,
                             sweep_values(kRho, kRho, 1), kS, kT);
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_EQ(r.rows[0].seller, price_closed_form(base_spec(), Payoff::put(kK), base_sharpe(), Side::seller, kS, kT));
    EXPECT_EQ(r.rows[0].buyer, price_closed_form(base_spec(), Payoff::put(kK), base_sharpe(), Side::buyer, kS, kT));
}

TEST(Sweep, PdeMethodTracksClosedForm) {
    SweepOptions o;
    o.method = SweepMethod::pde;
    o.resolution.n_x = 301;
    o.resolution.n_t = 150;
    o.resolution.half_width = 2.5;
    const auto values = sweep_values(0.0, 0.4, 5);
    const auto pde = run_sweep(base_spec(), Payoff::put(kK), base_sharpe(), SweepAxis::alpha, values, kS, kT, o);
    const auto cf = run_sweep(base_spec(), Payoff::put(kK), base_sharpe(), SweepAxis::alpha, values, kS, kT);
    EXPECT_TRUE(pde.all_ok());
    for (std::size_t i = 0; i < values.size(); ++i) {
        EXPECT_NEAR(pde.rows[i].seller, cf.rows[i].seller, 0.01 * cf.rows[i].seller);
        EXPECT_NEAR(pde.rows[i].buyer, cf.rows[i].buyer, 0.01 * cf.rows[i].buyer);
        EXPECT_EQ(pde.rows[i].shape[2].delta_sign, -1);
    }
}

TEST(Sweep, RejectsInvalidAxisValues) {
    EXPECT_THROW((void)run_sweep(base_spec(), Payoff::call(kK), base_sharpe(), SweepAxis::rho,
                                 sweep_values(0.5, 1.2, 3), kS, kT),
                 ConfigError);
    EXPECT_THROW((void)run_sweep(base_spec(), Payoff::call(kK), base_sharpe(), SweepAxis::sigma,
                                 sweep_values(0.0, 0.3, 3), kS, kT),
                 ConfigError);
    auto s = base_spec();
    s.sigma = CoefficientFn::tabulated({50.0, 150.0}, {0.25, 0.15});
    EXPECT_THROW((void)run_sweep(s, Payoff::call(kK), base_sharpe(), SweepAxis::rho, sweep_values(0, 0.5, 3), kS, kT),
                 UnsupportedError);
}

}  // namespace
}  // namespace sharpe
