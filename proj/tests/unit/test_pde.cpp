#include "sharpe/analytic.hpp"
#include "sharpe/error.hpp"
#include "sharpe/pde.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sharpe {
namespace {

using namespace sharpe::test;

double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

// ============================================================================
// One-dimensional solver
// ============================================================================

TEST(Solve1d, MatchesClosedFormAllCombos) {
    const auto s = base_spec();
    const auto p = base_sharpe();
    const GridSpec g = log_grid(401, 400);
    for (Side side : {Side::seller, Side::buyer})
        for (const Payoff& payoff : {Payoff::put(kK), Payoff::call(kK)}) {
            const auto [surf, report] = solve_1d(s, payoff, p, side, g);
            const double exact = price_closed_form(s, payoff, p, side, kS, kT);
            EXPECT_LT(rel_err(surf.value(kS, 0.0, 0.0), exact), 5e-3)
                << to_string(side) << " " << to_string(payoff.kind());
            EXPECT_EQ(static_cast<int>(report.policy_iterations.size()), g.n_t);
            EXPECT_TRUE(std::isfinite(report.max_residual));
            EXPECT_FALSE(report.boundary_scheme.empty());
        }
}

TEST(Solve1d, TerminalSliceIsPayoffAndMetadata) {
    const auto payoff = Payoff::put(kK);
    const auto [surf, report] = solve_1d(base_spec(), payoff, base_sharpe(), Side::buyer, log_grid(101, 50));
    for (int i = 0; i < surf.n_x(); ++i)
        EXPECT_EQ(surf.at(surf.n_t(), i), payoff.at_log(surf.grid.x.node(i)));
    EXPECT_EQ(surf.side, Side::buyer);
    EXPECT_EQ(surf.equation_tag, EquationTag::basis_risk_1d);
    EXPECT_EQ(surf.sharpe_used, -kAlpha);
    EXPECT_EQ(surf.second_axis, SecondAxis::none);
}

TEST(Solve1d, NonNegativeForNonNegativePayoff) {
    for (const Payoff& payoff : {Payoff::put(kK), Payoff::call(kK)}) {
        const auto surf = solve_1d(base_spec(), payoff, SharpeParams{0.5, 0.5}, Side::buyer,
                                   log_grid(201, 100)).first;
        EXPECT_GE(*std::min_element(surf.values.begin(), surf.values.end()), -1e-10);
    }
}

TEST(Solve1d, CrankNicolsonMoreAccurate) {
    const auto s = base_spec();
    const auto payoff = Payoff::put(kK);
    const double exact = price_closed_form(s, payoff, base_sharpe(), Side::seller, kS, kT);
    SolverOptions cn;
    cn.scheme = TimeScheme::crank_nicolson;
    const GridSpec g = log_grid(401, 100);
    const double ie = solve_1d(s, payoff, base_sharpe(), Side::seller, g).first.value(kS, 0, 0);
    const double c = solve_1d(s, payoff, base_sharpe(), Side::seller, g, cn).first.value(kS, 0, 0);
    EXPECT_LT(std::abs(c - exact), std::abs(ie - exact));
}

TEST(Solve1d, CustomPayoffOrdering) {
    // butterfly: non-monotone, so the control switches sign across S
    const auto payoff = Payoff::custom({std::log(60.0), std::log(80.0), std::log(100.0), std::log(120.0),
                                        std::log(140.0)},
                                       {0.0, 0.0, 20.0, 0.0, 0.0});
    const GridSpec grid = log_grid(201, 100);
    const auto seller = solve_1d(base_spec(), payoff, base_sharpe(), Side::seller, grid).first;
    const auto mid = solve_1d(base_spec(), payoff, SharpeParams{}, Side::seller, grid).first;
    const auto buyer = solve_1d(base_spec(), payoff, base_sharpe(), Side::buyer, grid).first;
    for (std::size_t k = 0; k < seller.values.size(); ++k) {
        EXPECT_LE(buyer.values[k], mid.values[k] + 1e-9);
        EXPECT_LE(mid.values[k], seller.values[k] + 1e-9);
    }
}

TEST(Solve1d, Errors) {
    auto s = base_spec();
    s.b = CoefficientFn::affine_in_log(0.3, 0.02);
    EXPECT_THROW((void)solve_1d(s, Payoff::put(kK), base_sharpe(), Side::seller, log_grid(51, 10)),
                 UnsupportedError);
    GridSpec g = log_grid(51, 10);
    g.y = Axis{0.0, 1.0, 5};
    EXPECT_THROW((void)solve_1d(base_spec(), Payoff::put(kK), base_sharpe(), Side::seller, g),
                 ConfigError);
    g = log_grid(2, 10);
    EXPECT_THROW((void)solve_1d(base_spec(), Payoff::put(kK), base_sharpe(), Side::seller, g),
                 ConfigError);
}

TEST(Solve1d, PolicyIterationBudgetExceeded) {
    const auto payoff = Payoff::custom({std::log(60.0), std::log(80.0), std::log(100.0), std::log(120.0),
                                        std::log(140.0)},
                                       {0.0, 0.0, 20.0, 0.0, 0.0});
    SolverOptions o;
    o.max_policy_iterations = 1;
    try {
        (void)solve_1d(base_spec(), payoff, SharpeParams{0.5, 0.5}, Side::seller, log_grid(201, 20), o);
        SUCCEED() << "policy settled within one iteration";
    } catch (const SolverError& e) {
        EXPECT_EQ(e.iterations(), 1);
        EXPECT_TRUE(std::isfinite(e.residual()));
    }
}

// ============================================================================
// Two-dimensional solver
// ============================================================================

GridSpec two_d_grid(int n_x, int n_y, int n_t) {
    GridSpec g = log_grid(n_x, n_t, 2.0);
    g.y = Axis{std::log(kS) - 1.5, std::log(kS) + 1.5, n_y};
    return g;
}

TEST(Solve2d, ConstantCoefficientsMatchOneDimensional) {
    const auto payoff = Payoff::put(kK);
    const GridSpec g2 = two_d_grid(121, 41, 100);
    const auto [surf, report] = solve_2d(base_spec(), payoff, base_sharpe(), Side::seller, g2);
    const double exact = price_closed_form(base_spec(), payoff, base_sharpe(), Side::seller, kS, kT);
    EXPECT_LT(rel_err(surf.value(kS, kS, 0.0), exact), 2e-2);
    // no H dependence in the interior
    const int i = surf.n_x() / 2;
    for (int j = 5; j < surf.n_y() - 5; ++j)
        EXPECT_NEAR(surf.at(0, i, j), surf.at(0, i, surf.n_y() / 2), 1e-6);
    EXPECT_EQ(surf.equation_tag, EquationTag::basis_risk_2d);
    EXPECT_EQ(surf.second_axis, SecondAxis::log_h);
    EXPECT_GE(report.factorizations, 1);
    EXPECT_FALSE(report.cross_term_scheme.empty());
}

TEST(Solve2d, HDependentTradedVolatility) {
    auto s = base_spec();
    s.b = CoefficientFn::affine_in_log(0.3 - 0.05 * std::log(kS), 0.05);
    const auto surf = solve_2d(s, Payoff::put(kK), base_sharpe(), Side::seller, two_d_grid(81, 41, 50)).first;
    const double low = surf.value(kS, 60.0, 0.0);
    const double high = surf.value(kS, 160.0, 0.0);
    EXPECT_TRUE(std::isfinite(low));
    EXPECT_GT(std::abs(high - low), 1e-4);
}

TEST(Solve2d, DegenerateCorrelation) {
    auto s = base_spec();
    s.rho = 1.0;
    EXPECT_THROW((void)solve_2d(s, Payoff::put(kK), base_sharpe(), Side::seller, two_d_grid(31, 21, 10)),
                 DegenerateEllipticityError);
    EXPECT_THROW((void)solve_2d(base_spec(), Payoff::put(kK), base_sharpe(), Side::seller, log_grid(31, 10)),
                 ConfigError);
}

// ============================================================================
// Stochastic volatility
// ============================================================================

TEST(StochVol, NonlinearEqualsLinearForPut) {
    const auto spec = mean_reverting_vol();
    const GridSpec g = vol_grid(101, 41, 50);
    const auto [nl, rep] = solve_stochvol_nonlinear(spec, Payoff::put(kK), base_sharpe(), Side::seller, g);
    const auto lin = solve_stochvol_linear(spec, Payoff::put(kK), kAlpha, g).first;
    double diff = 0.0;
    for (std::size_t k = 0; k < nl.values.size(); ++k)
        diff = std::max(diff, std::abs(nl.values[k] - lin.values[k]));
    EXPECT_LT(diff, 1e-6);
    EXPECT_EQ(nl.equation_tag, EquationTag::stochvol_nonlinear);
    EXPECT_EQ(lin.equation_tag, EquationTag::stochvol_linear);
    EXPECT_EQ(nl.second_axis, SecondAxis::sigma);
    const auto gk = greeks(nl, 0);
    double min_psigma = 0.0;
    for (double v : gk.P_y)
        if (!std::isnan(v)) min_psigma = std::min(min_psigma, v);
    EXPECT_GE(min_psigma, -1e-6);
}

TEST(StochVol, PriceIncreasesWithVolatility) {
    const auto spec = mean_reverting_vol();
    const auto surf = solve_stochvol_linear(spec, Payoff::put(kK), kAlpha, vol_grid(101, 31, 40)).first;
    EXPECT_LT(surf.value(kS, 0.15, 0.0), surf.value(kS, 0.3, 0.0));
}

TEST(StochVol, Errors) {
    auto spec = mean_reverting_vol();
    spec.rho = -1.0;
    EXPECT_THROW((void)solve_stochvol_linear(spec, Payoff::put(kK), kAlpha, vol_grid(31, 11, 5)),
                 DegenerateEllipticityError);
    EXPECT_THROW((void)solve_stochvol_linear(mean_reverting_vol(), Payoff::put(kK), kAlpha, log_grid(31, 5)),
                 ConfigError);
}

// ============================================================================
// Surface sampling, Greeks and serialization
// ============================================================================

TEST(Surface, GreeksMatchClosedFormDifferences) {
    const auto s = base_spec();
    const auto payoff = Payoff::call(kK);
    const auto surf = solve_1d(s, payoff, base_sharpe(), Side::seller, log_grid(801, 400)).first;
    const double h = 0.01;
    auto cf = [&](double S) { return price_closed_form(s, payoff, base_sharpe(), Side::seller, S, kT); };
    const PointGreeks gk = sample_greeks(surf, kS, 0.0, 0.0);
    EXPECT_NEAR(gk.P_S, (cf(kS + h) - cf(kS - h)) / (2 * h), 5e-3);
    EXPECT_NEAR(gk.P_SS, (cf(kS + h) - 2 * cf(kS) + cf(kS - h)) / (h * h), 5e-4);
}

TEST(Surface, HullAndClamping) {
    const auto surf = solve_1d(base_spec(), Payoff::put(kK), base_sharpe(), Side::seller, log_grid(51, 10, 1.0)).first;
    EXPECT_TRUE(surf.inside_hull(kS, 0.0, 0.5));
    EXPECT_FALSE(surf.inside_hull(kS * 10.0, 0.0, 0.5));
    EXPECT_EQ(surf.value(kS * 10.0, 0.0, 0.0), surf.at(0, surf.n_x() - 1));
    EXPECT_THROW((void)surf.value(0.0, 0.0, 0.0), DomainError);
    EXPECT_THROW((void)greeks(surf, 11), ConfigError);
}

TEST(Surface, BinaryRoundTrip) {
    const auto surf = solve_2d(base_spec(), Payoff::call(kK), base_sharpe(), Side::buyer, two_d_grid(21, 11, 5)).first;
    std::stringstream buf;
    write_surface_binary(surf, buf);
    const PriceSurface back = read_surface_binary(buf);
    EXPECT_EQ(back.values, surf.values);
    EXPECT_EQ(back.side, surf.side);
    EXPECT_EQ(back.equation_tag, surf.equation_tag);
    EXPECT_EQ(back.sharpe_used, surf.sharpe_used);
    EXPECT_EQ(back.grid.y->n, 11);

    std::stringstream bad("not a surface");
    EXPECT_THROW((void)read_surface_binary(bad), ConfigError);
    std::stringstream again;
    write_surface_binary(surf, again);
    std::string truncated = again.str().substr(0, again.str().size() - 16);
    std::stringstream cut(truncated);
    EXPECT_THROW((void)read_surface_binary(cut), ConfigError);
}

TEST(Surface, CsvLayout) {
    const auto surf = solve_1d(base_spec(), Payoff::put(kK), base_sharpe(), Side::seller, log_grid(5, 2, 1.0)).first;
    std::stringstream out;
    write_surface_csv(surf, out);
    std::string line;
    std::getline(out, line);
    EXPECT_EQ(line, "t,S,value");
    int rows = 0;
    while (std::getline(out, line)) ++rows;
    EXPECT_EQ(rows, 5 * 3);
}

}  // namespace
}  // namespace sharpe
