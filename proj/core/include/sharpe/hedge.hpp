#pragma once

#include "sharpe/model.hpp"
#include "sharpe/montecarlo.hpp"
#include "sharpe/pde.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace sharpe {

// ============================================================================
// Hedge ratios and local risk
// ============================================================================

/// Units of H held against the claim: P_H + rho (sigma / b) (S / H) P_S.
/// Throws DomainError outside the surface's hull.
[[nodiscard]] double hedge_ratio(const PriceSurface& surface, const MarketSpec& spec, double S,
                                 double H, double t);

/// Units of S held in the stochastic-volatility model: P_S + rho b / (beta S) P_sigma.
[[nodiscard]] double hedge_ratio_stochvol(const PriceSurface& surface, const StochVolSpec& spec,
                                          double S, double sigma, double t);

/// Local standard deviation of the hedged portfolio: sqrt(1 - rho^2) sigma S |P_S|.
[[nodiscard]] double local_risk(const PriceSurface& surface, const MarketSpec& spec, double S,
                                double H, double t);

/// Stochastic-volatility variant: sqrt(1 - rho^2) b(sigma) |P_sigma|.
[[nodiscard]] double local_risk(const PriceSurface& surface, const StochVolSpec& spec, double S,
                                double sigma, double t);

// ============================================================================
// Hedged-portfolio simulation
// ============================================================================

/// Snapshot of one path at a rebalance instant. Pi = V - P for the seller
/// and P - V for the buyer.
struct HedgeState {
    double t = 0.0;
    double S = 0.0;
    double H = 0.0;  ///< traded asset, or sigma in the stochastic-volatility model
    double V = 0.0;
    double pi = 0.0;
    double Pi = 0.0;
};

struct StepStats {
    double t = 0.0;
    double drift_excess = 0.0;  ///< cross-sectional mean of (Pi_{k+1} - Pi_k e^{r dt}) / dt
    double local_std = 0.0;     ///< sqrt(pi / 2) * mean |increment| / sqrt(dt)
};

struct TerminalErrorStats {
    double mean = 0.0;
    double std = 0.0;
};

struct HedgeReport {
    double realized_drift_excess = 0.0;
    /// Mean-absolute-deviation estimate sqrt(pi / 2) E|eps| / sqrt(dt), which
    /// averages the conditional standard deviation across states.
    double realized_local_std = 0.0;
    double realized_sharpe = 0.0;
    double realized_sharpe_std_error = 0.0;
    double rms_local_std = 0.0;        ///< sqrt(E eps^2 / dt), diagnostic
    double predicted_local_std = 0.0;  ///< ensemble average of local_risk along paths
    double pathwise_sharpe = 0.0;      ///< mean over paths of time-averaged drift / std
    double target_sharpe = 0.0;        ///< +alpha seller, +beta buyer (Pi = P - V)
    int n_rebalances = 0;
    std::int64_t n_paths = 0;
    std::uint64_t seed = 0;
    TerminalErrorStats terminal_error;  ///< Pi_T against a target of 0
    double clamp_fraction = 0.0;        ///< share of state visits outside the surface hull
    std::vector<StepStats> steps;
    std::vector<std::string> warnings;
};

/// Simulates (S, H) under the physical measure, rebalancing to hedge_ratio
/// at each of config.n_steps steps. V_0 = P_0 so Pi_0 = 0. The pricing rule
/// predicts realized_sharpe -> target_sharpe as dt -> 0.
[[nodiscard]] HedgeReport simulate_hedged_portfolio(const MarketSpec& spec, const Payoff& payoff,
                                                    const SharpeParams& sharpe, Side side,
                                                    const PriceSurface& surface,
                                                    const MCConfig& config, double S0, double H0);

/// Stochastic-volatility variant, hedging in S itself.
[[nodiscard]] HedgeReport simulate_hedged_portfolio(const StochVolSpec& spec, const Payoff& payoff,
                                                    const SharpeParams& sharpe, Side side,
                                                    const PriceSurface& surface,
                                                    const MCConfig& config, double S0,
                                                    double sigma0);

struct HedgeTrendPoint {
    int n_steps = 0;
    HedgeReport report;
};

/// Runs the basis-risk simulation at each step count using one shared set
/// of finest-level Brownian increments (coarser runs sum them), so the
/// trend is not masked by independent sampling noise. Every step count
/// must divide the largest one.
[[nodiscard]] std::vector<HedgeTrendPoint> hedge_trend(const MarketSpec& spec, const Payoff& payoff,
                                                       const SharpeParams& sharpe, Side side,
                                                       const PriceSurface& surface,
                                                       const MCConfig& config,
                                                       const std::vector<int>& step_counts,
                                                       double S0, double H0);

/// Sample variance of the one-step seller portfolio change from (S, H, t)
/// holding pi units of H over dt, with common random numbers per seed.
[[nodiscard]] double one_step_variance(const PriceSurface& surface, const MarketSpec& spec,
                                       double S, double H, double t, double dt, double pi,
                                       std::int64_t n_samples, std::uint64_t seed);

/// CSV with header t,drift_excess,local_std.
void write_step_csv(const HedgeReport& report, std::ostream& out);

}  // namespace sharpe
