#pragma once

#include "sharpe/model.hpp"
#include "sharpe/pde.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sharpe {

// ============================================================================
// Random numbers
// ============================================================================

/// SplitMix64 stream. Each path gets its own stream keyed by (seed, path
/// index), so results do not depend on how paths are split across threads.
class PathRng {
public:
    using result_type = std::uint64_t;

    PathRng(std::uint64_t seed, std::uint64_t stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }
    result_type operator()() noexcept;

    /// Standard normal draw (Marsaglia polar method, one cached spare).
    [[nodiscard]] double normal() noexcept;

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// ============================================================================
// Configuration and measures
// ============================================================================

enum class MCScheme { euler_log, exact_gbm };

struct MCConfig {
    std::int64_t n_paths = 100000;
    int n_steps = 1;
    std::uint64_t seed = 1;
    MCScheme scheme = MCScheme::euler_log;
    bool antithetic = false;
    int n_threads = 0;  ///< 0: hardware concurrency

    /// Throws ConfigError on nonpositive counts or an odd path count with antithetics.
    void validate() const;
};

[[nodiscard]] const char* to_string(MCScheme scheme) noexcept;

/// Sign of the price delta at (S, H, t); drives the bang-bang control.
using DeltaSignFn = std::function<double(double S, double H, double t)>;

struct Physical {};
/// S-drift mu_tilde + signed_alpha sqrt(1 - rho^2) sigma, H-drift r.
struct PHat {
    double signed_alpha = 0.0;
};
/// PHat with signed_alpha = 0.
struct MinimalMartingale {};
/// Stochastic-volatility pricing measure: S-drift r, sigma-drift gamma(signed_alpha).
struct StochVolBar {
    double signed_alpha = 0.0;
};
/// PHat with signed_alpha = loading * sign(P_S(S, H, t)) re-evaluated each step.
struct Controlled {
    double loading = 0.0;  ///< +alpha seller, -beta buyer
    DeltaSignFn delta_sign;
};

using MeasureTag = std::variant<Physical, PHat, MinimalMartingale, StochVolBar, Controlled>;

[[nodiscard]] std::string describe(const MeasureTag& measure);

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    std::uint64_t seed = 0;
    MeasureTag measure;
    std::vector<std::string> warnings;
};

// ============================================================================
// Path simulation
// ============================================================================

/// Paths stored row-major: path p, time index k at p * (n_steps + 1) + k.
struct PathEnsemble {
    std::int64_t n_paths = 0;
    int n_steps = 0;
    double T = 0.0;
    std::vector<double> S;
    std::vector<double> H;  ///< traded asset, or sigma for stochastic-volatility paths

    [[nodiscard]] double s(std::int64_t path, int k) const {
        return S[static_cast<std::size_t>(path) * (n_steps + 1) + k];
    }
    [[nodiscard]] double h(std::int64_t path, int k) const {
        return H[static_cast<std::size_t>(path) * (n_steps + 1) + k];
    }
};

/// Simulates (S, H) with dZ = rho dW + sqrt(1 - rho^2) dW_perp under the
/// chosen measure. Euler in the logs; exact-gbm needs constant coefficients.
[[nodiscard]] PathEnsemble simulate_pair(const MarketSpec& spec, const MeasureTag& measure,
                                         const MCConfig& config, double S0, double H0, double T);

/// Simulates (S, sigma) for the stochastic-volatility model under the
/// physical measure or StochVolBar.
[[nodiscard]] PathEnsemble simulate_stochvol(const StochVolSpec& spec, const MeasureTag& measure,
                                             const MCConfig& config, double S0, double sigma0,
                                             double T);

/// One CSV row per path: path,S_T,H_T.
void write_terminal_csv(const PathEnsemble& paths, std::ostream& out);

// ============================================================================
// Pricing
// ============================================================================

/// Discounted payoff mean under PHat with the sign rule of the yield closed
/// form: seller call +alpha, seller put -alpha, buyer call -beta, buyer put
/// +beta. Refuses non-monotone payoffs and S-dependent mu or sigma
/// (UnsupportedError).
[[nodiscard]] MCEstimate price_mc(const MarketSpec& spec, const Payoff& payoff,
                                  const SharpeParams& sharpe, Side side, const MCConfig& config,
                                  double S0, double H0, double T);

/// Discounted payoff mean under an explicit measure (no sign rule).
[[nodiscard]] MCEstimate price_under(const MarketSpec& spec, const Payoff& payoff,
                                     const MeasureTag& measure, const MCConfig& config, double S0,
                                     double H0, double T);

/// Stochastic-volatility price under StochVolBar(alpha_signed), Euler-log.
/// Adds a warning when max |drift| dt exceeds 1.
[[nodiscard]] MCEstimate price_stochvol_mc(const StochVolSpec& spec, const Payoff& payoff,
                                           double alpha_signed, const MCConfig& config, double S0,
                                           double sigma0, double T);

// ============================================================================
// Good-deal bounds
// ============================================================================

enum class BoundsMethod { pde, mc };

[[nodiscard]] const char* to_string(BoundsMethod method) noexcept;

struct BoundsResolution {
    int n_x = 401;
    int n_y = 101;            ///< ln H nodes when the model depends on H
    int n_t = 400;
    double half_width = 0.0;  ///< log-space half-width; 0 picks one from sigma and T
    int sign_grid = 65;       ///< nodes per axis of the pre-solve used for sign(P_S)
    MCConfig mc;
    SolverOptions solver;
};

struct GoodDealBounds {
    double lower = 0.0;  ///< buyer price with Sharpe ratio beta
    double upper = 0.0;  ///< seller price with Sharpe ratio alpha
    double lower_std_error = 0.0;
    double upper_std_error = 0.0;
    BoundsMethod method = BoundsMethod::pde;
    std::vector<std::string> warnings;
};

[[nodiscard]] GoodDealBounds good_deal_bounds(const MarketSpec& spec, const Payoff& payoff,
                                              double alpha, double beta, BoundsMethod method,
                                              const BoundsResolution& resolution, double S0,
                                              double H0, double T);

/// Grid centred on (ln S0[, ln H0]) used by the bounds and CLI routes.
[[nodiscard]] GridSpec pricing_grid(const MarketSpec& spec, double S0, double H0, double T,
                                    int n_x, int n_y, int n_t, double half_width,
                                    bool with_h_axis);

/// Seller or buyer price at (S0, H0) from solve_1d or solve_2d, whichever the model needs.
[[nodiscard]] double price_pde(const MarketSpec& spec, const Payoff& payoff,
                               const SharpeParams& sharpe, Side side, double S0, double H0,
                               double T, const BoundsResolution& resolution);

}  // namespace sharpe
