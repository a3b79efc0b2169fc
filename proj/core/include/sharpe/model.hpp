#pragma once

#include "sharpe/coefficient.hpp"
#include "sharpe/grid.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sharpe {

// ============================================================================
// Market models
// ============================================================================

/// Non-traded asset S with dS = mu(S) S dt + sigma(S) S dZ and a traded
/// asset H with dH = a(H) H dt + b(H) H dW, d<Z, W> = rho dt.
struct MarketSpec {
    CoefficientFn mu;
    CoefficientFn sigma;
    CoefficientFn a;
    CoefficientFn b;
    double rho = 0.0;
    double r = 0.0;

    /// Throws ConfigError if |rho| > 1, r < 0 or a coefficient is non-finite.
    void validate() const;

    [[nodiscard]] bool is_constant() const noexcept;
    /// Traded-asset coefficients do not vary with H, so prices do not either.
    [[nodiscard]] bool h_independent() const noexcept;
    /// mu and sigma do not vary with S.
    [[nodiscard]] bool s_independent() const noexcept;

    /// Convenience constructor for the two-GBM case.
    static MarketSpec constant(double mu, double sigma, double a, double b, double rho, double r);
};

/// S-drift after removing the part hedgeable through H:
/// mu(S) - (a(H) - r) rho sigma(S) / b(H).
/// Throws DomainError when sigma(S) or b(H) is not strictly positive.
[[nodiscard]] double mu_tilde(const MarketSpec& spec, double S, double H, double t = 0.0);

/// Traded stock S with volatility beta(sigma) driven by a factor sigma:
/// dS = mu S dt + beta(sigma) S dB, d sigma = a(sigma) dt + b(sigma) dW.
struct StochVolSpec {
    double mu = 0.0;
    CoefficientFn beta_fn;
    CoefficientFn a;
    CoefficientFn b;
    double rho = 0.0;
    double r = 0.0;

    void validate() const;

    /// Factor drift under the pricing measure for a market price of
    /// volatility risk of -alpha_signed:
    /// a - (mu - r) rho b / beta + alpha_signed sqrt(1 - rho^2) b.
    [[nodiscard]] double gamma(double sigma, double t, double alpha_signed) const;
};

struct SharpeParams {
    double alpha = 0.0;  ///< seller's instantaneous Sharpe ratio
    double beta = 0.0;   ///< buyer's instantaneous Sharpe ratio

    void validate() const;
};

enum class Side { seller, buyer };

[[nodiscard]] const char* to_string(Side side) noexcept;

/// Sharpe loading entering the pricing equation: +alpha for the seller,
/// -beta for the buyer.
[[nodiscard]] double signed_loading(const SharpeParams& sharpe, Side side) noexcept;

// ============================================================================
// Payoffs
// ============================================================================

enum class PayoffKind { put, call, custom };

/// Terminal claim scale * g(S_T).
class Payoff {
public:
    static Payoff put(double strike, double scale = 1.0);
    static Payoff call(double strike, double scale = 1.0);
    /// g tabulated at log-S nodes, linear in ln S between nodes and linearly
    /// continued past both ends.
    static Payoff custom(std::vector<double> log_s_grid, std::vector<double> values,
                         double scale = 1.0);

    [[nodiscard]] PayoffKind kind() const noexcept { return kind_; }
    [[nodiscard]] double strike() const noexcept { return strike_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }
    [[nodiscard]] const std::vector<double>& log_grid() const noexcept { return log_grid_; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

    /// scale * g(S); throws DomainError for S <= 0.
    [[nodiscard]] double operator()(double S) const;
    /// scale * g(e^x); total on finite x.
    [[nodiscard]] double at_log(double x) const;

    [[nodiscard]] Payoff scaled(double c) const;

    /// +1 if g is non-decreasing, -1 if non-increasing, 0 otherwise. A zero
    /// payoff counts as non-decreasing.
    [[nodiscard]] int monotonicity() const;

private:
    Payoff() = default;
    PayoffKind kind_ = PayoffKind::put;
    double strike_ = 0.0;
    double scale_ = 1.0;
    std::vector<double> log_grid_;
    std::vector<double> values_;
};

/// scale * g(S), the module-level form of Payoff::operator().
[[nodiscard]] double payoff_eval(const Payoff& payoff, double S);

[[nodiscard]] const char* to_string(PayoffKind kind) noexcept;

// ============================================================================
// Assumption spot-check
// ============================================================================

struct AssumptionEntry {
    std::string name;
    double estimate = 0.0;
    double threshold = 0.0;
    /// true: passes when estimate < threshold. false: passes when estimate > threshold
    /// (lower bounds such as the ellipticity constant).
    bool upper_bound = true;
    bool pass = false;
};

struct AssumptionReport {
    std::vector<AssumptionEntry> entries;

    [[nodiscard]] bool all_pass() const noexcept;
    [[nodiscard]] const AssumptionEntry* find(const std::string& name) const noexcept;
};

struct ValidationOptions {
    double bound_threshold = 1e6;       ///< sup |coefficient|
    double lipschitz_threshold = 1e6;   ///< max difference quotient in log coordinates
    double ellipticity_floor = 1e-8;    ///< smallest acceptable ellipticity constant
    double growth_exponent_threshold = 4.0;  ///< fitted lambda in g <= L (1 + (ln S)^{2 lambda})
    int directions = 360;               ///< sampled unit directions for the ellipticity form
};

/// Desk-scale check of the regularity hypotheses on a sample grid: bounded
/// coefficients, Lipschitz constants in log coordinates, uniform ellipticity
/// of the diffusion form, and (when a payoff is given) the growth exponent of
/// g in ln S. Heuristic, not a proof. The grid needs >= 2 nodes per axis; the
/// y-axis is ln H for MarketSpec and defaults to x when absent.
[[nodiscard]] AssumptionReport validate_assumptions(const MarketSpec& spec, const GridSpec& grid,
                                                    const std::optional<Payoff>& payoff = {},
                                                    const ValidationOptions& options = {});

/// Stochastic-volatility variant; the y-axis holds sigma values and is required.
[[nodiscard]] AssumptionReport validate_assumptions(const StochVolSpec& spec, const GridSpec& grid,
                                                    const std::optional<Payoff>& payoff = {},
                                                    const ValidationOptions& options = {});

}  // namespace sharpe
