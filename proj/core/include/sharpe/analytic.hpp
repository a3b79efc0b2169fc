#pragma once

#include "sharpe/model.hpp"

namespace sharpe {

/// Standard normal CDF via erfc; absolute error well below 1e-12.
[[nodiscard]] double std_normal_cdf(double x) noexcept;

/// Black-Scholes inputs with a continuous yield delta.
struct YieldAdjustedInputs {
    double S = 100.0;
    double K = 100.0;
    double tau = 1.0;
    double r = 0.0;
    double delta = 0.0;
    double sigma = 0.2;

    /// Throws DomainError unless S, K, sigma > 0 and tau >= 0.
    void validate() const;
};

/// Effective dividend yield r - mu_tilde + s * lambda * sqrt(1 - rho^2) * sigma,
/// with s = +1 for puts, -1 for calls, and lambda = alpha (seller) or -beta
/// (buyer). Requires constant coefficients (UnsupportedError otherwise).
[[nodiscard]] double effective_yield(const MarketSpec& spec, const SharpeParams& sharpe, Side side,
                                     PayoffKind payoff_kind);

/// K e^{-r tau} Phi(d-) - S e^{-delta tau} Phi(d~-). Falls back to the
/// discounted intrinsic value when sigma sqrt(tau) < 1e-12.
[[nodiscard]] double bs_put_yield(const YieldAdjustedInputs& in);

/// S e^{-delta tau} Phi(d1) - K e^{-r tau} Phi(d2), same degenerate handling.
[[nodiscard]] double bs_call_yield(const YieldAdjustedInputs& in);

/// Closed-form seller/buyer price of a put or call in the two-GBM model,
/// including the payoff scale. Custom payoffs throw UnsupportedError.
[[nodiscard]] double price_closed_form(const MarketSpec& spec, const Payoff& payoff,
                                       const SharpeParams& sharpe, Side side, double S,
                                       double tau);

}  // namespace sharpe
