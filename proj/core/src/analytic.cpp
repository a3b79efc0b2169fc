#include "sharpe/analytic.hpp"

#include "sharpe/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sharpe {

double std_normal_cdf(double x) noexcept {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

void YieldAdjustedInputs::validate() const {
    if (!(S > 0.0)) throw DomainError("spot S must be positive");
    if (!(K > 0.0)) throw DomainError("strike K must be positive");
    if (!(tau >= 0.0)) throw DomainError("time to maturity tau must be >= 0");
    if (!(sigma > 0.0)) throw DomainError("volatility sigma must be positive");
}

double effective_yield(const MarketSpec& spec, const SharpeParams& sharpe, Side side,
                       PayoffKind payoff_kind) {
    if (!spec.is_constant())
        throw UnsupportedError("closed-form yield requires constant coefficients");
    if (payoff_kind == PayoffKind::custom)
        throw UnsupportedError("closed-form yield is defined for puts and calls only");
    const double sig = spec.sigma.constant_value();
    const double mt = mu_tilde(spec, 1.0, 1.0);
    const double s = payoff_kind == PayoffKind::put ? 1.0 : -1.0;
    const double loading = signed_loading(sharpe, side);
    return spec.r - mt + s * loading * std::sqrt(1.0 - spec.rho * spec.rho) * sig;
}

namespace {

struct DTerms {
    double d1;  // ln(S/K) + (r - delta + sigma^2/2) tau, scaled
    double d2;  // ln(S/K) + (r - delta - sigma^2/2) tau, scaled
};

DTerms d_terms(const YieldAdjustedInputs& in) {
    const double vol = in.sigma * std::sqrt(in.tau);
    const double m = std::log(in.S / in.K) + (in.r - in.delta) * in.tau;
    return {(m + 0.5 * vol * vol) / vol, (m - 0.5 * vol * vol) / vol};
}

bool degenerate(const YieldAdjustedInputs& in) { return in.sigma * std::sqrt(in.tau) < 1e-12; }

}  // namespace

double bs_put_yield(const YieldAdjustedInputs& in) {
    in.validate();
    const double dk = in.K * std::exp(-in.r * in.tau);
    const double ds = in.S * std::exp(-in.delta * in.tau);
    if (in.tau == 0.0) return std::max(in.K - in.S, 0.0);
    if (degenerate(in)) return std::max(dk - ds, 0.0);
    const auto d = d_terms(in);
    // d- = -d2 and d~- = -d1 in the put's notation
    return dk * std_normal_cdf(-d.d2) - ds * std_normal_cdf(-d.d1);
}

double bs_call_yield(const YieldAdjustedInputs& in) {
    in.validate();
    const double dk = in.K * std::exp(-in.r * in.tau);
    const double ds = in.S * std::exp(-in.delta * in.tau);
    if (in.tau == 0.0) return std::max(in.S - in.K, 0.0);
    if (degenerate(in)) return std::max(ds - dk, 0.0);
    const auto d = d_terms(in);
    return ds * std_normal_cdf(d.d1) - dk * std_normal_cdf(d.d2);
}

double price_closed_form(const MarketSpec& spec, const Payoff& payoff, const SharpeParams& sharpe,
                         Side side, double S, double tau) {
    if (payoff.kind() == PayoffKind::custom)
        throw UnsupportedError("closed form covers puts and calls; use the PDE or MC route");
    sharpe.validate();
    const YieldAdjustedInputs in{S,
                                 payoff.strike(),
                                 tau,
                                 spec.r,
                                 effective_yield(spec, sharpe, side, payoff.kind()),
                                 spec.sigma.constant_value()};
    const double unit = payoff.kind() == PayoffKind::put ? bs_put_yield(in) : bs_call_yield(in);
    return payoff.scale() * unit;
}

}  // namespace sharpe
