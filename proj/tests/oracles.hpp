#pragma once

// Reference values computed without the library: numerical quadrature of the
// normal density and of lognormal payoffs, and Black-Scholes through Boost's
// normal distribution.

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace sharpe::test::oracle {

inline double normal_density(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

/// Phi(x) by adaptive Gauss-Kronrod integration of the density.
inline double normal_cdf_by_integration(double x) {
    using boost::math::quadrature::gauss_kronrod;
    if (x <= 0.0)
        return gauss_kronrod<double, 61>::integrate(normal_density, -std::numeric_limits<double>::infinity(),
                                                    x, 15, 1e-15);
    return 1.0 - gauss_kronrod<double, 61>::integrate(normal_density, x,
                                                      std::numeric_limits<double>::infinity(), 15,
                                                      1e-15);
}

/// e^{-r tau} E[(K - S_T)_+] or E[(S_T - K)_+] with ln S_T normal, drift
/// r - delta, by quadrature over the standard normal variable split at the
/// kink.
inline double lognormal_option(bool call, double S, double K, double tau, double r, double delta,
                               double sigma) {
    using boost::math::quadrature::gauss_kronrod;
    const double m = std::log(S) + (r - delta - 0.5 * sigma * sigma) * tau;
    const double v = sigma * std::sqrt(tau);
    const double z_star = (std::log(K) - m) / v;
    // exponents combined so the tails underflow instead of giving inf * 0
    auto weighted_spot = [&](double z) {
        return std::exp(m + v * z - 0.5 * z * z) / std::sqrt(2.0 * M_PI);
    };
    auto put_integrand = [&](double z) { return K * normal_density(z) - weighted_spot(z); };
    auto call_integrand = [&](double z) { return weighted_spot(z) - K * normal_density(z); };
    const double inf = std::numeric_limits<double>::infinity();
    const double raw =
        call ? gauss_kronrod<double, 61>::integrate(call_integrand, z_star, inf, 15, 1e-14)
             : gauss_kronrod<double, 61>::integrate(put_integrand, -inf, z_star, 15, 1e-14);
    return std::exp(-r * tau) * raw;
}

/// Classical Black-Scholes without a yield.
inline double black_scholes(bool call, double S, double K, double tau, double r, double sigma) {
    const boost::math::normal_distribution<double> n01;
    const double sd = sigma * std::sqrt(tau);
    const double d1 = (std::log(S / K) + (r + 0.5 * sigma * sigma) * tau) / sd;
    const double d2 = d1 - sd;
    if (call) return S * boost::math::cdf(n01, d1) - K * std::exp(-r * tau) * boost::math::cdf(n01, d2);
    return K * std::exp(-r * tau) * boost::math::cdf(n01, -d2) - S * boost::math::cdf(n01, -d1);
}

/// Effective yield recomputed from the raw model parameters:
/// r - (mu - (a - r) rho sigma / b) + s lambda sqrt(1 - rho^2) sigma with s = +1
/// for puts and -1 for calls, lambda = alpha (seller) or -beta (buyer).
inline double yield(bool call, double lambda, double mu, double sigma, double a, double b,
                    double rho, double r) {
    const double mt = mu - (a - r) * rho * sigma / b;
    return r - mt + (call ? -1.0 : 1.0) * lambda * std::sqrt(1.0 - rho * rho) * sigma;
}

}  // namespace sharpe::test::oracle
