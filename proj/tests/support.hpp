#pragma once

#include "sharpe/model.hpp"

#include <cmath>

namespace sharpe::test {

// Two-GBM parameter set used across the suites.
inline constexpr double kS = 100.0;
inline constexpr double kK = 100.0;
inline constexpr double kT = 1.0;
inline constexpr double kR = 0.05;
inline constexpr double kSigma = 0.2;
inline constexpr double kA = 0.077;
inline constexpr double kB = 0.3;
inline constexpr double kMu = 0.07;
inline constexpr double kRho = 0.9;
inline constexpr double kAlpha = 0.2;

inline MarketSpec base_spec() { return MarketSpec::constant(kMu, kSigma, kA, kB, kRho, kR); }
inline SharpeParams base_sharpe() { return {kAlpha, kAlpha}; }

inline GridSpec log_grid(int n_x, int n_t, double half_width = 2.5, double T = kT) {
    return GridSpec::centred_1d(kS, half_width, n_x, n_t, T);
}

/// Bounded mean-reverting volatility factor: beta(sigma) = sigma on
/// [0.1, 0.4], d sigma = 2 (0.2 - sigma) dt + b(sigma) dW with b vanishing at
/// both edges so sigma stays inside the band, rho = -0.3.
inline StochVolSpec mean_reverting_vol() {
    StochVolSpec s;
    s.mu = 0.08;
    s.beta_fn = CoefficientFn::tabulated({0.1, 0.4}, {0.1, 0.4});
    s.a = CoefficientFn::tabulated({0.1, 0.4}, {0.2, -0.4});
    s.b = CoefficientFn::tabulated({0.1, 0.15, 0.3, 0.4}, {0.0, 0.15, 0.15, 0.0});
    s.rho = -0.3;
    s.r = 0.05;
    return s;
}

inline GridSpec vol_grid(int n_x, int n_y, int n_t, double half_width = 2.5, double T = kT) {
    GridSpec g = GridSpec::centred_1d(kS, half_width, n_x, n_t, T);
    g.y = Axis{0.1, 0.4, n_y};
    return g;
}

}  // namespace sharpe::test
