#pragma once

#include <optional>

namespace sharpe {

/// Uniform axis [min, max] with n nodes.
struct Axis {
    double min = 0.0;
    double max = 1.0;
    int n = 3;

    [[nodiscard]] double step() const noexcept { return (max - min) / (n - 1); }
    [[nodiscard]] double node(int i) const noexcept {
        // endpoints exact so boundary lookups never drift
        return i == n - 1 ? max : min + i * step();
    }
};

/// Space-time grid for the finite-difference solvers. x is ln S; the optional
/// second axis is ln H (basis-risk model) or sigma (stochastic volatility).
/// Time runs over [0, T] in n_t uniform steps.
struct GridSpec {
    Axis x;
    std::optional<Axis> y;
    int n_t = 1;
    double T = 1.0;

    [[nodiscard]] bool two_d() const noexcept { return y.has_value(); }
    [[nodiscard]] int n_y() const noexcept { return y ? y->n : 1; }
    [[nodiscard]] double dt() const noexcept { return T / n_t; }

    /// Throws ConfigError unless every axis has at least `min_nodes` nodes,
    /// min < max, n_t >= 1 and T > 0.
    void validate(int min_nodes = 3) const;

    /// Convenience: x-axis centred on ln(spot) with half-width `half_width`.
    static GridSpec centred_1d(double spot, double half_width, int n_x, int n_t, double T);
};

}  // namespace sharpe
