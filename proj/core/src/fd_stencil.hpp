#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace sharpe::detail {

/// Three-point coefficients of D u_zz + v u_z at one node.
struct Stencil3 {
    double lower = 0.0;
    double centre = 0.0;
    double upper = 0.0;

    [[nodiscard]] double apply(double um, double u0, double up) const noexcept {
        return lower * um + centre * u0 + upper * up;
    }
};

/// Central differencing where the off-diagonals stay nonnegative after
/// reserving `reserve` for the cross-term stencil, first-order upwind
/// otherwise.
[[nodiscard]] inline Stencil3 convection_diffusion(double D, double v, double dz,
                                                   double reserve = 0.0) noexcept {
    const double diff = D / (dz * dz);
    if (diff - reserve >= std::abs(v) / (2.0 * dz))
        return {diff - v / (2.0 * dz), -2.0 * diff, diff + v / (2.0 * dz)};
    if (v > 0.0) return {diff, -2.0 * diff - v / dz, diff + v / dz};
    return {diff - v / dz, -2.0 * diff + v / dz, diff};
}

/// In-place Thomas algorithm; `lower[0]` and `upper[n-1]` are ignored.
inline void thomas_solve(std::vector<double> lower, std::vector<double> diag,
                         const std::vector<double>& upper, std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = lower[i] / diag[i - 1];
        diag[i] -= m * upper[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

[[nodiscard]] inline double sup_abs(const std::vector<double>& v) noexcept {
    double m = 0.0;
    for (double e : v) m = std::max(m, std::abs(e));
    return m;
}

[[nodiscard]] inline double sup_diff(const std::vector<double>& a,
                                     const std::vector<double>& b) noexcept {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace sharpe::detail
