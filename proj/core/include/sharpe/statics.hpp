#pragma once

#include "sharpe/model.hpp"
#include "sharpe/montecarlo.hpp"
#include "sharpe/pde.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace sharpe {

// ============================================================================
// Comparative statics
// ============================================================================

enum class SweepAxis { alpha, rho, mu, sigma, a, b };

/// Price columns of a sweep: buyer (loading -beta), alpha0 (no loading) and
/// seller (loading +alpha).
enum class SweepColumn { buyer, alpha0, seller };

/// Expected response of one price column between two neighbouring sweep points.
enum class Direction { increasing, decreasing, constant, none };

[[nodiscard]] const char* to_string(SweepAxis axis) noexcept;
[[nodiscard]] const char* to_string(SweepColumn column) noexcept;
[[nodiscard]] const char* to_string(Direction direction) noexcept;
/// Throws ConfigError for unknown names.
[[nodiscard]] SweepAxis parse_sweep_axis(const std::string& name);

/// Sign information about a price function: delta_sign is +1 when P_S >= -tol
/// everywhere, -1 when P_S <= tol everywhere, 0 otherwise; convex when
/// P_SS >= -tol everywhere.
struct ShapeHypothesis {
    int delta_sign = 0;
    bool convex = false;
};

/// Shape read off a solved surface from discrete Greeks at every interior
/// node of every time slice whose S lies in [S_min, S_max]. The default
/// window is the whole grid; the zero-curvature condition in ln S bends a
/// call concave near the upper edge, so sweeps pass a central window.
/// Convexity allows tol + dx^2 |P_S| / S for the log-grid differencing.
[[nodiscard]] ShapeHypothesis surface_shape(const PriceSurface& surface, double tol = 1e-8,
                                            double S_min = 0.0,
                                            double S_max = std::numeric_limits<double>::infinity());

/// Shape implied by the payoff alone for the two-GBM closed forms: the
/// payoff's monotonicity carries over to P_S, and puts and calls are convex.
[[nodiscard]] ShapeHypothesis closed_form_shape(const Payoff& payoff);

/// Model and Sharpe ratios at one sweep point.
struct SweepPoint {
    MarketSpec spec;
    SharpeParams sharpe;
    double value = 0.0;
};

/// Direction the comparison results predict for `column` when moving from
/// `lower` to `upper` along `axis` (the axis value of upper is not smaller).
/// `shape` must hold for at least one of the two price functions of the
/// column. Returns Direction::none when no hypothesis applies. On the alpha
/// axis the seller uses alpha = value and the buyer beta = value.
[[nodiscard]] Direction expected_direction(SweepAxis axis, SweepColumn column,
                                           const SweepPoint& lower, const SweepPoint& upper,
                                           const ShapeHypothesis& shape);

// ============================================================================
// Parameter sweeps
// ============================================================================

enum class SweepMethod { closed_form, pde };

struct SweepOptions {
    SweepMethod method = SweepMethod::closed_form;
    BoundsResolution resolution;  ///< grid for the pde method
    double tolerance = 1e-8;      ///< slack for ordering and monotonicity checks
    int n_threads = 0;            ///< 0: hardware concurrency
};

struct SweepRow {
    double value = 0.0;
    double buyer = 0.0;
    double alpha0 = 0.0;
    double seller = 0.0;
    ShapeHypothesis shape[3];  ///< per column, buyer / alpha0 / seller
    Direction expected[3] = {Direction::none, Direction::none, Direction::none};
    /// "ok", or "fail:" followed by the violated checks. Checks cover the
    /// buyer <= alpha0 <= seller ordering and, from the second row on, the
    /// expected move of each column from the previous row.
    std::string verdict;
};

struct SweepResult {
    SweepAxis axis = SweepAxis::alpha;
    SweepMethod method = SweepMethod::closed_form;
    std::vector<SweepRow> rows;

    [[nodiscard]] bool all_ok() const noexcept;
};

/// Evenly spaced values lo..hi (n_points >= 1; a single point uses lo).
/// Throws ConfigError on hi < lo or non-positive counts.
[[nodiscard]] std::vector<double> sweep_values(double lo, double hi, int n_points);

/// Prices buyer, alpha0 and seller columns at S0 (H-independent constant
/// model) for each axis value. Points are evaluated in parallel and rows come
/// back in axis order. Axis values violating model invariants (|rho| > 1,
/// non-positive volatility, negative Sharpe ratio) throw ConfigError.
[[nodiscard]] SweepResult run_sweep(const MarketSpec& base, const Payoff& payoff,
                                    const SharpeParams& sharpe, SweepAxis axis,
                                    const std::vector<double>& values, double S0, double T,
                                    const SweepOptions& options = {});

}  // namespace sharpe
