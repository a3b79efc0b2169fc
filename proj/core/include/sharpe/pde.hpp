#pragma once

#include "sharpe/grid.hpp"
#include "sharpe/model.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sharpe {

// ============================================================================
// Surfaces
// ============================================================================

/// Which pricing equation produced a surface.
enum class EquationTag {
    basis_risk_1d,       ///< H-independent reduction in ln S
    basis_risk_2d,       ///< full equation in (ln S, ln H)
    stochvol_nonlinear,  ///< stochastic volatility with the |P_sigma| loading
    stochvol_linear,     ///< stochastic volatility with a fixed market price of volatility risk
};

/// Meaning of the grid's second axis.
enum class SecondAxis { none, log_h, sigma };

[[nodiscard]] const char* to_string(EquationTag tag) noexcept;
[[nodiscard]] const char* to_string(SecondAxis axis) noexcept;

/// Grid-sampled price P(t, x[, y]). Slice n holds t_n = n T / n_t, so the
/// last slice is the payoff.
struct PriceSurface {
    GridSpec grid;
    std::vector<double> values;  ///< index ((n * n_x) + i) * n_y + j
    Side side = Side::seller;
    EquationTag equation_tag = EquationTag::basis_risk_1d;
    double sharpe_used = 0.0;  ///< signed loading: +alpha seller, -beta buyer
    SecondAxis second_axis = SecondAxis::none;

    [[nodiscard]] int n_x() const noexcept { return grid.x.n; }
    [[nodiscard]] int n_y() const noexcept { return grid.n_y(); }
    [[nodiscard]] int n_t() const noexcept { return grid.n_t; }
    [[nodiscard]] std::size_t slice_size() const noexcept {
        return static_cast<std::size_t>(n_x()) * static_cast<std::size_t>(n_y());
    }
    [[nodiscard]] double at(int n, int i, int j = 0) const {
        return values[(static_cast<std::size_t>(n) * n_x() + i) * n_y() + j];
    }
    [[nodiscard]] std::span<const double> slice(int n) const {
        return {values.data() + static_cast<std::size_t>(n) * slice_size(), slice_size()};
    }
    [[nodiscard]] double time(int n) const noexcept { return grid.T * n / grid.n_t; }

    /// Map a model state to grid coordinates: ln H on log_h surfaces, sigma
    /// on sigma surfaces, ignored on 1-D surfaces.
    [[nodiscard]] double y_coord(double state) const;
    [[nodiscard]] bool inside_hull(double S, double y_state, double t) const noexcept;

    /// Bilinear in (x, y), linear in t; clamps to the hull.
    [[nodiscard]] double value(double S, double y_state, double t) const;
};

/// Price and first/second derivatives at an arbitrary point, bilinearly
/// interpolated from node-wise central differences. P_y is P_H or P_sigma
/// (zero for 1-D surfaces).
struct PointGreeks {
    double P = 0.0;
    double P_S = 0.0;
    double P_SS = 0.0;
    double P_y = 0.0;
};

[[nodiscard]] PointGreeks sample_greeks(const PriceSurface& surface, double S, double y_state,
                                        double t);

/// Node-wise Greeks of one time slice. Entries are NaN on boundary nodes.
struct GreeksField {
    int n_x = 0;
    int n_y = 1;
    std::vector<double> P_S;
    std::vector<double> P_SS;
    std::vector<double> P_y;  ///< P_H or P_sigma

    [[nodiscard]] std::size_t index(int i, int j = 0) const noexcept {
        return static_cast<std::size_t>(i) * n_y + j;
    }
};

/// Central differences in log coordinates mapped back to S:
/// P_S = e^{-x} P_x, P_SS = e^{-2x} (P_xx - P_x); P_H = e^{-y} P_y, P_sigma = P_y.
[[nodiscard]] GreeksField greeks(const PriceSurface& surface, int time_index = 0);

// ============================================================================
// Solvers
// ============================================================================

enum class TimeScheme { implicit_euler, crank_nicolson };

struct SolverOptions {
    TimeScheme scheme = TimeScheme::implicit_euler;
    int rannacher_steps = 2;         ///< implicit start-up steps for Crank-Nicolson
    int max_policy_iterations = 50;
    double tolerance = 1e-10;        ///< sup-norm update tolerance (relative to max(1, |P|))
    /// A node changes control only if the operator value improves by more
    /// than this times sup |P|; stops flip-flopping where P_S or P_sigma is
    /// rounding noise.
    double policy_switch_tol = 1e-12;
    double cross_cfl = 1.0;          ///< dt |rho sigma b| / (dx dy) bound for the explicit cross term
    int max_inner_steps = 1000;
};

struct SolverReport {
    std::vector<int> policy_iterations;  ///< per time step, backward order
    double max_residual = 0.0;
    std::string boundary_scheme;
    std::string cross_term_scheme;
    int factorizations = 0;
    int inner_steps = 1;
};

using SolveResult = std::pair<PriceSurface, SolverReport>;

/// Seller/buyer price when the traded asset's coefficients do not depend on
/// H: one space dimension in x = ln S. The |P_S| loading is solved as an HJB
/// maximum (seller) or minimum (buyer) over h in {-lambda, +lambda} by
/// policy iteration at each implicit step.
[[nodiscard]] SolveResult solve_1d(const MarketSpec& spec, const Payoff& payoff,
                                   const SharpeParams& sharpe, Side side, const GridSpec& grid,
                                   const SolverOptions& options = {});

/// Full two-factor solve in (ln S, ln H). Requires |rho| < 1.
[[nodiscard]] SolveResult solve_2d(const MarketSpec& spec, const Payoff& payoff,
                                   const SharpeParams& sharpe, Side side, const GridSpec& grid,
                                   const SolverOptions& options = {});

/// Stochastic-volatility price with the |P_sigma| loading, in (ln S, sigma).
[[nodiscard]] SolveResult solve_stochvol_nonlinear(const StochVolSpec& spec, const Payoff& payoff,
                                                   const SharpeParams& sharpe, Side side,
                                                   const GridSpec& grid,
                                                   const SolverOptions& options = {});

/// Linear stochastic-volatility price with factor drift gamma(sigma, t, alpha_signed).
[[nodiscard]] SolveResult solve_stochvol_linear(const StochVolSpec& spec, const Payoff& payoff,
                                                double alpha_signed, const GridSpec& grid,
                                                const SolverOptions& options = {});

// ============================================================================
// Serialization
// ============================================================================

/// CSV with header t,S,value / t,S,H,value / t,S,sigma,value.
void write_surface_csv(const PriceSurface& surface, std::ostream& out);
void write_surface_binary(const PriceSurface& surface, std::ostream& out);
/// Throws ConfigError on a bad magic number, version or truncated stream.
[[nodiscard]] PriceSurface read_surface_binary(std::istream& in);

}  // namespace sharpe
