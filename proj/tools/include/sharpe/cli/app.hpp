#pragma once

#include "sharpe/json_io.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace sharpe::cli {

// ============================================================================
// Run configuration
// ============================================================================

enum class Format { json, csv };

struct GridOptions {
    int n_x = 401;
    int n_y = 101;
    int n_t = 400;
    double half_width = 0.0;       ///< log-space half-width of the x axis; 0 picks one
    std::optional<double> y_min;   ///< sigma range for stochastic-volatility solves
    std::optional<double> y_max;
    int sample_nodes = 41;         ///< nodes per axis for the assumption validator
};

struct SweepOptionsConfig {
    SweepAxis axis = SweepAxis::alpha;
    double lo = 0.0;
    double hi = 0.0;
    int n_points = 10;
    std::optional<SweepMethod> method;  ///< default: closed form when available
};

/// One run = one JSON file: model, payoff, Sharpe ratios and command options.
struct RunConfig {
    ModelSpec model;
    std::optional<Payoff> payoff;
    SharpeParams sharpe;
    Side side = Side::seller;
    double S0 = 100.0;
    double H0 = 100.0;
    double sigma0 = 0.2;
    double T = 1.0;
    GridOptions grid;
    SolverOptions solver;
    MCConfig mc;
    std::optional<SweepOptionsConfig> sweep;
    BoundsMethod bounds_method = BoundsMethod::pde;
};

/// Throws ConfigError naming the offending field.
[[nodiscard]] RunConfig parse_config(const json& j);
[[nodiscard]] RunConfig load_config(const std::string& path);

// ============================================================================
// Commands
// ============================================================================

/// JSON record plus its CSV rendering (header line included).
struct CommandOutput {
    json record;
    std::string csv;
};

[[nodiscard]] CommandOutput cmd_price(const RunConfig& config);
[[nodiscard]] CommandOutput cmd_sweep(const RunConfig& config);
[[nodiscard]] CommandOutput cmd_bounds(const RunConfig& config);
[[nodiscard]] CommandOutput cmd_solve(const RunConfig& config);
[[nodiscard]] CommandOutput cmd_mc(const RunConfig& config);
[[nodiscard]] CommandOutput cmd_hedge(const RunConfig& config);
[[nodiscard]] CommandOutput cmd_validate(const RunConfig& config);

/// Seventeen significant digits ("%.17g"), enough to round-trip a double.
[[nodiscard]] std::string format_number(double x);

/// Machine-readable error record {"error": {"type", "message"}}.
[[nodiscard]] json error_record(const std::exception& e);

/// Process exit code for an exception: 2 config or usage, 3 domain or
/// unsupported route, 4 solver failure, 1 anything else.
[[nodiscard]] int exit_code_for(const std::exception& e) noexcept;

/// Full command-line entry point. Output goes to --out or `out`; errors are
/// written to `err` as JSON.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sharpe::cli
