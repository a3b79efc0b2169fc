#pragma once

#include "sharpe/hedge.hpp"
#include "sharpe/model.hpp"
#include "sharpe/montecarlo.hpp"
#include "sharpe/pde.hpp"
#include "sharpe/statics.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <variant>

namespace sharpe {

// ============================================================================
// JSON schema (see docs/config.md)
// ============================================================================
//
// Readers throw ConfigError naming the offending field path, e.g.
// "model.sigma.values: expected an array of numbers".

using json = nlohmann::json;

/// Bare number, {"kind": "constant", "value"}, {"kind": "tabulated", "grid",
/// "values"} or {"kind": "affine_in_log", "c0", "c1"}.
[[nodiscard]] CoefficientFn coefficient_from_json(const json& j, const std::string& path);
[[nodiscard]] json to_json(const CoefficientFn& f);

[[nodiscard]] MarketSpec market_from_json(const json& j, const std::string& path);
[[nodiscard]] json to_json(const MarketSpec& spec);

[[nodiscard]] StochVolSpec stochvol_from_json(const json& j, const std::string& path);
[[nodiscard]] json to_json(const StochVolSpec& spec);

/// Either model; dispatches on "kind": "basis_risk" (default) or "stochvol".
using ModelSpec = std::variant<MarketSpec, StochVolSpec>;
[[nodiscard]] ModelSpec model_from_json(const json& j, const std::string& path);
[[nodiscard]] json to_json(const ModelSpec& model);

[[nodiscard]] Payoff payoff_from_json(const json& j, const std::string& path);
[[nodiscard]] json to_json(const Payoff& payoff);

/// {"alpha", "beta_buyer"}; "beta" is accepted for beta_buyer.
[[nodiscard]] SharpeParams sharpe_from_json(const json& j, const std::string& path);
[[nodiscard]] json to_json(const SharpeParams& sharpe);

[[nodiscard]] Side side_from_json(const json& j, const std::string& path);

[[nodiscard]] SolverOptions solver_options_from_json(const json& j, const std::string& path);
[[nodiscard]] MCConfig mc_config_from_json(const json& j, const std::string& path);

// ============================================================================
// Results
// ============================================================================

[[nodiscard]] json to_json(const AssumptionReport& report);
[[nodiscard]] json to_json(const SolverReport& report);
[[nodiscard]] json to_json(const MCEstimate& estimate);
[[nodiscard]] json to_json(const GoodDealBounds& bounds);
[[nodiscard]] json to_json(const HedgeReport& report);
[[nodiscard]] json to_json(const SweepResult& sweep);

}  // namespace sharpe
