#include "sharpe/json_io.hpp"

#include "sharpe/error.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>

namespace sharpe {

namespace {

// ============================================================================
// Field readers
// ============================================================================

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
}

void allow_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) throw ConfigError(join(path, it.key()) + ": unknown field");
    }
}

const json& field(const json& j, const std::string& path, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(join(path, key) + ": missing field");
    return *it;
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path + ": must be finite");
    return x;
}

double number(const json& j, const std::string& path, const char* key) {
    return as_number(field(j, path, key), join(path, key));
}

double number_or(const json& j, const std::string& path, const char* key, double fallback) {
    return j.contains(key) ? number(j, path, key) : fallback;
}

std::int64_t integer_or(const json& j, const std::string& path, const char* key,
                        std::int64_t fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(join(path, key) + ": expected an integer");
    return v.get<std::int64_t>();
}

int int_or(const json& j, const std::string& path, const char* key, int fallback) {
    const std::int64_t v = integer_or(j, path, key, fallback);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw ConfigError(join(path, key) + ": out of range");
    return static_cast<int>(v);
}

bool bool_or(const json& j, const std::string& path, const char* key, bool fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) throw ConfigError(join(path, key) + ": expected true or false");
    return v.get<bool>();
}

std::string string_field(const json& j, const std::string& path, const char* key) {
    const json& v = field(j, path, key);
    if (!v.is_string()) throw ConfigError(join(path, key) + ": expected a string");
    return v.get<std::string>();
}

std::vector<double> number_array(const json& j, const std::string& path, const char* key) {
    const json& v = field(j, path, key);
    const std::string p = join(path, key);
    if (!v.is_array() || v.empty()) throw ConfigError(p + ": expected a non-empty array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(as_number(v[i], p + "[" + std::to_string(i) + "]"));
    return out;
}

/// Re-throws construction errors with the field path attached.
template <class F>
auto with_path(const std::string& path, F&& make) {
    try {
        return make();
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

}  // namespace

// ============================================================================
// Models
// ============================================================================

CoefficientFn coefficient_from_json(const json& j, const std::string& path) {
    if (j.is_number()) return CoefficientFn::constant(as_number(j, path));
    require_object(j, path);
    const std::string kind = string_field(j, path, "kind");
    if (kind == "constant") {
        allow_keys(j, path, {"kind", "value"});
        return CoefficientFn::constant(number(j, path, "value"));
    }
    if (kind == "tabulated") {
        allow_keys(j, path, {"kind", "grid", "values"});
        auto grid = number_array(j, path, "grid");
        auto values = number_array(j, path, "values");
        return with_path(path, [&] {
            return CoefficientFn::tabulated(std::move(grid), std::move(values));
        });
    }
    if (kind == "affine_in_log" || kind == "affine-in-log") {
        allow_keys(j, path, {"kind", "c0", "c1"});
        return CoefficientFn::affine_in_log(number(j, path, "c0"), number(j, path, "c1"));
    }
    throw ConfigError(join(path, "kind") + ": unknown coefficient kind '" + kind +
                      "' (constant, tabulated, affine_in_log)");
}

json to_json(const CoefficientFn& f) {
    return std::visit(
        [](const auto& k) -> json {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, CoefficientFn::Constant>)
                return {{"kind", "constant"}, {"value", k.value}};
            else if constexpr (std::is_same_v<K, CoefficientFn::Tabulated>)
                return {{"kind", "tabulated"}, {"grid", k.grid}, {"values", k.values}};
            else
                return {{"kind", "affine_in_log"}, {"c0", k.c0}, {"c1", k.c1}};
        },
        f.kind());
}

MarketSpec market_from_json(const json& j, const std::string& path) {
    require_object(j, path);
    allow_keys(j, path, {"kind", "mu", "sigma", "a", "b", "rho", "r"});
    MarketSpec s;
    s.mu = coefficient_from_json(field(j, path, "mu"), join(path, "mu"));
    s.sigma = coefficient_from_json(field(j, path, "sigma"), join(path, "sigma"));
    s.a = coefficient_from_json(field(j, path, "a"), join(path, "a"));
    s.b = coefficient_from_json(field(j, path, "b"), join(path, "b"));
    s.rho = number(j, path, "rho");
    s.r = number(j, path, "r");
    with_path(path, [&] {
        s.validate();
        return 0;
    });
    return s;
}

json to_json(const MarketSpec& spec) {
    return {{"kind", "basis_risk"},   {"mu", to_json(spec.mu)}, {"sigma", to_json(spec.sigma)},
            {"a", to_json(spec.a)},   {"b", to_json(spec.b)},   {"rho", spec.rho},
            {"r", spec.r}};
}

StochVolSpec stochvol_from_json(const json& j, const std::string& path) {
    require_object(j, path);
    allow_keys(j, path, {"kind", "mu", "beta_fn", "a", "b", "rho", "r"});
    StochVolSpec s;
    s.mu = number(j, path, "mu");
    s.beta_fn = coefficient_from_json(field(j, path, "beta_fn"), join(path, "beta_fn"));
    s.a = coefficient_from_json(field(j, path, "a"), join(path, "a"));
    s.b = coefficient_from_json(field(j, path, "b"), join(path, "b"));
    s.rho = number(j, path, "rho");
    s.r = number(j, path, "r");
    with_path(path, [&] {
        s.validate();
        return 0;
    });
    return s;
}

json to_json(const StochVolSpec& spec) {
    return {{"kind", "stochvol"},       {"mu", spec.mu},        {"beta_fn", to_json(spec.beta_fn)},
            {"a", to_json(spec.a)},     {"b", to_json(spec.b)}, {"rho", spec.rho},
            {"r", spec.r}};
}

ModelSpec model_from_json(const json& j, const std::string& path) {
    require_object(j, path);
    const std::string kind = j.contains("kind") ? string_field(j, path, "kind") : "basis_risk";
    if (kind == "basis_risk") return market_from_json(j, path);
    if (kind == "stochvol") return stochvol_from_json(j, path);
    throw ConfigError(join(path, "kind") + ": unknown model kind '" + kind +
                      "' (basis_risk, stochvol)");
}

json to_json(const ModelSpec& model) {
    return std::visit([](const auto& m) { return to_json(m); }, model);
}

Payoff payoff_from_json(const json& j, const std::string& path) {
    require_object(j, path);
    const std::string kind = string_field(j, path, "kind");
    const double scale = number_or(j, path, "scale", 1.0);
    if (kind == "put" || kind == "call") {
        allow_keys(j, path, {"kind", "strike", "scale"});
        const double K = number(j, path, "strike");
        return with_path(path, [&] {
            return kind == "put" ? Payoff::put(K, scale) : Payoff::call(K, scale);
        });
    }
    if (kind == "custom") {
        allow_keys(j, path, {"kind", "log_s", "values", "scale"});
        auto grid = number_array(j, path, "log_s");
        auto values = number_array(j, path, "values");
        return with_path(path, [&] {
            return Payoff::custom(std::move(grid), std::move(values), scale);
        });
    }
    throw ConfigError(join(path, "kind") + ": unknown payoff kind '" + kind +
                      "' (put, call, custom)");
}

json to_json(const Payoff& payoff) {
    json j = {{"kind", to_string(payoff.kind())}};
    if (payoff.kind() == PayoffKind::custom) {
        j["log_s"] = payoff.log_grid();
        j["values"] = payoff.values();
    } else {
        j["strike"] = payoff.strike();
    }
    j["scale"] = payoff.scale();
    return j;
}

SharpeParams sharpe_from_json(const json& j, const std::string& path) {
    require_object(j, path);
    allow_keys(j, path, {"alpha", "beta_buyer", "beta"});
    if (j.contains("beta") && j.contains("beta_buyer"))
        throw ConfigError(path + ": give either beta_buyer or beta, not both");
    SharpeParams s;
    s.alpha = number_or(j, path, "alpha", 0.0);
    s.beta = j.contains("beta") ? number(j, path, "beta") : number_or(j, path, "beta_buyer", 0.0);
    with_path(path, [&] {
        s.validate();
        return 0;
    });
    return s;
}

json to_json(const SharpeParams& sharpe) {
    return {{"alpha", sharpe.alpha}, {"beta_buyer", sharpe.beta}};
}

Side side_from_json(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path + ": expected \"seller\" or \"buyer\"");
    const auto s = j.get<std::string>();
    if (s == "seller") return Side::seller;
    if (s == "buyer") return Side::buyer;
    throw ConfigError(path + ": expected \"seller\" or \"buyer\", got '" + s + "'");
}

// ============================================================================
// Numerical options
// ============================================================================

SolverOptions solver_options_from_json(const json& j, const std::string& path) {
    require_object(j, path);
    allow_keys(j, path,
               {"scheme", "rannacher_steps", "max_policy_iterations", "tolerance",
                "policy_switch_tol", "cross_cfl", "max_inner_steps"});
    SolverOptions o;
    if (j.contains("scheme")) {
        const std::string s = string_field(j, path, "scheme");
        if (s == "implicit_euler")
            o.scheme = TimeScheme::implicit_euler;
        else if (s == "crank_nicolson")
            o.scheme = TimeScheme::crank_nicolson;
        else
            throw ConfigError(join(path, "scheme") +
                              ": expected implicit_euler or crank_nicolson");
    }
    o.rannacher_steps = int_or(j, path, "rannacher_steps", o.rannacher_steps);
    o.max_policy_iterations = int_or(j, path, "max_policy_iterations", o.max_policy_iterations);
    o.tolerance = number_or(j, path, "tolerance", o.tolerance);
    o.policy_switch_tol = number_or(j, path, "policy_switch_tol", o.policy_switch_tol);
    o.cross_cfl = number_or(j, path, "cross_cfl", o.cross_cfl);
    o.max_inner_steps = int_or(j, path, "max_inner_steps", o.max_inner_steps);
    return o;
}

MCConfig mc_config_from_json(const json& j, const std::string& path) {
    require_object(j, path);
    allow_keys(j, path, {"n_paths", "n_steps", "seed", "scheme", "antithetic", "n_threads"});
    MCConfig c;
    c.n_paths = integer_or(j, path, "n_paths", c.n_paths);
    c.n_steps = int_or(j, path, "n_steps", c.n_steps);
    if (j.contains("seed")) {
        const json& v = j.at("seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            throw ConfigError(join(path, "seed") + ": expected a non-negative integer");
        c.seed = v.get<std::uint64_t>();
    }
    if (j.contains("scheme")) {
        const std::string s = string_field(j, path, "scheme");
        if (s == "euler_log")
            c.scheme = MCScheme::euler_log;
        else if (s == "exact_gbm")
            c.scheme = MCScheme::exact_gbm;
        else
            throw ConfigError(join(path, "scheme") + ": expected euler_log or exact_gbm");
    }
    c.antithetic = bool_or(j, path, "antithetic", c.antithetic);
    c.n_threads = int_or(j, path, "n_threads", c.n_threads);
    with_path(path, [&] {
        c.validate();
        return 0;
    });
    return c;
}

// ============================================================================
// Results
// ============================================================================

json to_json(const AssumptionReport& report) {
    json entries = json::array();
    for (const auto& e : report.entries)
        entries.push_back({{"name", e.name},
                           {"estimate", e.estimate},
                           {"threshold", e.threshold},
                           {"bound", e.upper_bound ? "upper" : "lower"},
                           {"pass", e.pass}});
    return {{"all_pass", report.all_pass()}, {"entries", entries}};
}

json to_json(const SolverReport& report) {
    int max_iter = 0;
    long total = 0;
    for (int n : report.policy_iterations) {
        max_iter = std::max(max_iter, n);
        total += n;
    }
    return {{"policy_iterations", report.policy_iterations},
            {"max_policy_iterations", max_iter},
            {"total_policy_iterations", total},
            {"max_residual", report.max_residual},
            {"boundary_scheme", report.boundary_scheme},
            {"cross_term_scheme", report.cross_term_scheme},
            {"factorizations", report.factorizations},
            {"inner_steps", report.inner_steps}};
}

json to_json(const MCEstimate& e) {
    return {{"mean", e.mean},       {"std_error", e.std_error},
            {"n_paths", e.n_paths}, {"seed", e.seed},
            {"measure", describe(e.measure)}, {"warnings", e.warnings}};
}

json to_json(const GoodDealBounds& b) {
    return {{"lower", b.lower},
            {"upper", b.upper},
            {"lower_std_error", b.lower_std_error},
            {"upper_std_error", b.upper_std_error},
            {"method", to_string(b.method)},
            {"warnings", b.warnings}};
}

json to_json(const HedgeReport& r) {
    json steps = json::array();
    for (const auto& s : r.steps)
        steps.push_back({{"t", s.t}, {"drift_excess", s.drift_excess}, {"local_std", s.local_std}});
    return {{"realized_drift_excess", r.realized_drift_excess},
            {"realized_local_std", r.realized_local_std},
            {"realized_sharpe", r.realized_sharpe},
            {"realized_sharpe_std_error", r.realized_sharpe_std_error},
            {"rms_local_std", r.rms_local_std},
            {"predicted_local_std", r.predicted_local_std},
            {"pathwise_sharpe", r.pathwise_sharpe},
            {"target_sharpe", r.target_sharpe},
            {"n_rebalances", r.n_rebalances},
            {"n_paths", r.n_paths},
            {"seed", r.seed},
            {"terminal_error", {{"mean", r.terminal_error.mean}, {"std", r.terminal_error.std}}},
            {"clamp_fraction", r.clamp_fraction},
            {"steps", steps},
            {"warnings", r.warnings}};
}

json to_json(const SweepResult& sweep) {
    json rows = json::array();
    for (const auto& row : sweep.rows) {
        json expected = json::object();
        for (int c = 0; c < 3; ++c)
            expected[to_string(static_cast<SweepColumn>(c))] = to_string(row.expected[c]);
        rows.push_back({{"value", row.value},
                        {"buyer", row.buyer},
                        {"alpha0", row.alpha0},
                        {"seller", row.seller},
                        {"expected", expected},
                        {"verdict", row.verdict}});
    }
    return {{"axis", to_string(sweep.axis)},
            {"method", sweep.method == SweepMethod::closed_form ? "closed-form" : "pde-1d"},
            {"all_ok", sweep.all_ok()},
            {"rows", rows}};
}

}  // namespace sharpe
