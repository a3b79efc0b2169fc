#include "sharpe/cli/app.hpp"

#include "sharpe/analytic.hpp"
#include "sharpe/error.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace sharpe::cli {

namespace {

// ============================================================================
// Config parsing helpers
// ============================================================================

void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) throw ConfigError((path.empty() ? "" : path + ".") + it.key() + ": unknown field");
    }
}

double num(const json& j, const std::string& path, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    const std::string p = path.empty() ? key : path + "." + key;
    if (!v.is_number() || !std::isfinite(v.get<double>()))
        throw ConfigError(p + ": expected a finite number");
    return v.get<double>();
}

int integer(const json& j, const std::string& path, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer())
        throw ConfigError(path + "." + key + ": expected an integer");
    return v.get<int>();
}

std::string str(const json& j, const std::string& path, const char* key) {
    const json& v = j.at(key);
    if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
    return v.get<std::string>();
}

GridOptions parse_grid(const json& j) {
    check_keys(j, "grid", {"n_x", "n_y", "n_t", "half_width", "y_min", "y_max", "sample_nodes"});
    GridOptions g;
    g.n_x = integer(j, "grid", "n_x", g.n_x);
    g.n_y = integer(j, "grid", "n_y", g.n_y);
    g.n_t = integer(j, "grid", "n_t", g.n_t);
    g.half_width = num(j, "grid", "half_width", g.half_width);
    if (j.contains("y_min")) g.y_min = num(j, "grid", "y_min", 0.0);
    if (j.contains("y_max")) g.y_max = num(j, "grid", "y_max", 0.0);
    g.sample_nodes = integer(j, "grid", "sample_nodes", g.sample_nodes);
    if (g.n_x < 3 || g.n_y < 3 || g.n_t < 1 || g.sample_nodes < 2)
        throw ConfigError("grid: need n_x, n_y >= 3, n_t >= 1 and sample_nodes >= 2");
    if (g.half_width < 0.0) throw ConfigError("grid.half_width: must be >= 0");
    if (g.y_min.has_value() != g.y_max.has_value())
        throw ConfigError("grid: give both y_min and y_max or neither");
    if (g.y_min && !(*g.y_min < *g.y_max)) throw ConfigError("grid: y_min must be below y_max");
    return g;
}

SweepOptionsConfig parse_sweep(const json& j) {
    check_keys(j, "sweep", {"axis", "lo", "hi", "n_points", "method"});
    SweepOptionsConfig s;
    if (!j.contains("axis")) throw ConfigError("sweep.axis: missing field");
    try {
        s.axis = parse_sweep_axis(str(j, "sweep", "axis"));
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("sweep.axis: ") + e.what());
    }
    if (!j.contains("lo") || !j.contains("hi")) throw ConfigError("sweep: lo and hi are required");
    s.lo = num(j, "sweep", "lo", 0.0);
    s.hi = num(j, "sweep", "hi", 0.0);
    s.n_points = integer(j, "sweep", "n_points", s.n_points);
    if (s.n_points < 1) throw ConfigError("sweep.n_points: must be >= 1");
    if (s.hi < s.lo) throw ConfigError("sweep: hi must not be below lo");
    if (j.contains("method")) {
        const std::string m = str(j, "sweep", "method");
        if (m == "closed_form")
            s.method = SweepMethod::closed_form;
        else if (m == "pde")
            s.method = SweepMethod::pde;
        else
            throw ConfigError("sweep.method: expected closed_form or pde");
    }
    return s;
}

// ============================================================================
// Output helpers
// ============================================================================

const MarketSpec& basis_model(const RunConfig& c, const char* command) {
    if (const auto* m = std::get_if<MarketSpec>(&c.model)) return *m;
    throw UnsupportedError(std::string(command) + " needs a basis_risk model");
}

const Payoff& require_payoff(const RunConfig& c) {
    if (!c.payoff) throw ConfigError("payoff: missing field");
    return *c.payoff;
}

json parameters(const RunConfig& c) {
    json p = {{"model", to_json(c.model)},
              {"sharpe", to_json(c.sharpe)},
              {"S0", c.S0},
              {"T", c.T}};
    if (c.payoff) p["payoff"] = to_json(*c.payoff);
    if (std::holds_alternative<MarketSpec>(c.model))
        p["H0"] = c.H0;
    else
        p["sigma0"] = c.sigma0;
    return p;
}

std::string csv_line(std::initializer_list<std::string> cells) {
    std::string line;
    bool first = true;
    for (const auto& c : cells) {
        if (!first) line += ',';
        line += c;
        first = false;
    }
    return line + "\n";
}

BoundsResolution resolution(const RunConfig& c) {
    BoundsResolution r;
    r.n_x = c.grid.n_x;
    r.n_y = c.grid.n_y;
    r.n_t = c.grid.n_t;
    r.half_width = c.grid.half_width;
    r.mc = c.mc;
    r.solver = c.solver;
    return r;
}

GridSpec stochvol_grid(const RunConfig& c, const StochVolSpec& spec) {
    if (!c.grid.y_min)
        throw ConfigError("grid.y_min: sigma range is required for stochvol models");
    GridSpec g;
    const double vol = spec.beta_fn(*c.grid.y_max);
    const double w =
        c.grid.half_width > 0.0 ? c.grid.half_width : std::max(1.5, 8.0 * vol * std::sqrt(c.T));
    g.x = Axis{std::log(c.S0) - w, std::log(c.S0) + w, c.grid.n_x};
    g.y = Axis{*c.grid.y_min, *c.grid.y_max, c.grid.n_y};
    g.n_t = c.grid.n_t;
    g.T = c.T;
    return g;
}

struct Solved {
    SolveResult result;
    double price = 0.0;
    std::string method;
};

Solved solve_surface(const RunConfig& c) {
    const Payoff& payoff = require_payoff(c);
    if (!(c.T > 0.0)) throw ConfigError("T: must be > 0 for a PDE solve");
    if (const auto* sv = std::get_if<StochVolSpec>(&c.model)) {
        const GridSpec g = stochvol_grid(c, *sv);
        Solved s{solve_stochvol_nonlinear(*sv, payoff, c.sharpe, c.side, g, c.solver), 0.0,
                 "pde-stochvol"};
        s.price = s.result.first.value(c.S0, c.sigma0, 0.0);
        return s;
    }
    const MarketSpec& m = std::get<MarketSpec>(c.model);
    const bool two_d = !m.h_independent();
    const GridSpec g = pricing_grid(m, c.S0, c.H0, c.T, c.grid.n_x, c.grid.n_y, c.grid.n_t,
                                    c.grid.half_width, two_d);
    Solved s{two_d ? solve_2d(m, payoff, c.sharpe, c.side, g, c.solver)
                   : solve_1d(m, payoff, c.sharpe, c.side, g, c.solver),
             0.0, two_d ? "pde-2d" : "pde-1d"};
    s.price = s.result.first.value(c.S0, c.H0, 0.0);
    return s;
}

}  // namespace

// ============================================================================
// Config
// ============================================================================

RunConfig parse_config(const json& j) {
    check_keys(j, "",
               {"model", "payoff", "sharpe", "side", "S0", "H0", "sigma0", "T", "grid", "solver",
                "mc", "sweep", "bounds"});
    if (!j.contains("model")) throw ConfigError("model: missing field");
    RunConfig c;
    c.model = model_from_json(j.at("model"), "model");
    if (j.contains("payoff")) c.payoff = payoff_from_json(j.at("payoff"), "payoff");
    if (j.contains("sharpe")) c.sharpe = sharpe_from_json(j.at("sharpe"), "sharpe");
    if (j.contains("side")) c.side = side_from_json(j.at("side"), "side");
    c.S0 = num(j, "", "S0", c.S0);
    c.H0 = num(j, "", "H0", c.H0);
    c.sigma0 = num(j, "", "sigma0", c.sigma0);
    c.T = num(j, "", "T", c.T);
    if (!(c.S0 > 0.0)) throw ConfigError("S0: must be > 0");
    if (!(c.H0 > 0.0)) throw ConfigError("H0: must be > 0");
    if (!(c.sigma0 > 0.0)) throw ConfigError("sigma0: must be > 0");
    if (!(c.T >= 0.0)) throw ConfigError("T: must be >= 0");
    if (j.contains("grid")) c.grid = parse_grid(j.at("grid"));
    if (j.contains("solver")) c.solver = solver_options_from_json(j.at("solver"), "solver");
    if (j.contains("mc")) c.mc = mc_config_from_json(j.at("mc"), "mc");
    if (j.contains("sweep")) c.sweep = parse_sweep(j.at("sweep"));
    if (j.contains("bounds")) {
        const json& b = j.at("bounds");
        check_keys(b, "bounds", {"method"});
        if (b.contains("method")) {
            const std::string m = str(b, "bounds", "method");
            if (m == "pde")
                c.bounds_method = BoundsMethod::pde;
            else if (m == "mc")
                c.bounds_method = BoundsMethod::mc;
            else
                throw ConfigError("bounds.method: expected pde or mc");
        }
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(j);
}

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// ============================================================================
// Commands
// ============================================================================

CommandOutput cmd_price(const RunConfig& c) {
    const Payoff& payoff = require_payoff(c);
    json rec = {{"command", "price"}, {"side", to_string(c.side)}};
    std::optional<double> delta;
    if (c.T == 0.0) {
        rec["price"] = payoff(c.S0);
        rec["method"] = "terminal";
    } else if (const auto* m = std::get_if<MarketSpec>(&c.model);
               m && m->is_constant() && payoff.kind() != PayoffKind::custom) {
        rec["price"] = price_closed_form(*m, payoff, c.sharpe, c.side, c.S0, c.T);
        rec["method"] = "closed-form";
        delta = effective_yield(*m, c.sharpe, c.side, payoff.kind());
        rec["delta_yield"] = *delta;
    } else {
        const Solved s = solve_surface(c);
        rec["price"] = s.price;
        rec["method"] = s.method;
        rec["notice"] = "closed form unavailable for this model or payoff; solved with " + s.method;
    }
    rec["parameters"] = parameters(c);
    CommandOutput out;
    out.csv = csv_line({"price", "method", "delta_yield", "side"}) +
              csv_line({format_number(rec["price"].get<double>()), rec["method"].get<std::string>(),
                        delta ? format_number(*delta) : std::string(), to_string(c.side)});
    out.record = std::move(rec);
    return out;
}

CommandOutput cmd_sweep(const RunConfig& c) {
    if (!c.sweep) throw ConfigError("sweep: missing field");
    const MarketSpec& m = basis_model(c, "sweep");
    const Payoff& payoff = require_payoff(c);
    SweepOptions opts;
    opts.method = c.sweep->method.value_or(payoff.kind() == PayoffKind::custom
                                               ? SweepMethod::pde
                                               : SweepMethod::closed_form);
    opts.resolution = resolution(c);
    opts.n_threads = c.mc.n_threads;
    const auto values = sweep_values(c.sweep->lo, c.sweep->hi, c.sweep->n_points);
    const SweepResult result = run_sweep(m, payoff, c.sharpe, c.sweep->axis, values, c.S0, c.T, opts);

    CommandOutput out;
    out.record = to_json(result);
    out.record["command"] = "sweep";
    out.record["parameters"] = parameters(c);
    out.csv = csv_line({"axis", "value", "buyer", "alpha0", "seller", "verdict"});
    for (const auto& row : result.rows)
        out.csv += csv_line({to_string(result.axis), format_number(row.value),
                             format_number(row.buyer), format_number(row.alpha0),
                             format_number(row.seller), row.verdict});
    return out;
}

CommandOutput cmd_bounds(const RunConfig& c) {
    const MarketSpec& m = basis_model(c, "bounds");
    const GoodDealBounds b = good_deal_bounds(m, require_payoff(c), c.sharpe.alpha, c.sharpe.beta,
                                              c.bounds_method, resolution(c), c.S0, c.H0, c.T);
    CommandOutput out;
    out.record = to_json(b);
    out.record["command"] = "bounds";
    out.record["parameters"] = parameters(c);
    out.csv = csv_line({"lower", "upper", "lower_std_error", "upper_std_error", "method"}) +
              csv_line({format_number(b.lower), format_number(b.upper),
                        format_number(b.lower_std_error), format_number(b.upper_std_error),
                        to_string(b.method)});
    return out;
}

CommandOutput cmd_solve(const RunConfig& c) {
    const Solved s = solve_surface(c);
    const PriceSurface& surf = s.result.first;
    json xs = json::array();
    for (int i = 0; i < surf.n_x(); ++i) xs.push_back(surf.grid.x.node(i));
    json ys = json::array();
    if (surf.grid.y)
        for (int j = 0; j < surf.n_y(); ++j) ys.push_back(surf.grid.y->node(j));
    const auto slice = surf.slice(0);
    CommandOutput out;
    out.record = {{"command", "solve"},
                  {"method", s.method},
                  {"equation", to_string(surf.equation_tag)},
                  {"second_axis", to_string(surf.second_axis)},
                  {"side", to_string(surf.side)},
                  {"sharpe_used", surf.sharpe_used},
                  {"price", s.price},
                  {"report", to_json(s.result.second)},
                  {"x", xs},
                  {"y", ys},
                  {"initial_values", std::vector<double>(slice.begin(), slice.end())},
                  {"parameters", parameters(c)}};
    std::ostringstream csv;
    write_surface_csv(surf, csv);
    out.csv = csv.str();
    return out;
}

CommandOutput cmd_mc(const RunConfig& c) {
    const Payoff& payoff = require_payoff(c);
    if (!(c.T > 0.0)) throw ConfigError("T: must be > 0 for Monte Carlo");
    MCEstimate e;
    if (const auto* sv = std::get_if<StochVolSpec>(&c.model))
        e = price_stochvol_mc(*sv, payoff, signed_loading(c.sharpe, c.side), c.mc, c.S0, c.sigma0,
                              c.T);
    else
        e = price_mc(std::get<MarketSpec>(c.model), payoff, c.sharpe, c.side, c.mc, c.S0, c.H0,
                     c.T);
    CommandOutput out;
    out.record = to_json(e);
    out.record["command"] = "mc";
    out.record["side"] = to_string(c.side);
    out.record["scheme"] = to_string(c.mc.scheme);
    out.record["parameters"] = parameters(c);
    out.csv = csv_line({"mean", "std_error", "n_paths", "seed", "measure"}) +
              csv_line({format_number(e.mean), format_number(e.std_error),
                        std::to_string(e.n_paths), std::to_string(e.seed), describe(e.measure)});
    return out;
}

CommandOutput cmd_hedge(const RunConfig& c) {
    const Solved s = solve_surface(c);
    const Payoff& payoff = *c.payoff;
    HedgeReport r;
    if (const auto* sv = std::get_if<StochVolSpec>(&c.model))
        r = simulate_hedged_portfolio(*sv, payoff, c.sharpe, c.side, s.result.first, c.mc, c.S0,
                                      c.sigma0);
    else
        r = simulate_hedged_portfolio(std::get<MarketSpec>(c.model), payoff, c.sharpe, c.side,
                                      s.result.first, c.mc, c.S0, c.H0);
    CommandOutput out;
    out.record = to_json(r);
    out.record["command"] = "hedge";
    out.record["price"] = s.price;
    out.record["price_method"] = s.method;
    out.record["side"] = to_string(c.side);
    out.record["parameters"] = parameters(c);
    std::ostringstream csv;
    write_step_csv(r, csv);
    out.csv = csv.str();
    return out;
}

CommandOutput cmd_validate(const RunConfig& c) {
    const int n = c.grid.sample_nodes;
    AssumptionReport report;
    if (const auto* sv = std::get_if<StochVolSpec>(&c.model)) {
        GridSpec g = stochvol_grid(c, *sv);
        g.x.n = n;
        g.y->n = n;
        report = validate_assumptions(*sv, g, c.payoff);
    } else {
        const MarketSpec& m = std::get<MarketSpec>(c.model);
        const GridSpec g =
            pricing_grid(m, c.S0, c.H0, c.T > 0.0 ? c.T : 1.0, n, n, 1, c.grid.half_width, true);
        report = validate_assumptions(m, g, c.payoff);
    }
    CommandOutput out;
    out.record = to_json(report);
    out.record["command"] = "validate";
    out.record["parameters"] = parameters(c);
    out.csv = csv_line({"name", "estimate", "threshold", "bound", "pass"});
    for (const auto& e : report.entries)
        out.csv += csv_line({e.name, format_number(e.estimate), format_number(e.threshold),
                             e.upper_bound ? "upper" : "lower", e.pass ? "true" : "false"});
    return out;
}

// ============================================================================
// Entry point
// ============================================================================

json error_record(const std::exception& e) {
    const char* type = "error";
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const CLI::Error*>(&e))
        type = "config";
    else if (dynamic_cast<const DegenerateEllipticityError*>(&e))
        type = "degenerate_ellipticity";
    else if (dynamic_cast<const DomainError*>(&e))
        type = "domain";
    else if (dynamic_cast<const UnsupportedError*>(&e))
        type = "unsupported";
    else if (dynamic_cast<const SolverError*>(&e))
        type = "solver";
    json err = {{"type", type}, {"message", e.what()}};
    if (const auto* s = dynamic_cast<const SolverError*>(&e)) {
        err["residual"] = s->residual();
        err["iterations"] = s->iterations();
    }
    return {{"error", err}};
}

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const CLI::Error*>(&e)) return 2;
    if (dynamic_cast<const DomainError*>(&e) || dynamic_cast<const UnsupportedError*>(&e)) return 3;
    if (dynamic_cast<const SolverError*>(&e)) return 4;
    return 1;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Instantaneous-Sharpe-ratio option pricing and hedging"};
    app.require_subcommand(1);
    std::string config_path;
    std::string out_path;
    std::string format = "json";
    std::optional<std::uint64_t> seed;

    using Command = CommandOutput (*)(const RunConfig&);
    const std::pair<const char*, Command> commands[] = {
        {"price", cmd_price}, {"sweep", cmd_sweep}, {"bounds", cmd_bounds}, {"solve", cmd_solve},
        {"mc", cmd_mc},       {"hedge", cmd_hedge}, {"validate", cmd_validate}};
    const char* descriptions[] = {
        "closed-form or PDE price at the spot",
        "buyer / alpha0 / seller prices along one parameter axis",
        "good-deal bid/ask interval",
        "full PDE price surface",
        "Monte Carlo price under the pricing measure",
        "hedged-portfolio simulation",
        "numeric check of the model's regularity assumptions"};
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < std::size(commands); ++i) {
        CLI::App* sub = app.add_subcommand(commands[i].first, descriptions[i]);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_path, "output file (default: stdout)");
        sub->add_option("--format", format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", seed, "overrides mc.seed");
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << error_record(e).dump() << "\n";
        return 2;
    }

    try {
        RunConfig config = load_config(config_path);
        if (seed) config.mc.seed = *seed;
        CommandOutput result;
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i]->parsed()) result = commands[i].second(config);
        const std::string text =
            format == "csv" ? result.csv : result.record.dump(2) + "\n";
        if (out_path.empty()) {
            out << text;
        } else {
            std::ofstream file(out_path, std::ios::binary);
            if (!file) throw ConfigError("cannot open output file '" + out_path + "'");
            file << text;
        }
        return 0;
    } catch (const std::exception& e) {
        err << error_record(e).dump() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace sharpe::cli
