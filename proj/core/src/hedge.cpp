#include "sharpe/hedge.hpp"

#include "sharpe/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <thread>

namespace sharpe {

// ============================================================================
// Hedge ratios and local risk
// ============================================================================

namespace {

void require_inside(const PriceSurface& surface, double S, double y, double t) {
    if (!surface.inside_hull(S, y, t)) throw DomainError("point lies outside the surface hull");
}

void require_axis(const PriceSurface& surface, bool stochvol) {
    const bool ok = stochvol ? surface.second_axis == SecondAxis::sigma
                             : surface.second_axis != SecondAxis::sigma;
    if (!ok)
        throw ConfigError(stochvol ? "stochastic-volatility hedging needs a sigma surface"
                                   : "basis-risk hedging needs an S or (S, H) surface");
}

double basis_ratio(const PointGreeks& g, const MarketSpec& spec, double S, double H, double t) {
    const double sig = spec.sigma(S, t);
    const double bb = spec.b(H, t);
    if (!(bb > 0.0)) throw DomainError("b must be positive");
    return g.P_y + spec.rho * (sig / bb) * (S / H) * g.P_S;
}

double stochvol_ratio(const PointGreeks& g, const StochVolSpec& spec, double S, double s,
                      double t) {
    const double be = spec.beta_fn(s, t);
    if (!(be > 0.0)) throw DomainError("beta(sigma) must be positive");
    return g.P_S + spec.rho * spec.b(s, t) / (be * S) * g.P_y;
}

double basis_risk(const PointGreeks& g, const MarketSpec& spec, double S, double t) {
    return std::sqrt(1.0 - spec.rho * spec.rho) * spec.sigma(S, t) * S * std::abs(g.P_S);
}

double stochvol_risk(const PointGreeks& g, const StochVolSpec& spec, double s, double t) {
    return std::sqrt(1.0 - spec.rho * spec.rho) * spec.b(s, t) * std::abs(g.P_y);
}

}  // namespace

double hedge_ratio(const PriceSurface& surface, const MarketSpec& spec, double S, double H,
                   double t) {
    require_axis(surface, false);
    require_inside(surface, S, H, t);
    return basis_ratio(sample_greeks(surface, S, H, t), spec, S, H, t);
}

double hedge_ratio_stochvol(const PriceSurface& surface, const StochVolSpec& spec, double S,
                            double sigma, double t) {
    require_axis(surface, true);
    require_inside(surface, S, sigma, t);
    return stochvol_ratio(sample_greeks(surface, S, sigma, t), spec, S, sigma, t);
}

double local_risk(const PriceSurface& surface, const MarketSpec& spec, double S, double H,
                  double t) {
    require_axis(surface, false);
    require_inside(surface, S, H, t);
    return basis_risk(sample_greeks(surface, S, H, t), spec, S, t);
}

double local_risk(const PriceSurface& surface, const StochVolSpec& spec, double S, double sigma,
                  double t) {
    require_axis(surface, true);
    require_inside(surface, S, sigma, t);
    return stochvol_risk(sample_greeks(surface, S, sigma, t), spec, sigma, t);
}

// ============================================================================
// Simulation
// ============================================================================

namespace {

constexpr std::int64_t kChunk = 2048;

/// Physical dynamics plus surface lookups for the basis-risk model.
struct BasisModel {
    const MarketSpec& spec;
    const PriceSurface& surface;
    double rho_bar;

    // state (x, y) = (ln S, ln H)
    void step(double& x, double& y, double t, double dt, double z1, double z2) const {
        const double S = std::exp(x);
        const double H = std::exp(y);
        const double sig = spec.sigma(S, t);
        const double bb = spec.b(H, t);
        const double sq = std::sqrt(dt);
        x += (spec.mu(S, t) - 0.5 * sig * sig) * dt + sig * sq * (spec.rho * z1 + rho_bar * z2);
        y += (spec.a(H, t) - 0.5 * bb * bb) * dt + bb * sq * z1;
    }
    [[nodiscard]] double s_of(double x) const { return std::exp(x); }
    [[nodiscard]] double second_of(double y) const { return std::exp(y); }
    [[nodiscard]] double state_of(double H) const { return std::log(H); }
    [[nodiscard]] double traded(double x, double y) const {
        (void)x;
        return std::exp(y);
    }
    [[nodiscard]] double ratio(const PointGreeks& g, double S, double Y, double t) const {
        return basis_ratio(g, spec, S, Y, t);
    }
    [[nodiscard]] double risk(const PointGreeks& g, double S, double Y, double t) const {
        (void)Y;
        return basis_risk(g, spec, S, t);
    }
    [[nodiscard]] double r() const { return spec.r; }
};

/// Stochastic-volatility model: state (ln S, sigma), traded asset S.
struct StochVolModel {
    const StochVolSpec& spec;
    const PriceSurface& surface;
    double rho_bar;

    void step(double& x, double& s, double t, double dt, double z1, double z2) const {
        const double be = spec.beta_fn(s, t);
        if (!(be > 0.0)) throw DomainError("beta(sigma) must be positive along the path");
        const double bb = spec.b(s, t);
        const double sq = std::sqrt(dt);
        x += (spec.mu - 0.5 * be * be) * dt + be * sq * (spec.rho * z1 + rho_bar * z2);
        s += spec.a(s, t) * dt + bb * sq * z1;
    }
    [[nodiscard]] double s_of(double x) const { return std::exp(x); }
    [[nodiscard]] double second_of(double y) const { return y; }
    [[nodiscard]] double state_of(double sigma) const { return sigma; }
    [[nodiscard]] double traded(double x, double y) const {
        (void)y;
        return std::exp(x);
    }
    [[nodiscard]] double ratio(const PointGreeks& g, double S, double Y, double t) const {
        return stochvol_ratio(g, spec, S, Y, t);
    }
    [[nodiscard]] double risk(const PointGreeks& g, double S, double Y, double t) const {
        (void)S;
        return stochvol_risk(g, spec, Y, t);
    }
    [[nodiscard]] double r() const { return spec.r; }
};

/// Per-chunk accumulators; merged in chunk order for reproducibility.
struct Accum {
    std::vector<double> eps_sum;
    std::vector<double> eps_abs;
    std::vector<double> eps_sq;
    double unit_drift_sum = 0.0;  // per unit (path or antithetic pair) time-summed eps
    double unit_drift_sq = 0.0;
    double risk_sum = 0.0;
    double terminal_sum = 0.0;
    double terminal_sq = 0.0;
    double pathwise_sum = 0.0;
    std::int64_t pathwise_count = 0;
    std::int64_t clamps = 0;

    explicit Accum(int n) : eps_sum(n, 0.0), eps_abs(n, 0.0), eps_sq(n, 0.0) {}
};

struct SimSetup {
    int n_steps = 1;
    int fine_factor = 1;  // fine Brownian steps per rebalance step
    double T = 1.0;
    double sign = 1.0;    // +1 seller (Pi = V - P), -1 buyer (Pi = P - V)
};

int threads_for(int requested, std::int64_t chunks) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    n = std::max(n, 1);
    return static_cast<int>(std::min<std::int64_t>(n, std::max<std::int64_t>(chunks, 1)));
}

template <class Model>
void simulate_path(const Model& m, const Payoff& payoff, const SimSetup& su, PathRng& rng,
                   double sgn, double S0, double Y0, Accum& acc, double& drift_total) {
    const int n = su.n_steps;
    const double dt = su.T / n;
    const double growth = std::exp(m.r() * dt);
    const double inv_sqrt_f = 1.0 / std::sqrt(static_cast<double>(su.fine_factor));
    const PriceSurface& surf = m.surface;

    double x = std::log(S0);
    double y = m.state_of(Y0);

    double V = 0.0;
    double Pi = 0.0;
    double path_sum = 0.0;
    double path_sq = 0.0;
    for (int k = 0; k < n; ++k) {
        const double t = k * dt;
        const double S = m.s_of(x);
        const double Y = m.second_of(y);
        if (!surf.inside_hull(S, Y, t)) ++acc.clamps;
        const PointGreeks g = sample_greeks(surf, S, Y, t);
        if (k == 0) {
            V = g.P;
            Pi = 0.0;
        }
        const double pi = m.ratio(g, S, Y, t);
        acc.risk_sum += m.risk(g, S, Y, t);
        const double traded0 = m.traded(x, y);

        double z1 = 0.0;
        double z2 = 0.0;
        for (int f = 0; f < su.fine_factor; ++f) {
            z1 += rng.normal();
            z2 += rng.normal();
        }
        m.step(x, y, t, dt, sgn * z1 * inv_sqrt_f, sgn * z2 * inv_sqrt_f);

        V = V * growth + pi * (m.traded(x, y) - traded0 * growth);
        double P_next = 0.0;
        if (k + 1 == n) {
            P_next = payoff(m.s_of(x));
        } else {
            const double S1 = m.s_of(x);
            const double Y1 = m.second_of(y);
            P_next = surf.value(S1, Y1, (k + 1) * dt);
        }
        const double Pi_next = su.sign * (V - P_next);
        const double eps = Pi_next - Pi * growth;
        acc.eps_sum[k] += eps;
        acc.eps_abs[k] += std::abs(eps);
        acc.eps_sq[k] += eps * eps;
        path_sum += eps;
        path_sq += eps * eps;
        Pi = Pi_next;
    }
    acc.terminal_sum += Pi;
    acc.terminal_sq += Pi * Pi;
    drift_total += path_sum;
    if (n > 1) {
        const double mean = path_sum / n;
        const double var = (path_sq - n * mean * mean) / (n - 1);
        if (var > 0.0) {
            acc.pathwise_sum += (mean / dt) / std::sqrt(var / dt);
            ++acc.pathwise_count;
        }
    }
}

template <class Model>
HedgeReport run_hedge(const Model& m, const Payoff& payoff, double target, const SimSetup& su,
                      const MCConfig& config, double S0, double Y0) {
    const int n = su.n_steps;
    const double dt = su.T / n;
    const std::int64_t units = config.antithetic ? config.n_paths / 2 : config.n_paths;
    const std::int64_t chunks = (units + kChunk - 1) / kChunk;
    std::vector<Accum> partial(static_cast<std::size_t>(chunks), Accum(n));

    auto body = [&](std::int64_t c) {
        Accum& acc = partial[static_cast<std::size_t>(c)];
        const std::int64_t b = c * kChunk;
        const std::int64_t e = std::min(units, b + kChunk);
        for (std::int64_t u = b; u < e; ++u) {
            double drift = 0.0;
            if (!config.antithetic) {
                PathRng rng(config.seed, static_cast<std::uint64_t>(u));
                simulate_path(m, payoff, su, rng, 1.0, S0, Y0, acc, drift);
            } else {
                PathRng up(config.seed, static_cast<std::uint64_t>(u));
                PathRng down(config.seed, static_cast<std::uint64_t>(u));
                simulate_path(m, payoff, su, up, 1.0, S0, Y0, acc, drift);
                simulate_path(m, payoff, su, down, -1.0, S0, Y0, acc, drift);
                drift *= 0.5;
            }
            acc.unit_drift_sum += drift;
            acc.unit_drift_sq += drift * drift;
        }
    };
    const int threads = threads_for(config.n_threads, chunks);
    if (threads == 1) {
        for (std::int64_t c = 0; c < chunks; ++c) body(c);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&, t] {
                for (std::int64_t c = t; c < chunks; c += threads) body(c);
            });
        for (auto& th : pool) th.join();
    }

    Accum total(n);
    for (const Accum& a : partial) {
        for (int k = 0; k < n; ++k) {
            total.eps_sum[k] += a.eps_sum[k];
            total.eps_abs[k] += a.eps_abs[k];
            total.eps_sq[k] += a.eps_sq[k];
        }
        total.unit_drift_sum += a.unit_drift_sum;
        total.unit_drift_sq += a.unit_drift_sq;
        total.risk_sum += a.risk_sum;
        total.terminal_sum += a.terminal_sum;
        total.terminal_sq += a.terminal_sq;
        total.pathwise_sum += a.pathwise_sum;
        total.pathwise_count += a.pathwise_count;
        total.clamps += a.clamps;
    }

    const double N = static_cast<double>(config.n_paths);
    const double visits = N * n;
    HedgeReport rep;
    rep.n_rebalances = n;
    rep.n_paths = config.n_paths;
    rep.seed = config.seed;
    rep.target_sharpe = su.sign * target;
    rep.steps.resize(n);
    double sum = 0.0;
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    for (int k = 0; k < n; ++k) {
        rep.steps[k].t = k * dt;
        rep.steps[k].drift_excess = total.eps_sum[k] / N / dt;
        rep.steps[k].local_std =
            std::sqrt(std::numbers::pi / 2.0) * total.eps_abs[k] / N / std::sqrt(dt);
        sum += total.eps_sum[k];
        abs_sum += total.eps_abs[k];
        sq_sum += total.eps_sq[k];
    }
    rep.realized_drift_excess = sum / visits / dt;
    rep.realized_local_std = std::sqrt(std::numbers::pi / 2.0) * abs_sum / visits / std::sqrt(dt);
    rep.rms_local_std = std::sqrt(sq_sum / visits / dt);
    rep.predicted_local_std = total.risk_sum / visits;
    rep.realized_sharpe =
        rep.realized_local_std > 0.0 ? rep.realized_drift_excess / rep.realized_local_std : 0.0;

    const double U = static_cast<double>(units);
    const double unit_mean = total.unit_drift_sum / U;
    const double unit_var =
        U > 1.0 ? std::max(0.0, (total.unit_drift_sq - U * unit_mean * unit_mean) / (U - 1.0))
                : 0.0;
    const double drift_se = std::sqrt(unit_var / U) / (n * dt);
    rep.realized_sharpe_std_error =
        rep.realized_local_std > 0.0 ? drift_se / rep.realized_local_std : 0.0;
    rep.pathwise_sharpe = total.pathwise_count > 0
                              ? total.pathwise_sum / static_cast<double>(total.pathwise_count)
                              : 0.0;

    rep.terminal_error.mean = total.terminal_sum / N;
    rep.terminal_error.std =
        N > 1.0 ? std::sqrt(std::max(0.0, (total.terminal_sq - N * rep.terminal_error.mean *
                                                                   rep.terminal_error.mean) /
                                              (N - 1.0)))
                : 0.0;
    rep.clamp_fraction = static_cast<double>(total.clamps) / visits;
    if (rep.clamp_fraction > 0.05) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "%.1f%% of state visits fell outside the surface hull and were clamped",
                      100.0 * rep.clamp_fraction);
        rep.warnings.emplace_back(buf);
    }
    return rep;
}

void check_surface_time(const PriceSurface& surface) {
    if (surface.values.empty()) throw ConfigError("hedge simulation needs a solved surface");
}

}  // namespace

HedgeReport simulate_hedged_portfolio(const MarketSpec& spec, const Payoff& payoff,
                                      const SharpeParams& sharpe, Side side,
                                      const PriceSurface& surface, const MCConfig& config,
                                      double S0, double H0) {
    spec.validate();
    sharpe.validate();
    config.validate();
    require_axis(surface, false);
    check_surface_time(surface);
    if (!(S0 > 0.0) || !(H0 > 0.0)) throw DomainError("S0 and H0 must be positive");
    const BasisModel m{spec, surface, std::sqrt(1.0 - spec.rho * spec.rho)};
    const SimSetup su{config.n_steps, 1, surface.grid.T, side == Side::seller ? 1.0 : -1.0};
    return run_hedge(m, payoff, signed_loading(sharpe, side), su, config, S0, H0);
}

HedgeReport simulate_hedged_portfolio(const StochVolSpec& spec, const Payoff& payoff,
                                      const SharpeParams& sharpe, Side side,
                                      const PriceSurface& surface, const MCConfig& config,
                                      double S0, double sigma0) {
    spec.validate();
    sharpe.validate();
    config.validate();
    require_axis(surface, true);
    check_surface_time(surface);
    if (!(S0 > 0.0)) throw DomainError("S0 must be positive");
    const StochVolModel m{spec, surface, std::sqrt(1.0 - spec.rho * spec.rho)};
    const SimSetup su{config.n_steps, 1, surface.grid.T, side == Side::seller ? 1.0 : -1.0};
    return run_hedge(m, payoff, signed_loading(sharpe, side), su, config, S0, sigma0);
}

std::vector<HedgeTrendPoint> hedge_trend(const MarketSpec& spec, const Payoff& payoff,
                                         const SharpeParams& sharpe, Side side,
                                         const PriceSurface& surface, const MCConfig& config,
                                         const std::vector<int>& step_counts, double S0,
                                         double H0) {
    if (step_counts.empty()) throw ConfigError("hedge trend needs at least one step count");
    const int finest = *std::max_element(step_counts.begin(), step_counts.end());
    for (int n : step_counts)
        if (n < 1 || finest % n != 0)
            throw ConfigError("every step count must divide the largest one");
    spec.validate();
    sharpe.validate();
    require_axis(surface, false);
    check_surface_time(surface);
    const BasisModel m{spec, surface, std::sqrt(1.0 - spec.rho * spec.rho)};
    std::vector<HedgeTrendPoint> out;
    for (int n : step_counts) {
        MCConfig c = config;
        c.n_steps = n;
        c.validate();
        const SimSetup su{n, finest / n, surface.grid.T, side == Side::seller ? 1.0 : -1.0};
        out.push_back({n, run_hedge(m, payoff, signed_loading(sharpe, side), su, c, S0, H0)});
    }
    return out;
}

double one_step_variance(const PriceSurface& surface, const MarketSpec& spec, double S, double H,
                         double t, double dt, double pi, std::int64_t n_samples,
                         std::uint64_t seed) {
    require_axis(surface, false);
    require_inside(surface, S, H, t);
    if (n_samples < 2) throw ConfigError("one_step_variance needs at least 2 samples");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    const BasisModel m{spec, surface, std::sqrt(1.0 - spec.rho * spec.rho)};
    const double P0 = surface.value(S, H, t);
    const double growth = std::exp(spec.r * dt);
    double mean = 0.0;
    double m2 = 0.0;
    for (std::int64_t i = 0; i < n_samples; ++i) {
        PathRng rng(seed, static_cast<std::uint64_t>(i));
        double x = std::log(S);
        double y = std::log(H);
        const double z1 = rng.normal();
        const double z2 = rng.normal();
        m.step(x, y, t, dt, z1, z2);
        const double dV = pi * (std::exp(y) - H * growth);
        const double dPi = dV - (surface.value(std::exp(x), std::exp(y), t + dt) - P0 * growth);
        const double d = dPi - mean;
        mean += d / static_cast<double>(i + 1);
        m2 += d * (dPi - mean);
    }
    return m2 / static_cast<double>(n_samples - 1);
}

void write_step_csv(const HedgeReport& report, std::ostream& out) {
    out << "t,drift_excess,local_std\n";
    char buf[96];
    for (const StepStats& s : report.steps) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.t, s.drift_excess, s.local_std);
        out << buf;
    }
}

}  // namespace sharpe
