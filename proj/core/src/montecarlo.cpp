#include "sharpe/montecarlo.hpp"

#include "sharpe/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <thread>

namespace sharpe {

// ============================================================================
// PathRng
// ============================================================================

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace

PathRng::PathRng(std::uint64_t seed, std::uint64_t stream) noexcept
    : state_(mix64(mix64(seed) + kGolden * (stream + 1))) {}

PathRng::result_type PathRng::operator()() noexcept {
    state_ += kGolden;
    return mix64(state_);
}

double PathRng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        // 53-bit uniforms on (-1, 1)
        u = static_cast<double>((*this)() >> 11) * 0x1.0p-52 - 1.0;
        v = static_cast<double>((*this)() >> 11) * 0x1.0p-52 - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

// ============================================================================
// Config and tags
// ============================================================================

void MCConfig::validate() const {
    if (n_paths < 1) throw ConfigError("mc.n_paths must be >= 1");
    if (n_steps < 1) throw ConfigError("mc.n_steps must be >= 1");
    if (antithetic && n_paths % 2 != 0)
        throw ConfigError("mc.n_paths must be even when antithetic sampling is on");
    if (n_threads < 0) throw ConfigError("mc.n_threads must be >= 0");
}

const char* to_string(MCScheme scheme) noexcept {
    return scheme == MCScheme::euler_log ? "euler-log" : "exact-gbm";
}

const char* to_string(BoundsMethod method) noexcept {
    return method == BoundsMethod::pde ? "pde" : "mc";
}

std::string describe(const MeasureTag& measure) {
    char buf[64];
    if (std::holds_alternative<Physical>(measure)) return "physical";
    if (std::holds_alternative<MinimalMartingale>(measure)) return "minimal_martingale";
    if (const auto* p = std::get_if<PHat>(&measure)) {
        std::snprintf(buf, sizeof buf, "p_hat(%.17g)", p->signed_alpha);
        return buf;
    }
    if (const auto* p = std::get_if<StochVolBar>(&measure)) {
        std::snprintf(buf, sizeof buf, "stochvol_bar(%.17g)", p->signed_alpha);
        return buf;
    }
    const auto& c = std::get<Controlled>(measure);
    std::snprintf(buf, sizeof buf, "controlled(%.17g)", c.loading);
    return buf;
}

// ============================================================================
// Parallel driver
// ============================================================================

namespace {

constexpr std::int64_t kChunk = 4096;

struct RunningStats {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    void merge(const RunningStats& o) noexcept {
        if (o.n == 0) return;
        if (n == 0) {
            *this = o;
            return;
        }
        const double total = static_cast<double>(n + o.n);
        const double d = o.mean - mean;
        mean += d * static_cast<double>(o.n) / total;
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / total;
        n += o.n;
    }
    [[nodiscard]] double std_error() const noexcept {
        if (n < 2) return 0.0;
        return std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
    }
};

int thread_count(int requested, std::int64_t chunks) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    n = std::max(n, 1);
    return static_cast<int>(std::min<std::int64_t>(n, std::max<std::int64_t>(chunks, 1)));
}

/// Runs body(chunk_index, begin, end) over fixed chunks of [0, n_units).
/// Chunk boundaries do not depend on the thread count.
template <class Body>
void for_chunks(std::int64_t n_units, int requested_threads, Body&& body) {
    const std::int64_t chunks = (n_units + kChunk - 1) / kChunk;
    const int threads = thread_count(requested_threads, chunks);
    auto work = [&](int tid) {
        for (std::int64_t c = tid; c < chunks; c += threads)
            body(c, c * kChunk, std::min(n_units, (c + 1) * kChunk));
    };
    if (threads == 1) {
        work(0);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads - 1);
    for (int t = 1; t < threads; ++t) pool.emplace_back(work, t);
    work(0);
    for (auto& th : pool) th.join();
}

/// Mean and standard error of value(unit) over n_units, merged in chunk order.
template <class ValueFn>
RunningStats reduce_units(std::int64_t n_units, int requested_threads, ValueFn&& value) {
    const std::int64_t chunks = (n_units + kChunk - 1) / kChunk;
    std::vector<RunningStats> partial(static_cast<std::size_t>(chunks));
    for_chunks(n_units, requested_threads, [&](std::int64_t c, std::int64_t b, std::int64_t e) {
        RunningStats s;
        for (std::int64_t u = b; u < e; ++u) s.add(value(u));
        partial[static_cast<std::size_t>(c)] = s;
    });
    RunningStats total;
    for (const auto& p : partial) total.merge(p);
    return total;
}

// ============================================================================
// Path kernels
// ============================================================================

double sign_of(double v) noexcept { return (v > 0.0) - (v < 0.0); }

class PairKernel {
public:
    PairKernel(const MarketSpec& spec, const MeasureTag& measure, const MCConfig& config,
               double T)
        : spec_(spec), measure_(measure), n_steps_(config.n_steps), dt_(T / config.n_steps),
          sqdt_(std::sqrt(dt_)), rho_(spec.rho), rho_bar_(std::sqrt(1.0 - spec.rho * spec.rho)) {
        if (std::holds_alternative<StochVolBar>(measure))
            throw ConfigError("stochvol_bar applies to stochastic-volatility paths only");
        if (const auto* c = std::get_if<Controlled>(&measure); c && !c->delta_sign)
            throw ConfigError("controlled measure needs a delta-sign function");
    }

    /// Advances (ln S, ln H) one step from time t with normals (z1, z2).
    void step(double& x, double& y, double t, double z1, double z2) const {
        const double S = std::exp(x);
        const double H = std::exp(y);
        const double sig = spec_.sigma(S, t);
        const double bb = spec_.b(H, t);
        double mS = 0.0;
        double mH = spec_.r;
        if (std::holds_alternative<Physical>(measure_)) {
            mS = spec_.mu(S, t);
            mH = spec_.a(H, t);
        } else if (std::holds_alternative<MinimalMartingale>(measure_)) {
            mS = mu_tilde(spec_, S, H, t);
        } else if (const auto* p = std::get_if<PHat>(&measure_)) {
            mS = mu_tilde(spec_, S, H, t) + p->signed_alpha * rho_bar_ * sig;
        } else {
            const auto& c = std::get<Controlled>(measure_);
            const double h = c.loading * sign_of(c.delta_sign(S, H, t));
            mS = mu_tilde(spec_, S, H, t) + h * rho_bar_ * sig;
        }
        x += (mS - 0.5 * sig * sig) * dt_ + sig * sqdt_ * (rho_ * z1 + rho_bar_ * z2);
        y += (mH - 0.5 * bb * bb) * dt_ + bb * sqdt_ * z1;
    }

    /// Simulates one path; sink(k, S, H) sees every time index 0..n_steps.
    template <class Sink>
    void run(PathRng& rng, double sgn, double S0, double H0, Sink&& sink) const {
        double x = std::log(S0);
        double y = std::log(H0);
        sink(0, S0, H0);
        for (int k = 0; k < n_steps_; ++k) {
            const double z1 = sgn * rng.normal();
            const double z2 = sgn * rng.normal();
            step(x, y, k * dt_, z1, z2);
            sink(k + 1, std::exp(x), std::exp(y));
        }
    }

    [[nodiscard]] double terminal_s(PathRng& rng, double sgn, double S0, double H0) const {
        double x = std::log(S0);
        double y = std::log(H0);
        for (int k = 0; k < n_steps_; ++k) {
            const double z1 = sgn * rng.normal();
            const double z2 = sgn * rng.normal();
            step(x, y, k * dt_, z1, z2);
        }
        return std::exp(x);
    }

private:
    const MarketSpec& spec_;
    const MeasureTag& measure_;
    int n_steps_;
    double dt_;
    double sqdt_;
    double rho_;
    double rho_bar_;
};

class StochVolKernel {
public:
    StochVolKernel(const StochVolSpec& spec, const MeasureTag& measure, const MCConfig& config,
                   double T)
        : spec_(spec), n_steps_(config.n_steps), dt_(T / config.n_steps), sqdt_(std::sqrt(dt_)),
          rho_(spec.rho), rho_bar_(std::sqrt(1.0 - spec.rho * spec.rho)) {
        if (std::holds_alternative<Physical>(measure)) {
            physical_ = true;
        } else if (const auto* p = std::get_if<StochVolBar>(&measure)) {
            alpha_signed_ = p->signed_alpha;
        } else {
            throw ConfigError("stochastic-volatility paths take the physical or stochvol_bar measure");
        }
    }

    /// Advances (ln S, sigma); returns |sigma drift| * dt for the stability check.
    double step(double& x, double& s, double t, double z1, double z2) const {
        const double be = spec_.beta_fn(s, t);
        if (!(be > 0.0)) throw DomainError("beta(sigma) must be positive along the path");
        const double bb = spec_.b(s, t);
        const double mS = physical_ ? spec_.mu : spec_.r;
        const double ms = physical_ ? spec_.a(s, t) : spec_.gamma(s, t, alpha_signed_);
        x += (mS - 0.5 * be * be) * dt_ + be * sqdt_ * (rho_ * z1 + rho_bar_ * z2);
        s += ms * dt_ + bb * sqdt_ * z1;
        return std::abs(ms) * dt_;
    }

    template <class Sink>
    double run(PathRng& rng, double sgn, double S0, double sigma0, Sink&& sink) const {
        double x = std::log(S0);
        double s = sigma0;
        double worst = 0.0;
        sink(0, S0, sigma0);
        for (int k = 0; k < n_steps_; ++k) {
            const double z1 = sgn * rng.normal();
            const double z2 = sgn * rng.normal();
            worst = std::max(worst, step(x, s, k * dt_, z1, z2));
            sink(k + 1, std::exp(x), s);
        }
        return worst;
    }

private:
    const StochVolSpec& spec_;
    int n_steps_;
    double dt_;
    double sqdt_;
    double rho_;
    double rho_bar_;
    bool physical_ = false;
    double alpha_signed_ = 0.0;
};

void check_pair_inputs(const MarketSpec& spec, const MCConfig& config, double S0, double H0,
                       double T) {
    spec.validate();
    config.validate();
    if (!(S0 > 0.0) || !(H0 > 0.0)) throw DomainError("S0 and H0 must be positive");
    if (!(T > 0.0)) throw ConfigError("maturity T must be positive");
    if (config.scheme == MCScheme::exact_gbm && !spec.is_constant())
        throw ConfigError("exact-gbm scheme requires constant coefficients");
}

/// Stream index and antithetic sign of a path.
std::pair<std::uint64_t, double> stream_of(std::int64_t path, bool antithetic) {
    if (!antithetic) return {static_cast<std::uint64_t>(path), 1.0};
    return {static_cast<std::uint64_t>(path / 2), path % 2 == 0 ? 1.0 : -1.0};
}

template <class Kernel>
PathEnsemble fill_ensemble(const Kernel& kernel, const MCConfig& config, double S0, double Y0,
                           double T) {
    PathEnsemble e;
    e.n_paths = config.n_paths;
    e.n_steps = config.n_steps;
    e.T = T;
    const std::size_t stride = static_cast<std::size_t>(config.n_steps) + 1;
    e.S.resize(static_cast<std::size_t>(config.n_paths) * stride);
    e.H.resize(e.S.size());
    for_chunks(config.n_paths, config.n_threads, [&](std::int64_t, std::int64_t b, std::int64_t en) {
        for (std::int64_t p = b; p < en; ++p) {
            const auto [stream, sgn] = stream_of(p, config.antithetic);
            PathRng rng(config.seed, stream);
            const std::size_t base = static_cast<std::size_t>(p) * stride;
            kernel.run(rng, sgn, S0, Y0, [&](int k, double s, double y) {
                e.S[base + k] = s;
                e.H[base + k] = y;
            });
        }
    });
    return e;
}

/// Discounted payoff statistics; antithetic pairs are averaged first.
template <class TerminalFn>
RunningStats discounted_stats(const MCConfig& config, double discount, const Payoff& payoff,
                              TerminalFn&& terminal) {
    if (!config.antithetic) {
        return reduce_units(config.n_paths, config.n_threads, [&](std::int64_t p) {
            PathRng rng(config.seed, static_cast<std::uint64_t>(p));
            return discount * payoff(terminal(rng, 1.0));
        });
    }
    return reduce_units(config.n_paths / 2, config.n_threads, [&](std::int64_t k) {
        PathRng up(config.seed, static_cast<std::uint64_t>(k));
        PathRng down(config.seed, static_cast<std::uint64_t>(k));
        const double a = payoff(terminal(up, 1.0));
        const double b = payoff(terminal(down, -1.0));
        return discount * 0.5 * (a + b);
    });
}

}  // namespace

// ============================================================================
// Public API
// ============================================================================

PathEnsemble simulate_pair(const MarketSpec& spec, const MeasureTag& measure,
                           const MCConfig& config, double S0, double H0, double T) {
    check_pair_inputs(spec, config, S0, H0, T);
    const PairKernel kernel(spec, measure, config, T);
    return fill_ensemble(kernel, config, S0, H0, T);
}

PathEnsemble simulate_stochvol(const StochVolSpec& spec, const MeasureTag& measure,
                               const MCConfig& config, double S0, double sigma0, double T) {
    spec.validate();
    config.validate();
    if (!(S0 > 0.0)) throw DomainError("S0 must be positive");
    if (!(T > 0.0)) throw ConfigError("maturity T must be positive");
    if (config.scheme == MCScheme::exact_gbm)
        throw ConfigError("exact-gbm scheme is not available for stochastic volatility");
    const StochVolKernel kernel(spec, measure, config, T);
    return fill_ensemble(kernel, config, S0, sigma0, T);
}

void write_terminal_csv(const PathEnsemble& paths, std::ostream& out) {
    out << "path,S_T,H_T\n";
    char buf[96];
    for (std::int64_t p = 0; p < paths.n_paths; ++p) {
        std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g\n", static_cast<long long>(p),
                      paths.s(p, paths.n_steps), paths.h(p, paths.n_steps));
        out << buf;
    }
}

MCEstimate price_under(const MarketSpec& spec, const Payoff& payoff, const MeasureTag& measure,
                       const MCConfig& config, double S0, double H0, double T) {
    check_pair_inputs(spec, config, S0, H0, T);
    const PairKernel kernel(spec, measure, config, T);
    const RunningStats st =
        discounted_stats(config, std::exp(-spec.r * T), payoff, [&](PathRng& rng, double sgn) {
            return kernel.terminal_s(rng, sgn, S0, H0);
        });
    MCEstimate est;
    est.mean = st.mean;
    est.std_error = st.std_error();
    est.n_paths = config.n_paths;
    est.seed = config.seed;
    est.measure = measure;
    return est;
}

MCEstimate price_mc(const MarketSpec& spec, const Payoff& payoff, const SharpeParams& sharpe,
                    Side side, const MCConfig& config, double S0, double H0, double T) {
    sharpe.validate();
    const int mono = payoff.monotonicity();
    if (mono == 0)
        throw UnsupportedError(
            "price_mc needs a monotone payoff; use good_deal_bounds with the PDE method");
    if (!spec.s_independent())
        throw UnsupportedError(
            "price_mc requires mu and sigma independent of S; use the PDE route");
    // sign(P_S) follows the payoff's monotonicity; a non-decreasing payoff
    // (call-like) takes +lambda for the seller
    const double loading = signed_loading(sharpe, side);
    const double signed_alpha = mono > 0 ? loading : -loading;
    return price_under(spec, payoff, PHat{signed_alpha}, config, S0, H0, T);
}

MCEstimate price_stochvol_mc(const StochVolSpec& spec, const Payoff& payoff, double alpha_signed,
                             const MCConfig& config, double S0, double sigma0, double T) {
    spec.validate();
    config.validate();
    if (!(S0 > 0.0)) throw DomainError("S0 must be positive");
    if (!(T > 0.0)) throw ConfigError("maturity T must be positive");
    if (config.scheme == MCScheme::exact_gbm)
        throw ConfigError("exact-gbm scheme is not available for stochastic volatility");
    const MeasureTag measure = StochVolBar{alpha_signed};
    const StochVolKernel kernel(spec, measure, config, T);

    const std::int64_t chunks = (config.n_paths + kChunk - 1) / kChunk;
    std::vector<double> worst(static_cast<std::size_t>(chunks), 0.0);
    auto terminal = [&](PathRng& rng, double sgn, double& w) {
        double sT = S0;
        w = std::max(w, kernel.run(rng, sgn, S0, sigma0, [&](int k, double s, double) {
            if (k == config.n_steps) sT = s;
        }));
        return sT;
    };
    const double disc = std::exp(-spec.r * T);
    const std::int64_t units = config.antithetic ? config.n_paths / 2 : config.n_paths;
    std::vector<RunningStats> partial(static_cast<std::size_t>((units + kChunk - 1) / kChunk));
    for_chunks(units, config.n_threads, [&](std::int64_t c, std::int64_t b, std::int64_t e) {
        RunningStats s;
        double w = 0.0;
        for (std::int64_t u = b; u < e; ++u) {
            if (!config.antithetic) {
                PathRng rng(config.seed, static_cast<std::uint64_t>(u));
                s.add(disc * payoff(terminal(rng, 1.0, w)));
            } else {
                PathRng up(config.seed, static_cast<std::uint64_t>(u));
                PathRng down(config.seed, static_cast<std::uint64_t>(u));
                const double a = payoff(terminal(up, 1.0, w));
                const double d = payoff(terminal(down, -1.0, w));
                s.add(disc * 0.5 * (a + d));
            }
        }
        partial[static_cast<std::size_t>(c)] = s;
        worst[static_cast<std::size_t>(c)] = w;
    });
    RunningStats total;
    for (const auto& p : partial) total.merge(p);

    MCEstimate est;
    est.mean = total.mean;
    est.std_error = total.std_error();
    est.n_paths = config.n_paths;
    est.seed = config.seed;
    est.measure = measure;
    const double w = *std::max_element(worst.begin(), worst.end());
    if (w > 1.0) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "max |sigma drift| * dt = %.3g exceeds 1; increase n_steps", w);
        est.warnings.emplace_back(buf);
    }
    return est;
}

// ============================================================================
// Good-deal bounds
// ============================================================================

GridSpec pricing_grid(const MarketSpec& spec, double S0, double H0, double T, int n_x, int n_y,
                      int n_t, double half_width, bool with_h_axis) {
    if (!(S0 > 0.0) || !(H0 > 0.0)) throw DomainError("S0 and H0 must be positive");
    auto width = [&](double vol) {
        return half_width > 0.0 ? half_width : std::max(1.5, 8.0 * vol * std::sqrt(T));
    };
    GridSpec g;
    const double wx = width(spec.sigma(S0));
    g.x = Axis{std::log(S0) - wx, std::log(S0) + wx, n_x};
    if (with_h_axis) {
        const double wy = width(spec.b(H0));
        g.y = Axis{std::log(H0) - wy, std::log(H0) + wy, n_y};
    }
    g.n_t = n_t;
    g.T = T;
    return g;
}

namespace {

PriceSurface solve_for(const MarketSpec& spec, const Payoff& payoff, const SharpeParams& sharpe,
                       Side side, const GridSpec& grid, const SolverOptions& options) {
    if (grid.two_d()) return solve_2d(spec, payoff, sharpe, side, grid, options).first;
    return solve_1d(spec, payoff, sharpe, side, grid, options).first;
}

}  // namespace

double price_pde(const MarketSpec& spec, const Payoff& payoff, const SharpeParams& sharpe,
                 Side side, double S0, double H0, double T, const BoundsResolution& resolution) {
    const bool two_d = !spec.h_independent();
    const GridSpec grid = pricing_grid(spec, S0, H0, T, resolution.n_x, resolution.n_y,
                                       resolution.n_t, resolution.half_width, two_d);
    return solve_for(spec, payoff, sharpe, side, grid, resolution.solver).value(S0, H0, 0.0);
}

GoodDealBounds good_deal_bounds(const MarketSpec& spec, const Payoff& payoff, double alpha,
                                double beta, BoundsMethod method,
                                const BoundsResolution& resolution, double S0, double H0,
                                double T) {
    const SharpeParams sharpe{alpha, beta};
    sharpe.validate();
    GoodDealBounds out;
    out.method = method;
    if (method == BoundsMethod::pde) {
        out.upper = price_pde(spec, payoff, sharpe, Side::seller, S0, H0, T, resolution);
        out.lower = price_pde(spec, payoff, sharpe, Side::buyer, S0, H0, T, resolution);
    } else {
        const bool two_d = !spec.h_independent();
        const int m = resolution.sign_grid;
        const GridSpec coarse =
            pricing_grid(spec, S0, H0, T, m, m, m - 1, resolution.half_width, two_d);
        auto controlled = [&](Side side) {
            auto surface = std::make_shared<PriceSurface>(
                solve_for(spec, payoff, sharpe, side, coarse, resolution.solver));
            DeltaSignFn fn = [surface](double S, double H, double t) {
                return sign_of(sample_greeks(*surface, S, H, t).P_S);
            };
            return Controlled{signed_loading(sharpe, side), std::move(fn)};
        };
        // common random numbers: both sides reuse the configured seed
        const MCEstimate up =
            price_under(spec, payoff, controlled(Side::seller), resolution.mc, S0, H0, T);
        const MCEstimate lo =
            price_under(spec, payoff, controlled(Side::buyer), resolution.mc, S0, H0, T);
        out.upper = up.mean;
        out.lower = lo.mean;
        out.upper_std_error = up.std_error;
        out.lower_std_error = lo.std_error;
    }
    if (out.lower > out.upper) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "lower bound exceeds upper bound by %.3g",
                      out.lower - out.upper);
        out.warnings.emplace_back(buf);
    }
    return out;
}

}  // namespace sharpe
