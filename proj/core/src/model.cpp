#include "sharpe/model.hpp"

#include "sharpe/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace sharpe {

// ============================================================================
// Grid
// ============================================================================

void GridSpec::validate(int min_nodes) const {
    const auto check_axis = [min_nodes](const Axis& ax, const char* name) {
        if (ax.n < min_nodes)
            throw ConfigError(std::string("grid axis ") + name + " needs at least " +
                              std::to_string(min_nodes) + " nodes");
        if (!(ax.max > ax.min) || !std::isfinite(ax.min) || !std::isfinite(ax.max))
            throw ConfigError(std::string("grid axis ") + name + " must satisfy min < max");
    };
    check_axis(x, "x");
    if (y) check_axis(*y, "y");
    if (n_t < 1) throw ConfigError("grid needs n_t >= 1 time steps");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("grid maturity T must be positive");
}

GridSpec GridSpec::centred_1d(double spot, double half_width, int n_x, int n_t, double T) {
    if (!(spot > 0.0)) throw DomainError("grid centre spot must be positive");
    const double c = std::log(spot);
    return GridSpec{Axis{c - half_width, c + half_width, n_x}, std::nullopt, n_t, T};
}

// ============================================================================
// Market specs
// ============================================================================

namespace {

void check_finite_coefficient(const CoefficientFn& f, const char* name) {
    if (const auto* c = std::get_if<CoefficientFn::Constant>(&f.kind())) {
        if (!std::isfinite(c->value))
            throw ConfigError(std::string("coefficient ") + name + " is not finite");
    }
}

void check_rho_r(double rho, double r) {
    if (!(std::abs(rho) <= 1.0)) throw ConfigError("correlation rho must lie in [-1, 1]");
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("risk-free rate r must be >= 0");
}

}  // namespace

void MarketSpec::validate() const {
    check_finite_coefficient(mu, "mu");
    check_finite_coefficient(sigma, "sigma");
    check_finite_coefficient(a, "a");
    check_finite_coefficient(b, "b");
    check_rho_r(rho, r);
}

bool MarketSpec::is_constant() const noexcept {
    return mu.is_constant() && sigma.is_constant() && a.is_constant() && b.is_constant();
}

bool MarketSpec::h_independent() const noexcept { return a.is_constant() && b.is_constant(); }

bool MarketSpec::s_independent() const noexcept {
    return mu.is_constant() && sigma.is_constant();
}

MarketSpec MarketSpec::constant(double mu, double sigma, double a, double b, double rho,
                                double r) {
    MarketSpec spec{CoefficientFn::constant(mu), CoefficientFn::constant(sigma),
                    CoefficientFn::constant(a), CoefficientFn::constant(b), rho, r};
    spec.validate();
    return spec;
}

double mu_tilde(const MarketSpec& spec, double S, double H, double t) {
    const double sig = spec.sigma(S, t);
    const double bh = spec.b(H, t);
    if (!(sig > 0.0)) throw DomainError("sigma must be strictly positive at the query point");
    if (!(bh > 0.0)) throw DomainError("b must be strictly positive at the query point");
    return spec.mu(S, t) - (spec.a(H, t) - spec.r) * spec.rho * sig / bh;
}

void StochVolSpec::validate() const {
    if (!std::isfinite(mu)) throw ConfigError("stock drift mu must be finite");
    check_finite_coefficient(beta_fn, "beta");
    check_finite_coefficient(a, "a");
    check_finite_coefficient(b, "b");
    check_rho_r(rho, r);
}

double StochVolSpec::gamma(double sigma, double t, double alpha_signed) const {
    const double beta = beta_fn(sigma, t);
    if (!(beta > 0.0)) throw DomainError("beta(sigma) must be strictly positive");
    const double bs = b(sigma, t);
    return a(sigma, t) - (mu - r) * rho * bs / beta +
           alpha_signed * std::sqrt(std::max(0.0, 1.0 - rho * rho)) * bs;
}

void SharpeParams::validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be >= 0");
}

const char* to_string(Side side) noexcept { return side == Side::seller ? "seller" : "buyer"; }

double signed_loading(const SharpeParams& sharpe, Side side) noexcept {
    return side == Side::seller ? sharpe.alpha : -sharpe.beta;
}

// ============================================================================
// Payoff
// ============================================================================

Payoff Payoff::put(double strike, double scale) {
    if (!(strike > 0.0)) throw ConfigError("put strike must be positive");
    if (!(scale >= 0.0)) throw ConfigError("payoff scale must be >= 0");
    Payoff p;
    p.kind_ = PayoffKind::put;
    p.strike_ = strike;
    p.scale_ = scale;
    return p;
}

Payoff Payoff::call(double strike, double scale) {
    Payoff p = put(strike, scale);
    p.kind_ = PayoffKind::call;
    return p;
}

Payoff Payoff::custom(std::vector<double> log_s_grid, std::vector<double> values, double scale) {
    if (log_s_grid.empty() || log_s_grid.size() != values.size())
        throw ConfigError("custom payoff needs equal-length, non-empty grid and values");
    for (std::size_t i = 1; i < log_s_grid.size(); ++i)
        if (!(log_s_grid[i] > log_s_grid[i - 1]))
            throw ConfigError("custom payoff log-S grid must be strictly increasing");
    if (!(scale >= 0.0)) throw ConfigError("payoff scale must be >= 0");
    Payoff p;
    p.kind_ = PayoffKind::custom;
    p.scale_ = scale;
    p.log_grid_ = std::move(log_s_grid);
    p.values_ = std::move(values);
    return p;
}

double Payoff::operator()(double S) const {
    if (!(S > 0.0)) throw DomainError("payoff evaluated at non-positive S");
    switch (kind_) {
        case PayoffKind::put: return scale_ * std::max(strike_ - S, 0.0);
        case PayoffKind::call: return scale_ * std::max(S - strike_, 0.0);
        case PayoffKind::custom: return at_log(std::log(S));
    }
    return 0.0;
}

double Payoff::at_log(double x) const {
    if (kind_ != PayoffKind::custom) return (*this)(std::exp(x));
    const auto& g = log_grid_;
    const auto& v = values_;
    if (g.size() == 1) return scale_ * v.front();
    std::size_t lo = 0;
    if (x <= g.front()) {
        lo = 0;
    } else if (x >= g.back()) {
        lo = g.size() - 2;
    } else {
        lo = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), x) - g.begin()) - 1;
    }
    const double w = (x - g[lo]) / (g[lo + 1] - g[lo]);
    return scale_ * (v[lo] + w * (v[lo + 1] - v[lo]));
}

Payoff Payoff::scaled(double c) const {
    if (!(c >= 0.0)) throw ConfigError("payoff scale must be >= 0");
    Payoff p = *this;
    p.scale_ = scale_ * c;
    return p;
}

int Payoff::monotonicity() const {
    switch (kind_) {
        case PayoffKind::put: return -1;
        case PayoffKind::call: return +1;
        case PayoffKind::custom: break;
    }
    bool up = true;
    bool down = true;
    for (std::size_t i = 1; i < values_.size(); ++i) {
        if (values_[i] < values_[i - 1]) up = false;
        if (values_[i] > values_[i - 1]) down = false;
    }
    if (up) return +1;
    if (down) return -1;
    return 0;
}

double payoff_eval(const Payoff& payoff, double S) { return payoff(S); }

const char* to_string(PayoffKind kind) noexcept {
    switch (kind) {
        case PayoffKind::put: return "put";
        case PayoffKind::call: return "call";
        case PayoffKind::custom: return "custom";
    }
    return "?";
}

// ============================================================================
// Assumption spot-check
// ============================================================================

bool AssumptionReport::all_pass() const noexcept {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

const AssumptionEntry* AssumptionReport::find(const std::string& name) const noexcept {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

namespace {

AssumptionEntry make_entry(std::string name, double estimate, double threshold,
                           bool upper_bound = true) {
    AssumptionEntry e{std::move(name), estimate, threshold, upper_bound, false};
    e.pass = std::isfinite(estimate) && (upper_bound ? estimate < threshold : estimate > threshold);
    return e;
}

std::vector<double> nodes(const Axis& ax) {
    std::vector<double> out(static_cast<std::size_t>(ax.n));
    for (int i = 0; i < ax.n; ++i) out[static_cast<std::size_t>(i)] = ax.node(i);
    return out;
}

// Bound and sampled log-Lipschitz quotient of f over exp(axis nodes).
struct Sampled {
    double sup_abs = 0.0;
    double inf = std::numeric_limits<double>::infinity();
    double quotient = 0.0;
};

Sampled sample(const CoefficientFn& f, const std::vector<double>& pts, bool log_axis) {
    Sampled s;
    double prev = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double state = log_axis ? std::exp(pts[i]) : pts[i];
        double v = 0.0;
        try {
            v = f(state);
        } catch (const DomainError&) {
            v = std::numeric_limits<double>::infinity();
        }
        s.sup_abs = std::max(s.sup_abs, std::abs(v));
        s.inf = std::min(s.inf, v);
        if (i > 0) s.quotient = std::max(s.quotient, std::abs(v - prev) / (pts[i] - pts[i - 1]));
        prev = v;
    }
    return s;
}

AssumptionEntry lipschitz_entry(const std::string& name, const CoefficientFn& f,
                                const std::vector<double>& pts, bool log_axis,
                                double threshold) {
    const Sampled s = sample(f, pts, log_axis);
    const double lo = log_axis ? std::exp(pts.front()) : pts.front();
    const double hi = log_axis ? std::exp(pts.back()) : pts.back();
    const double exact = log_axis ? f.log_lipschitz_bound(lo, hi) : f.lipschitz_bound(lo, hi);
    return make_entry(name, std::max(s.quotient, exact), threshold);
}

// Local exponent lambda in g ~ (1 + x^2)^lambda at each tail where |x| >= 1.
double growth_exponent(const Payoff& payoff, const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    double lambda = 0.0;
    const auto tail = [&](double x0, double x1) {
        if (std::abs(x1) < 1.0 || std::abs(x0) < 1.0) return;
        const double g0 = std::log1p(std::abs(payoff.at_log(x0)));
        const double g1 = std::log1p(std::abs(payoff.at_log(x1)));
        const double d = std::log1p(x1 * x1) - std::log1p(x0 * x0);
        if (d <= 0.0) return;
        lambda = std::max(lambda, (g1 - g0) / d);
    };
    tail(xs[xs.size() - 2], xs.back());
    tail(xs[1], xs.front());
    return lambda;
}

}  // namespace

AssumptionReport validate_assumptions(const MarketSpec& spec, const GridSpec& grid,
                                      const std::optional<Payoff>& payoff,
                                      const ValidationOptions& options) {
    grid.validate(2);
    const auto xs = nodes(grid.x);
    const auto ys = nodes(grid.y ? *grid.y : grid.x);
    AssumptionReport report;
    auto& out = report.entries;

    const Sampled mu = sample(spec.mu, xs, true);
    const Sampled sig = sample(spec.sigma, xs, true);
    const Sampled a = sample(spec.a, ys, true);
    const Sampled b = sample(spec.b, ys, true);

    out.push_back(make_entry("bounded_mu", mu.sup_abs, options.bound_threshold));
    out.push_back(make_entry("bounded_sigma", sig.sup_abs, options.bound_threshold));
    out.push_back(make_entry("bounded_a", a.sup_abs, options.bound_threshold));
    out.push_back(make_entry("bounded_b", b.sup_abs, options.bound_threshold));
    out.push_back(make_entry("positive_sigma", sig.inf, 0.0, false));
    out.push_back(make_entry("positive_b", b.inf, 0.0, false));
    out.push_back(lipschitz_entry("lipschitz_mu", spec.mu, xs, true, options.lipschitz_threshold));
    out.push_back(
        lipschitz_entry("lipschitz_sigma", spec.sigma, xs, true, options.lipschitz_threshold));
    out.push_back(lipschitz_entry("lipschitz_a", spec.a, ys, true, options.lipschitz_threshold));
    out.push_back(lipschitz_entry("lipschitz_b", spec.b, ys, true, options.lipschitz_threshold));

    // Smallest value of sigma^2 x1^2 + 2 rho sigma b x1 x2 + b^2 x2^2 over unit
    // directions and sample nodes, cross-checked with the exact 2x2 eigenvalue.
    double ellipticity = std::numeric_limits<double>::infinity();
    for (double x : xs) {
        for (double y : ys) {
            double s = 0.0;
            double bb = 0.0;
            try {
                s = spec.sigma(std::exp(x));
                bb = spec.b(std::exp(y));
            } catch (const DomainError&) {
                ellipticity = -std::numeric_limits<double>::infinity();
                continue;
            }
            const double c = spec.rho * s * bb;
            for (int k = 0; k < options.directions; ++k) {
                const double th = std::numbers::pi * k / options.directions;
                const double x1 = std::cos(th);
                const double x2 = std::sin(th);
                ellipticity = std::min(ellipticity, s * s * x1 * x1 + 2.0 * c * x1 * x2 +
                                                        bb * bb * x2 * x2);
            }
            const double tr = s * s + bb * bb;
            const double det = s * s * bb * bb * (1.0 - spec.rho * spec.rho);
            const double disc = std::sqrt(std::max(0.0, tr * tr - 4.0 * det));
            // smaller root written as 2 det / (tr + disc) to avoid cancellation
            const double lam_min = tr + disc > 0.0 ? 2.0 * det / (tr + disc) : 0.0;
            ellipticity = std::min(ellipticity, lam_min);
        }
    }
    out.push_back(make_entry("ellipticity", ellipticity, options.ellipticity_floor, false));

    if (payoff) {
        out.push_back(make_entry("payoff_growth", growth_exponent(*payoff, xs),
                                 options.growth_exponent_threshold));
    }
    return report;
}

AssumptionReport validate_assumptions(const StochVolSpec& spec, const GridSpec& grid,
                                      const std::optional<Payoff>& payoff,
                                      const ValidationOptions& options) {
    grid.validate(2);
    if (!grid.y) throw ConfigError("stochastic-volatility validation needs a sigma axis");
    const auto xs = nodes(grid.x);
    const auto sigmas = nodes(*grid.y);
    AssumptionReport report;
    auto& out = report.entries;

    const Sampled beta = sample(spec.beta_fn, sigmas, false);
    const Sampled a = sample(spec.a, sigmas, false);
    const Sampled b = sample(spec.b, sigmas, false);
    out.push_back(make_entry("bounded_beta", beta.sup_abs, options.bound_threshold));
    out.push_back(make_entry("bounded_a", a.sup_abs, options.bound_threshold));
    out.push_back(make_entry("bounded_b", b.sup_abs, options.bound_threshold));
    out.push_back(make_entry("positive_beta", beta.inf, 0.0, false));

    double max_decrease = 0.0;
    for (std::size_t i = 1; i < sigmas.size(); ++i)
        max_decrease = std::max(max_decrease, spec.beta_fn(sigmas[i - 1]) - spec.beta_fn(sigmas[i]));
    out.push_back(make_entry("monotone_beta", max_decrease, 1e-12));

    out.push_back(
        lipschitz_entry("lipschitz_beta", spec.beta_fn, sigmas, false, options.lipschitz_threshold));
    out.push_back(lipschitz_entry("lipschitz_b", spec.b, sigmas, false, options.lipschitz_threshold));

    double gamma_q = 0.0;
    bool gamma_ok = true;
    for (std::size_t i = 1; i < sigmas.size(); ++i) {
        try {
            gamma_q = std::max(gamma_q, std::abs(spec.gamma(sigmas[i], 0.0, 0.0) -
                                                 spec.gamma(sigmas[i - 1], 0.0, 0.0)) /
                                            (sigmas[i] - sigmas[i - 1]));
        } catch (const DomainError&) {
            gamma_ok = false;
        }
    }
    out.push_back(make_entry("lipschitz_gamma",
                             gamma_ok ? gamma_q : std::numeric_limits<double>::infinity(),
                             options.lipschitz_threshold));

    double ellipticity = std::numeric_limits<double>::infinity();
    for (double s : sigmas) ellipticity = std::min(ellipticity, std::max(spec.beta_fn(s), spec.b(s)));
    out.push_back(make_entry("ellipticity", ellipticity, options.ellipticity_floor, false));

    if (payoff) {
        out.push_back(make_entry("payoff_growth", growth_exponent(*payoff, xs),
                                 options.growth_exponent_threshold));
    }
    return report;
}

}  // namespace sharpe
