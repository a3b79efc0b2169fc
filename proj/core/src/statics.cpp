#include "sharpe/statics.hpp"

#include "sharpe/analytic.hpp"
#include "sharpe/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace sharpe {

const char* to_string(SweepAxis axis) noexcept {
    switch (axis) {
        case SweepAxis::alpha: return "alpha";
        case SweepAxis::rho: return "rho";
        case SweepAxis::mu: return "mu";
        case SweepAxis::sigma: return "sigma";
        case SweepAxis::a: return "a";
        case SweepAxis::b: return "b";
    }
    return "?";
}

const char* to_string(SweepColumn column) noexcept {
    switch (column) {
        case SweepColumn::buyer: return "buyer";
        case SweepColumn::alpha0: return "alpha0";
        case SweepColumn::seller: return "seller";
    }
    return "?";
}

const char* to_string(Direction direction) noexcept {
    switch (direction) {
        case Direction::increasing: return "increasing";
        case Direction::decreasing: return "decreasing";
        case Direction::constant: return "constant";
        case Direction::none: return "none";
    }
    return "?";
}

SweepAxis parse_sweep_axis(const std::string& name) {
    for (SweepAxis axis : {SweepAxis::alpha, SweepAxis::rho, SweepAxis::mu, SweepAxis::sigma,
                           SweepAxis::a, SweepAxis::b})
        if (name == to_string(axis)) return axis;
    throw ConfigError("unknown sweep axis '" + name + "' (alpha, rho, mu, sigma, a, b)");
}

// ============================================================================
// Shape hypotheses
// ============================================================================

ShapeHypothesis surface_shape(const PriceSurface& surface, double tol, double S_min,
                              double S_max) {
    const double x_lo = S_min > 0.0 ? std::log(S_min) : -std::numeric_limits<double>::infinity();
    const double x_hi = std::log(S_max);
    const double h2 = surface.grid.x.step() * surface.grid.x.step();
    bool up = true;
    bool down = true;
    bool convex = true;
    for (int n = 0; n <= surface.n_t(); ++n) {
        const GreeksField g = greeks(surface, n);
        for (std::size_t k = 0; k < g.P_S.size(); ++k) {
            const double ps = g.P_S[k];
            const double pss = g.P_SS[k];
            if (std::isnan(ps)) continue;
            const double x = surface.grid.x.node(static_cast<int>(k) / g.n_y);
            if (x < x_lo || x > x_hi) continue;
            if (ps < -tol) up = false;
            if (ps > tol) down = false;
            // P_SS = (P_xx - P_x) / S^2 cancels deep in the money; allow the
            // O(dx^2) error of that difference
            const double slack = tol + h2 * std::abs(ps) / std::exp(x);
            if (!std::isnan(pss) && pss < -slack) convex = false;
        }
    }
    ShapeHypothesis out;
    out.delta_sign = up ? 1 : (down ? -1 : 0);
    out.convex = convex;
    return out;
}

ShapeHypothesis closed_form_shape(const Payoff& payoff) {
    if (payoff.kind() == PayoffKind::custom)
        throw UnsupportedError("closed-form shape needs a put or call payoff");
    return {payoff.monotonicity(), true};
}

// ============================================================================
// Expected directions
// ============================================================================

namespace {

double column_loading(SweepColumn column, const SharpeParams& sharpe) noexcept {
    switch (column) {
        case SweepColumn::seller: return sharpe.alpha;
        case SweepColumn::buyer: return -sharpe.beta;
        case SweepColumn::alpha0: return 0.0;
    }
    return 0.0;
}

double cval(const CoefficientFn& f) { return f.constant_value(); }

Direction from_sign(int s) noexcept {
    if (s > 0) return Direction::increasing;
    if (s < 0) return Direction::decreasing;
    return Direction::constant;
}

Direction direction_for(SweepAxis axis, SweepColumn column, const SweepPoint& lo,
                        const ShapeHypothesis& shape) {
    const MarketSpec& s = lo.spec;
    const double r = s.r;
    const double rho = s.rho;
    const int rho_sign = (rho > 0.0) - (rho < 0.0);
    switch (axis) {
        case SweepAxis::alpha:
            if (column == SweepColumn::seller) return Direction::increasing;
            if (column == SweepColumn::buyer) return Direction::decreasing;
            return Direction::constant;
        case SweepAxis::mu:
            if (cval(s.mu) < r || shape.delta_sign == 0) return Direction::none;
            return from_sign(shape.delta_sign);
        case SweepAxis::a:
            if (cval(s.a) < r) return Direction::none;
            if (rho_sign == 0) return Direction::constant;
            if (shape.delta_sign == 0) return Direction::none;
            return from_sign(-rho_sign * shape.delta_sign);
        case SweepAxis::b:
            if (!(cval(s.b) > 0.0) || cval(s.a) < r) return Direction::none;
            if (rho_sign == 0) return Direction::constant;
            if (shape.delta_sign == 0) return Direction::none;
            return from_sign(rho_sign * shape.delta_sign);
        case SweepAxis::sigma: {
            if (cval(s.sigma) < 0.0 || shape.delta_sign <= 0 || !shape.convex)
                return Direction::none;
            const double lambda = column_loading(column, lo.sharpe);
            const double lhs = lambda * std::sqrt(std::max(0.0, 1.0 - rho * rho));
            const double rhs = rho * (cval(s.a) - r) / cval(s.b);
            return lhs >= rhs ? Direction::increasing : Direction::none;
        }
        case SweepAxis::rho:
            if (rho < 0.0 || cval(s.a) < r || shape.delta_sign <= 0) return Direction::none;
            if (column_loading(column, lo.sharpe) < 0.0) return Direction::none;
            return Direction::decreasing;
    }
    return Direction::none;
}

}  // namespace

Direction expected_direction(SweepAxis axis, SweepColumn column, const SweepPoint& lower,
                             const SweepPoint& upper, const ShapeHypothesis& shape) {
    if (upper.value < lower.value) throw ConfigError("sweep points out of order");
    if (!lower.spec.is_constant() || !upper.spec.is_constant())
        throw UnsupportedError("comparative statics need constant coefficients");
    return direction_for(axis, column, lower, shape);
}

// ============================================================================
// Sweeps
// ============================================================================

bool SweepResult::all_ok() const noexcept {
    return std::all_of(rows.begin(), rows.end(),
                       [](const SweepRow& row) { return row.verdict == "ok"; });
}

std::vector<double> sweep_values(double lo, double hi, int n_points) {
    if (n_points < 1) throw ConfigError("sweep.n_points must be >= 1");
    if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo)
        throw ConfigError("sweep range must be finite with lo <= hi");
    std::vector<double> out(n_points);
    for (int i = 0; i < n_points; ++i)
        out[i] = n_points == 1 ? lo : (i == n_points - 1 ? hi : lo + (hi - lo) * i / (n_points - 1));
    return out;
}

namespace {

SweepPoint make_point(const MarketSpec& base, const SharpeParams& sharpe, SweepAxis axis,
                      double v) {
    SweepPoint p{base, sharpe, v};
    auto c = [](double x) { return CoefficientFn::constant(x); };
    switch (axis) {
        case SweepAxis::alpha:
            if (v < 0.0) throw ConfigError("sweep value for alpha must be >= 0");
            p.sharpe = SharpeParams{v, v};
            break;
        case SweepAxis::rho:
            if (std::abs(v) > 1.0) throw ConfigError("sweep value for rho must lie in [-1, 1]");
            p.spec.rho = v;
            break;
        case SweepAxis::mu: p.spec.mu = c(v); break;
        case SweepAxis::sigma:
            if (!(v > 0.0)) throw ConfigError("sweep value for sigma must be > 0");
            p.spec.sigma = c(v);
            break;
        case SweepAxis::a: p.spec.a = c(v); break;
        case SweepAxis::b:
            if (!(v > 0.0)) throw ConfigError("sweep value for b must be > 0");
            p.spec.b = c(v);
            break;
    }
    p.spec.validate();
    p.sharpe.validate();
    return p;
}

struct ColumnResult {
    double price = 0.0;
    ShapeHypothesis shape;
};

ColumnResult evaluate(const SweepPoint& p, SweepColumn column, const Payoff& payoff, double S0,
                      double T, const SweepOptions& options, double half_width) {
    const Side side = column == SweepColumn::buyer ? Side::buyer : Side::seller;
    const SharpeParams sharpe = column == SweepColumn::alpha0 ? SharpeParams{} : p.sharpe;
    ColumnResult out;
    if (options.method == SweepMethod::closed_form) {
        out.price = price_closed_form(p.spec, payoff, sharpe, side, S0, T);
        out.shape = closed_form_shape(payoff);
        return out;
    }
    const BoundsResolution& res = options.resolution;
    const GridSpec grid =
        pricing_grid(p.spec, S0, S0, T, res.n_x, res.n_y, res.n_t, half_width, false);
    const PriceSurface surface = solve_1d(p.spec, payoff, sharpe, side, grid, res.solver).first;
    out.price = surface.value(S0, 0.0, 0.0);
    out.shape = surface_shape(surface, options.tolerance, S0 * std::exp(-0.5 * half_width),
                              S0 * std::exp(0.5 * half_width));
    return out;
}

bool moved_as(Direction d, double prev, double cur, double tol) {
    const double slack = tol * std::max({1.0, std::abs(prev), std::abs(cur)});
    switch (d) {
        case Direction::increasing: return cur >= prev - slack;
        case Direction::decreasing: return cur <= prev + slack;
        case Direction::constant: return std::abs(cur - prev) <= slack;
        case Direction::none: return true;
    }
    return true;
}

}  // namespace

SweepResult run_sweep(const MarketSpec& base, const Payoff& payoff, const SharpeParams& sharpe,
                      SweepAxis axis, const std::vector<double>& values, double S0, double T,
                      const SweepOptions& options) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");
    if (!std::is_sorted(values.begin(), values.end()))
        throw ConfigError("sweep values must be non-decreasing");
    if (!base.is_constant()) throw UnsupportedError("sweep needs a constant-coefficient model");
    if (!(S0 > 0.0) || !(T >= 0.0)) throw DomainError("sweep needs S0 > 0 and T >= 0");

    std::vector<SweepPoint> points;
    points.reserve(values.size());
    for (double v : values) points.push_back(make_point(base, sharpe, axis, v));

    double half_width = options.resolution.half_width;
    if (options.method == SweepMethod::pde && half_width <= 0.0) {
        double vol = 0.0;
        for (const SweepPoint& p : points) vol = std::max(vol, p.spec.sigma.constant_value());
        half_width = std::max(1.5, 8.0 * vol * std::sqrt(T));
    }

    const std::size_t n_jobs = points.size() * 3;
    std::vector<ColumnResult> results(n_jobs);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t job = next++; job < n_jobs; job = next++) {
            try {
                results[job] = evaluate(points[job / 3], static_cast<SweepColumn>(job % 3),
                                        payoff, S0, T, options, half_width);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    int threads = options.n_threads > 0 ? options.n_threads
                                        : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, static_cast<int>(n_jobs));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    SweepResult out;
    out.axis = axis;
    out.method = options.method;
    out.rows.resize(points.size());
    const double tol = options.tolerance;
    for (std::size_t i = 0; i < points.size(); ++i) {
        SweepRow& row = out.rows[i];
        row.value = values[i];
        row.buyer = results[3 * i].price;
        row.alpha0 = results[3 * i + 1].price;
        row.seller = results[3 * i + 2].price;
        const double prices[3] = {row.buyer, row.alpha0, row.seller};
        std::ostringstream fails;
        auto fail = [&](const std::string& what) {
            fails << (fails.tellp() > 0 ? ";" : "") << what;
        };
        if (!moved_as(Direction::increasing, row.buyer, row.alpha0, tol))
            fail("buyer>alpha0");
        if (!moved_as(Direction::increasing, row.alpha0, row.seller, tol))
            fail("alpha0>seller");
        for (int c = 0; c < 3; ++c) {
            row.shape[c] = results[3 * i + c].shape;
            if (i == 0) continue;
            const auto column = static_cast<SweepColumn>(c);
            Direction d = expected_direction(axis, column, points[i - 1], points[i],
                                             results[3 * (i - 1) + c].shape);
            if (d == Direction::none)
                d = expected_direction(axis, column, points[i - 1], points[i], row.shape[c]);
            row.expected[c] = d;
            const double prev = c == 0 ? out.rows[i - 1].buyer
                                       : (c == 1 ? out.rows[i - 1].alpha0 : out.rows[i - 1].seller);
            if (!moved_as(d, prev, prices[c], tol))
                fail(std::string(to_string(column)) + "-not-" + to_string(d));
        }
        row.verdict = fails.tellp() > 0 ? "fail:" + fails.str() : "ok";
    }
    return out;
}

}  // namespace sharpe
