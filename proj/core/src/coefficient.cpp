#include "sharpe/coefficient.hpp"

#include "sharpe/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sharpe {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double interpolate_clamped(const CoefficientFn::Tabulated& tab, double s) {
    const auto& g = tab.grid;
    const auto& v = tab.values;
    if (s <= g.front()) return v.front();
    if (s >= g.back()) return v.back();
    const auto it = std::upper_bound(g.begin(), g.end(), s);
    const auto hi = static_cast<std::size_t>(it - g.begin());
    const auto lo = hi - 1;
    const double w = (s - g[lo]) / (g[hi] - g[lo]);
    return v[lo] + w * (v[hi] - v[lo]);
}

}  // namespace

CoefficientFn CoefficientFn::constant(double value) {
    if (!std::isfinite(value)) throw ConfigError("constant coefficient must be finite");
    return CoefficientFn(Constant{value});
}

CoefficientFn CoefficientFn::tabulated(std::vector<double> grid, std::vector<double> values) {
    if (grid.empty() || grid.size() != values.size())
        throw ConfigError("tabulated coefficient needs equal-length, non-empty grid and values");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i]) || !std::isfinite(values[i]))
            throw ConfigError("tabulated coefficient entries must be finite");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw ConfigError("tabulated coefficient grid must be strictly increasing");
    }
    return CoefficientFn(Tabulated{std::move(grid), std::move(values)});
}

CoefficientFn CoefficientFn::affine_in_log(double c0, double c1) {
    if (!std::isfinite(c0) || !std::isfinite(c1))
        throw ConfigError("affine-in-log coefficients must be finite");
    return CoefficientFn(AffineInLog{c0, c1});
}

double CoefficientFn::operator()(double state, double /*t*/) const {
    return std::visit(
        overloaded{
            [](const Constant& c) { return c.value; },
            [state](const Tabulated& tab) { return interpolate_clamped(tab, state); },
            [state](const AffineInLog& f) {
                if (!(state > 0.0))
                    throw DomainError("affine-in-log coefficient evaluated at non-positive state");
                return f.c0 + f.c1 * std::log(state);
            },
        },
        kind_);
}

bool CoefficientFn::is_constant() const noexcept {
    if (std::holds_alternative<Constant>(kind_)) return true;
    if (const auto* tab = std::get_if<Tabulated>(&kind_)) {
        return std::all_of(tab->values.begin(), tab->values.end(),
                           [&](double v) { return v == tab->values.front(); });
    }
    return std::get<AffineInLog>(kind_).c1 == 0.0;
}

double CoefficientFn::constant_value() const {
    if (!is_constant()) throw UnsupportedError("coefficient is not constant");
    return std::visit(overloaded{
                          [](const Constant& c) { return c.value; },
                          [](const Tabulated& tab) { return tab.values.front(); },
                          [](const AffineInLog& f) { return f.c0; },
                      },
                      kind_);
}

double CoefficientFn::log_lipschitz_bound(double lo, double hi) const {
    return std::visit(
        overloaded{
            [](const Constant&) { return 0.0; },
            [lo, hi](const Tabulated& tab) {
                double best = 0.0;
                for (std::size_t k = 1; k < tab.grid.size(); ++k) {
                    const double a = std::max(tab.grid[k - 1], lo);
                    const double b = std::min(tab.grid[k], hi);
                    if (!(b > a)) continue;
                    const double slope = (tab.values[k] - tab.values[k - 1]) /
                                         (tab.grid[k] - tab.grid[k - 1]);
                    // d f / d ln s = s f'(s), largest at the segment end farthest from 0
                    best = std::max(best, std::abs(slope) * std::max(std::abs(a), std::abs(b)));
                }
                return best;
            },
            [](const AffineInLog& f) { return std::abs(f.c1); },
        },
        kind_);
}

double CoefficientFn::lipschitz_bound(double lo, double hi) const {
    return std::visit(
        overloaded{
            [](const Constant&) { return 0.0; },
            [lo, hi](const Tabulated& tab) {
                double best = 0.0;
                for (std::size_t k = 1; k < tab.grid.size(); ++k) {
                    const double a = std::max(tab.grid[k - 1], lo);
                    const double b = std::min(tab.grid[k], hi);
                    if (!(b > a)) continue;
                    best = std::max(best, std::abs((tab.values[k] - tab.values[k - 1]) /
                                                   (tab.grid[k] - tab.grid[k - 1])));
                }
                return best;
            },
            [lo](const AffineInLog& f) {
                if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
                return std::abs(f.c1) / lo;
            },
        },
        kind_);
}

}  // namespace sharpe
