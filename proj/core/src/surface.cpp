#include "sharpe/error.hpp"
#include "sharpe/pde.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

namespace sharpe {

const char* to_string(EquationTag tag) noexcept {
    switch (tag) {
        case EquationTag::basis_risk_1d: return "basis_risk_1d";
        case EquationTag::basis_risk_2d: return "basis_risk_2d";
        case EquationTag::stochvol_nonlinear: return "stochvol_nonlinear";
        case EquationTag::stochvol_linear: return "stochvol_linear";
    }
    return "unknown";
}

const char* to_string(SecondAxis axis) noexcept {
    switch (axis) {
        case SecondAxis::none: return "none";
        case SecondAxis::log_h: return "log_h";
        case SecondAxis::sigma: return "sigma";
    }
    return "unknown";
}

// ============================================================================
// Sampling
// ============================================================================

namespace {

struct Bracket {
    int lo = 0;
    double w = 0.0;  // weight of lo + 1
};

Bracket bracket(const Axis& a, double z) {
    const double pos = (z - a.min) / a.step();
    int lo = static_cast<int>(std::floor(pos));
    lo = std::clamp(lo, 0, a.n - 2);
    return {lo, std::clamp(pos - lo, 0.0, 1.0)};
}

Bracket time_bracket(const GridSpec& g, double t) {
    const double pos = t / g.dt();
    int lo = static_cast<int>(std::floor(pos));
    lo = std::clamp(lo, 0, std::max(g.n_t - 1, 0));
    return {lo, std::clamp(pos - lo, 0.0, 1.0)};
}

struct NodeDerivs {
    double P = 0.0;
    double Px = 0.0;
    double Pxx = 0.0;
    double Py = 0.0;
};

// Central differences at interior nodes; first derivatives one-sided and
// second derivatives copied from the neighbour on the edges.
NodeDerivs node_derivs(const PriceSurface& s, int n, int i, int j) {
    const int nx = s.n_x();
    const double dx = s.grid.x.step();
    NodeDerivs d;
    d.P = s.at(n, i, j);
    if (i == 0)
        d.Px = (s.at(n, 1, j) - s.at(n, 0, j)) / dx;
    else if (i == nx - 1)
        d.Px = (s.at(n, nx - 1, j) - s.at(n, nx - 2, j)) / dx;
    else
        d.Px = (s.at(n, i + 1, j) - s.at(n, i - 1, j)) / (2.0 * dx);
    const int ic = std::clamp(i, 1, nx - 2);
    d.Pxx = (s.at(n, ic + 1, j) - 2.0 * s.at(n, ic, j) + s.at(n, ic - 1, j)) / (dx * dx);
    if (s.grid.two_d()) {
        const int ny = s.n_y();
        const double dy = s.grid.y->step();
        if (j == 0)
            d.Py = (s.at(n, i, 1) - s.at(n, i, 0)) / dy;
        else if (j == ny - 1)
            d.Py = (s.at(n, i, ny - 1) - s.at(n, i, ny - 2)) / dy;
        else
            d.Py = (s.at(n, i, j + 1) - s.at(n, i, j - 1)) / (2.0 * dy);
    }
    return d;
}

NodeDerivs lerp(const NodeDerivs& a, const NodeDerivs& b, double w) {
    return {a.P + w * (b.P - a.P), a.Px + w * (b.Px - a.Px), a.Pxx + w * (b.Pxx - a.Pxx),
            a.Py + w * (b.Py - a.Py)};
}

NodeDerivs sample_slice(const PriceSurface& s, int n, const Bracket& bx,
                        const std::optional<Bracket>& by) {
    if (!by) return lerp(node_derivs(s, n, bx.lo, 0), node_derivs(s, n, bx.lo + 1, 0), bx.w);
    const NodeDerivs lo = lerp(node_derivs(s, n, bx.lo, by->lo),
                               node_derivs(s, n, bx.lo, by->lo + 1), by->w);
    const NodeDerivs hi = lerp(node_derivs(s, n, bx.lo + 1, by->lo),
                               node_derivs(s, n, bx.lo + 1, by->lo + 1), by->w);
    return lerp(lo, hi, bx.w);
}

NodeDerivs sample(const PriceSurface& s, double x, double y, double t) {
    const Bracket bx = bracket(s.grid.x, x);
    std::optional<Bracket> by;
    if (s.grid.two_d()) by = bracket(*s.grid.y, y);
    const Bracket bt = time_bracket(s.grid, t);
    const NodeDerivs a = sample_slice(s, bt.lo, bx, by);
    if (bt.w == 0.0) return a;
    return lerp(a, sample_slice(s, bt.lo + 1, bx, by), bt.w);
}

}  // namespace

double PriceSurface::y_coord(double state) const {
    switch (second_axis) {
        case SecondAxis::log_h:
            if (!(state > 0.0)) throw DomainError("H must be positive");
            return std::log(state);
        case SecondAxis::sigma: return state;
        case SecondAxis::none: return 0.0;
    }
    return 0.0;
}

bool PriceSurface::inside_hull(double S, double y_state, double t) const noexcept {
    if (!(S > 0.0) || t < 0.0 || t > grid.T) return false;
    const double x = std::log(S);
    if (x < grid.x.min || x > grid.x.max) return false;
    if (!grid.two_d()) return true;
    if (second_axis == SecondAxis::log_h && !(y_state > 0.0)) return false;
    const double y = second_axis == SecondAxis::log_h ? std::log(y_state) : y_state;
    return y >= grid.y->min && y <= grid.y->max;
}

double PriceSurface::value(double S, double y_state, double t) const {
    if (!(S > 0.0)) throw DomainError("S must be positive");
    return sample(*this, std::log(S), y_coord(y_state), t).P;
}

PointGreeks sample_greeks(const PriceSurface& surface, double S, double y_state, double t) {
    if (!(S > 0.0)) throw DomainError("S must be positive");
    const double y = surface.y_coord(y_state);
    const double x = std::clamp(std::log(S), surface.grid.x.min, surface.grid.x.max);
    const NodeDerivs d = sample(surface, x, y, t);
    const double ex = std::exp(-x);
    PointGreeks g;
    g.P = d.P;
    g.P_S = ex * d.Px;
    g.P_SS = ex * ex * (d.Pxx - d.Px);
    if (surface.second_axis == SecondAxis::log_h) {
        const double yc = std::clamp(y, surface.grid.y->min, surface.grid.y->max);
        g.P_y = std::exp(-yc) * d.Py;
    } else if (surface.second_axis == SecondAxis::sigma) {
        g.P_y = d.Py;
    }
    return g;
}

GreeksField greeks(const PriceSurface& surface, int time_index) {
    if (time_index < 0 || time_index > surface.n_t())
        throw ConfigError("greeks: time index out of range");
    const int nx = surface.n_x();
    const int ny = surface.n_y();
    const bool two_d = surface.grid.two_d();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    GreeksField f;
    f.n_x = nx;
    f.n_y = ny;
    const std::size_t total = surface.slice_size();
    f.P_S.assign(total, nan);
    f.P_SS.assign(total, nan);
    f.P_y.assign(total, nan);
    const double dx = surface.grid.x.step();
    const double dy = two_d ? surface.grid.y->step() : 1.0;
    const int n = time_index;
    for (int i = 1; i < nx - 1; ++i) {
        const double ex = std::exp(-surface.grid.x.node(i));
        for (int j = 0; j < ny; ++j) {
            if (two_d && (j == 0 || j == ny - 1)) continue;
            const double Px = (surface.at(n, i + 1, j) - surface.at(n, i - 1, j)) / (2.0 * dx);
            const double Pxx = (surface.at(n, i + 1, j) - 2.0 * surface.at(n, i, j) +
                                surface.at(n, i - 1, j)) /
                               (dx * dx);
            const std::size_t k = f.index(i, j);
            f.P_S[k] = ex * Px;
            f.P_SS[k] = ex * ex * (Pxx - Px);
            if (!two_d) {
                f.P_y[k] = 0.0;
                continue;
            }
            const double Py = (surface.at(n, i, j + 1) - surface.at(n, i, j - 1)) / (2.0 * dy);
            f.P_y[k] = surface.second_axis == SecondAxis::log_h
                           ? std::exp(-surface.grid.y->node(j)) * Py
                           : Py;
        }
    }
    return f;
}

// ============================================================================
// Serialization
// ============================================================================

namespace {

constexpr std::array<char, 8> kMagic{'S', 'H', 'R', 'P', 'S', 'R', 'F', '1'};
constexpr std::uint32_t kVersion = 1;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in) throw ConfigError("surface cache is truncated");
    return v;
}

void put_axis(std::ostream& out, const Axis& a) {
    put(out, a.min);
    put(out, a.max);
    put(out, static_cast<std::int32_t>(a.n));
}

Axis get_axis(std::istream& in) {
    Axis a;
    a.min = get<double>(in);
    a.max = get<double>(in);
    a.n = get<std::int32_t>(in);
    return a;
}

}  // namespace

void write_surface_csv(const PriceSurface& surface, std::ostream& out) {
    out << "t,S";
    if (surface.second_axis == SecondAxis::log_h) out << ",H";
    if (surface.second_axis == SecondAxis::sigma) out << ",sigma";
    out << ",value\n";
    for (int n = 0; n <= surface.n_t(); ++n) {
        const std::string t = fmt(surface.time(n));
        for (int i = 0; i < surface.n_x(); ++i) {
            const std::string S = fmt(std::exp(surface.grid.x.node(i)));
            for (int j = 0; j < surface.n_y(); ++j) {
                out << t << ',' << S;
                if (surface.second_axis == SecondAxis::log_h)
                    out << ',' << fmt(std::exp(surface.grid.y->node(j)));
                if (surface.second_axis == SecondAxis::sigma)
                    out << ',' << fmt(surface.grid.y->node(j));
                out << ',' << fmt(surface.at(n, i, j)) << '\n';
            }
        }
    }
}

void write_surface_binary(const PriceSurface& surface, std::ostream& out) {
    out.write(kMagic.data(), kMagic.size());
    put(out, kVersion);
    put_axis(out, surface.grid.x);
    put(out, static_cast<std::uint8_t>(surface.grid.two_d()));
    put_axis(out, surface.grid.y.value_or(Axis{}));
    put(out, static_cast<std::int32_t>(surface.grid.n_t));
    put(out, surface.grid.T);
    put(out, static_cast<std::uint8_t>(surface.side));
    put(out, static_cast<std::uint8_t>(surface.equation_tag));
    put(out, static_cast<std::uint8_t>(surface.second_axis));
    put(out, surface.sharpe_used);
    put(out, static_cast<std::uint64_t>(surface.values.size()));
    out.write(reinterpret_cast<const char*>(surface.values.data()),
              static_cast<std::streamsize>(surface.values.size() * sizeof(double)));
}

PriceSurface read_surface_binary(std::istream& in) {
    std::array<char, 8> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) throw ConfigError("not a surface cache (bad magic number)");
    if (get<std::uint32_t>(in) != kVersion) throw ConfigError("unsupported surface cache version");
    PriceSurface s;
    s.grid.x = get_axis(in);
    const bool two_d = get<std::uint8_t>(in) != 0;
    const Axis y = get_axis(in);
    if (two_d) s.grid.y = y;
    s.grid.n_t = get<std::int32_t>(in);
    s.grid.T = get<double>(in);
    s.grid.validate(2);
    const auto side = get<std::uint8_t>(in);
    const auto tag = get<std::uint8_t>(in);
    const auto axis = get<std::uint8_t>(in);
    if (side > 1 || tag > 3 || axis > 2) throw ConfigError("surface cache has invalid metadata");
    s.side = static_cast<Side>(side);
    s.equation_tag = static_cast<EquationTag>(tag);
    s.second_axis = static_cast<SecondAxis>(axis);
    s.sharpe_used = get<double>(in);
    const auto count = get<std::uint64_t>(in);
    if (count != static_cast<std::uint64_t>(s.grid.n_t + 1) * s.slice_size())
        throw ConfigError("surface cache size does not match its grid");
    s.values.resize(count);
    in.read(reinterpret_cast<char*>(s.values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw ConfigError("surface cache is truncated");
    return s;
}

}  // namespace sharpe
