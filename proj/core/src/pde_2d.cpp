#include "sharpe/error.hpp"
#include "sharpe/pde.hpp"

#include "fd_stencil.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <memory>

namespace sharpe {

namespace {

using detail::Stencil3;

struct NodeCoeffs {
    double dxx = 0.0;
    double dyy = 0.0;
    double dxy = 0.0;
    double vx = 0.0;
    double vy = 0.0;
    double k = 0.0;  // multiplies the control h on the control axis
};

enum class ControlAxis { x, y };

struct Problem {
    GridSpec grid;
    std::vector<NodeCoeffs> nodes;  // i * n_y + j
    double r = 0.0;
    ControlAxis control = ControlAxis::x;
    bool y_one_sided = false;  // sigma edges: PDE rows with inward first differences
    std::vector<double> candidates;
    bool maximize = true;
    std::vector<double> terminal;
};

enum class RowKind : unsigned char { extrap_x, extrap_y, interior, edge_y };

using SpMat = Eigen::SparseMatrix<double>;
using Lu = Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>;

constexpr int kMaxRefinements = 12;

class Engine {
public:
    Engine(Problem p, const SolverOptions& options)
        : p_(std::move(p)), opt_(options), nx_(p_.grid.x.n), ny_(p_.grid.y->n),
          dx_(p_.grid.x.step()), dy_(p_.grid.y->step()) {
        const int total = nx_ * ny_;
        kind_.resize(total);
        reserve_.assign(total, 0.0);
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < ny_; ++j) {
                RowKind kd = RowKind::interior;
                if (i == 0 || i == nx_ - 1)
                    kd = RowKind::extrap_x;
                else if (j == 0 || j == ny_ - 1)
                    kd = p_.y_one_sided ? RowKind::edge_y : RowKind::extrap_y;
                kind_[idx(i, j)] = kd;
            }

        // seven-point cross stencil is monotone iff both axis diffusions
        // dominate |dxy| / (2 dx dy) at every interior node
        implicit_cross_ = true;
        max_dxy_ = 0.0;
        for (int i = 1; i < nx_ - 1; ++i)
            for (int j = 1; j < ny_ - 1; ++j) {
                const NodeCoeffs& c = p_.nodes[idx(i, j)];
                const double cc = std::abs(c.dxy) / (2.0 * dx_ * dy_);
                max_dxy_ = std::max(max_dxy_, std::abs(c.dxy));
                if (c.dxx / (dx_ * dx_) < cc || c.dyy / (dy_ * dy_) < cc) implicit_cross_ = false;
            }
        if (implicit_cross_)
            for (int i = 1; i < nx_ - 1; ++i)
                for (int j = 1; j < ny_ - 1; ++j)
                    reserve_[idx(i, j)] =
                        std::abs(p_.nodes[idx(i, j)].dxy) / (2.0 * dx_ * dy_);
    }

    SolveResult run(PriceSurface surface) {
        const int total = nx_ * ny_;
        const double dt = p_.grid.dt();
        SolverReport report;
        report.boundary_scheme = p_.y_one_sided
                                     ? "linear extrapolation in ln S; one-sided inward drift at "
                                       "sigma edges"
                                     : "linear extrapolation in both log axes";
        int inner = 1;
        if (!implicit_cross_ && max_dxy_ > 0.0) {
            inner = static_cast<int>(
                std::ceil(dt * max_dxy_ / (dx_ * dy_) / opt_.cross_cfl - 1e-12));
            inner = std::max(inner, 1);
            if (inner > opt_.max_inner_steps)
                throw ConfigError("explicit cross term needs " + std::to_string(inner) +
                                  " inner steps per time step; refine the time grid or widen "
                                  "the space steps");
        }
        report.cross_term_scheme = implicit_cross_ ? "implicit seven-point (monotone)"
                                                   : "explicit central, CFL-limited inner steps";
        report.inner_steps = inner;
        report.policy_iterations.reserve(p_.grid.n_t);

        surface.values.assign(static_cast<std::size_t>(p_.grid.n_t + 1) * total, 0.0);
        std::vector<double> prev = p_.terminal;
        std::copy(prev.begin(), prev.end(),
                  surface.values.begin() + static_cast<std::ptrdiff_t>(p_.grid.n_t) * total);

        std::vector<unsigned char> policy(total, 0);
        for (int n = p_.grid.n_t - 1; n >= 0; --n) {
            const int step = p_.grid.n_t - 1 - n;
            double theta = opt_.scheme == TimeScheme::crank_nicolson &&
                                   step >= opt_.rannacher_steps
                               ? 0.5
                               : 1.0;
            if (!implicit_cross_) theta = 1.0;
            const double h = dt / inner;
            int iters_total = 0;
            for (int s = 0; s < inner; ++s) {
                iters_total += sub_step(prev, policy, theta, h, report);
            }
            report.policy_iterations.push_back(iters_total);
            std::copy(prev.begin(), prev.end(),
                      surface.values.begin() + static_cast<std::ptrdiff_t>(n) * total);
        }
        report.factorizations = factorizations_;
        return {std::move(surface), std::move(report)};
    }

private:
    [[nodiscard]] int idx(int i, int j) const noexcept { return i * ny_ + j; }

    [[nodiscard]] Stencil3 x_stencil(int id, double h) const noexcept {
        const NodeCoeffs& c = p_.nodes[id];
        const double v = c.vx + (p_.control == ControlAxis::x ? h * c.k : 0.0);
        return detail::convection_diffusion(c.dxx, v, dx_, reserve_[id]);
    }
    [[nodiscard]] Stencil3 y_stencil(int id, double h) const noexcept {
        const NodeCoeffs& c = p_.nodes[id];
        const double v = c.vy + (p_.control == ControlAxis::y ? h * c.k : 0.0);
        return detail::convection_diffusion(c.dyy, v, dy_, reserve_[id]);
    }

    // Emit (column, coefficient) pairs of L_h at a PDE row, -r included.
    template <class F>
    void for_each_term(int i, int j, double h, F&& add) const {
        const int id = idx(i, j);
        const NodeCoeffs& c = p_.nodes[id];
        const Stencil3 sx = x_stencil(id, h);
        add(idx(i - 1, j), sx.lower);
        add(id, sx.centre - p_.r);
        add(idx(i + 1, j), sx.upper);
        if (kind_[id] == RowKind::edge_y) {
            const double w = c.vy + (p_.control == ControlAxis::y ? h * c.k : 0.0);
            if (j == 0) {
                add(idx(i, 1), w / dy_);
                add(id, -w / dy_);
            } else {
                add(id, w / dy_);
                add(idx(i, j - 1), -w / dy_);
            }
            return;
        }
        const Stencil3 sy = y_stencil(id, h);
        add(idx(i, j - 1), sy.lower);
        add(id, sy.centre);
        add(idx(i, j + 1), sy.upper);
        if (implicit_cross_ && c.dxy != 0.0) {
            const double cc = std::abs(c.dxy) / (2.0 * dx_ * dy_);
            add(id, 2.0 * cc);
            add(idx(i - 1, j), -cc);
            add(idx(i + 1, j), -cc);
            add(idx(i, j - 1), -cc);
            add(idx(i, j + 1), -cc);
            if (c.dxy > 0.0) {
                add(idx(i + 1, j + 1), cc);
                add(idx(i - 1, j - 1), cc);
            } else {
                add(idx(i + 1, j - 1), cc);
                add(idx(i - 1, j + 1), cc);
            }
        }
    }

    [[nodiscard]] double apply_L(const std::vector<double>& u, int i, int j, double h) const {
        double acc = 0.0;
        for_each_term(i, j, h, [&](int col, double coef) { acc += coef * u[col]; });
        return acc;
    }

    [[nodiscard]] double explicit_cross(const std::vector<double>& u, int i, int j) const {
        const double dxy = p_.nodes[idx(i, j)].dxy;
        if (dxy == 0.0) return 0.0;
        return dxy *
               (u[idx(i + 1, j + 1)] - u[idx(i + 1, j - 1)] - u[idx(i - 1, j + 1)] +
                u[idx(i - 1, j - 1)]) /
               (4.0 * dx_ * dy_);
    }

    [[nodiscard]] bool is_pde_row(int id) const noexcept {
        return kind_[id] == RowKind::interior || kind_[id] == RowKind::edge_y;
    }

    // Control-dependent part of L_h u at a PDE row.
    [[nodiscard]] double control_value(const std::vector<double>& u, int i, int j,
                                       double h) const {
        const int id = idx(i, j);
        if (p_.control == ControlAxis::x)
            return x_stencil(id, h).apply(u[idx(i - 1, j)], u[id], u[idx(i + 1, j)]);
        if (kind_[id] == RowKind::edge_y) {
            const double w = p_.nodes[id].vy + h * p_.nodes[id].k;
            return j == 0 ? w * (u[idx(i, 1)] - u[id]) / dy_
                          : w * (u[id] - u[idx(i, j - 1)]) / dy_;
        }
        return y_stencil(id, h).apply(u[idx(i, j - 1)], u[id], u[idx(i, j + 1)]);
    }

    void best_policy(const std::vector<double>& u, std::vector<unsigned char>& policy) const {
        const int nc = static_cast<int>(p_.candidates.size());
        if (nc == 1) return;
        const double slack = opt_.policy_switch_tol * detail::sup_abs(u);
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < ny_; ++j) {
                const int id = idx(i, j);
                if (!is_pde_row(id)) continue;
                int best = policy[id];
                double best_val = control_value(u, i, j, p_.candidates[best]);
                for (int q = 0; q < nc; ++q) {
                    if (q == best) continue;
                    const double val = control_value(u, i, j, p_.candidates[q]);
                    if (p_.maximize ? val > best_val + slack : val < best_val - slack) {
                        best = q;
                        best_val = val;
                    }
                }
                policy[id] = static_cast<unsigned char>(best);
            }
    }

    [[nodiscard]] SpMat assemble(const std::vector<unsigned char>& policy, double w) const {
        const int total = nx_ * ny_;
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<std::size_t>(total) * 10);
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < ny_; ++j) {
                const int id = idx(i, j);
                switch (kind_[id]) {
                    case RowKind::extrap_x: {
                        const int s = i == 0 ? 1 : -1;
                        trips.emplace_back(id, id, 1.0);
                        trips.emplace_back(id, idx(i + s, j), -2.0);
                        trips.emplace_back(id, idx(i + 2 * s, j), 1.0);
                        break;
                    }
                    case RowKind::extrap_y: {
                        const int s = j == 0 ? 1 : -1;
                        trips.emplace_back(id, id, 1.0);
                        trips.emplace_back(id, idx(i, j + s), -2.0);
                        trips.emplace_back(id, idx(i, j + 2 * s), 1.0);
                        break;
                    }
                    default: {
                        trips.emplace_back(id, id, 1.0);
                        for_each_term(i, j, p_.candidates[policy[id]], [&](int col, double coef) {
                            trips.emplace_back(id, col, -w * coef);
                        });
                    }
                }
            }
        SpMat a(total, total);
        a.setFromTriplets(trips.begin(), trips.end());
        a.makeCompressed();
        return a;
    }

    void factorize(const SpMat& a, const std::vector<unsigned char>& policy, double w) {
        if (!lu_) {
            lu_ = std::make_unique<Lu>();
            lu_->analyzePattern(a);
        }
        lu_->factorize(a);
        if (lu_->info() != Eigen::Success)
            throw SolverError("sparse LU factorization failed", 0.0, 0);
        cached_policy_ = policy;
        cached_w_ = w;
        ++factorizations_;
    }

    // res = rhs - A x for the system matrix of (policy, w), without assembling it.
    void residual_into(const Eigen::VectorXd& rhs, const std::vector<unsigned char>& policy,
                       double w, const Eigen::VectorXd& x, Eigen::VectorXd& res) const {
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < ny_; ++j) {
                const int id = idx(i, j);
                double ax = 0.0;
                switch (kind_[id]) {
                    case RowKind::extrap_x: {
                        const int s = i == 0 ? 1 : -1;
                        ax = x[id] - 2.0 * x[idx(i + s, j)] + x[idx(i + 2 * s, j)];
                        break;
                    }
                    case RowKind::extrap_y: {
                        const int s = j == 0 ? 1 : -1;
                        ax = x[id] - 2.0 * x[idx(i, j + s)] + x[idx(i, j + 2 * s)];
                        break;
                    }
                    default: {
                        double lx = 0.0;
                        for_each_term(i, j, p_.candidates[policy[id]],
                                      [&](int col, double coef) { lx += coef * x[col]; });
                        ax = x[id] - w * lx;
                    }
                }
                res[id] = rhs[id] - ax;
            }
    }

    // A policy change touches only a few rows, so the cached factorization
    // is first tried as a preconditioner for iterative refinement.
    void linear_solve(const Eigen::VectorXd& rhs, const std::vector<unsigned char>& policy,
                      double w, std::vector<double>& out) {
        if (!lu_ || cached_w_ != w) {
            factorize(assemble(policy, w), policy, w);
        } else if (cached_policy_ != policy) {
            const double target = 1e-14 * rhs.lpNorm<Eigen::Infinity>();
            Eigen::VectorXd x = lu_->solve(rhs);
            Eigen::VectorXd res(rhs.size());
            double last = std::numeric_limits<double>::infinity();
            for (int it = 0; it < kMaxRefinements; ++it) {
                residual_into(rhs, policy, w, x, res);
                const double norm = res.lpNorm<Eigen::Infinity>();
                if (norm <= target) {
                    out.assign(x.data(), x.data() + x.size());
                    return;
                }
                if (norm > 0.5 * last) break;
                last = norm;
                x += lu_->solve(res);
            }
            factorize(assemble(policy, w), policy, w);
        }
        const Eigen::VectorXd x = lu_->solve(rhs);
        out.assign(x.data(), x.data() + x.size());
    }

    // One implicit step of size h; returns the policy iteration count.
    int sub_step(std::vector<double>& u, std::vector<unsigned char>& policy, double theta,
                 double h, SolverReport& report) {
        const int total = nx_ * ny_;
        best_policy(u, policy);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(total);
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < ny_; ++j) {
                const int id = idx(i, j);
                if (!is_pde_row(id)) continue;
                double val = u[id];
                if (theta < 1.0)
                    val += (1.0 - theta) * h * apply_L(u, i, j, p_.candidates[policy[id]]);
                if (!implicit_cross_ && kind_[id] == RowKind::interior)
                    val += h * explicit_cross(u, i, j);
                rhs[id] = val;
            }

        const double w = theta * h;
        std::vector<double> cur = u;
        std::vector<double> next;
        std::vector<unsigned char> trial;
        int iters = 0;
        bool converged = false;
        while (iters < opt_.max_policy_iterations) {
            ++iters;
            linear_solve(rhs, policy, w, next);
            trial = policy;
            best_policy(next, trial);
            const double change = detail::sup_diff(next, cur);
            cur.swap(next);
            if (trial == policy || change <= opt_.tolerance * std::max(1.0, detail::sup_abs(cur))) {
                converged = true;
                break;
            }
            policy.swap(trial);
        }

        trial = policy;
        best_policy(cur, trial);
        double residual = 0.0;
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < ny_; ++j) {
                const int id = idx(i, j);
                if (!is_pde_row(id)) continue;
                const double lhs = cur[id] - w * apply_L(cur, i, j, p_.candidates[trial[id]]);
                residual = std::max(residual, std::abs(lhs - rhs[id]));
            }
        report.max_residual = std::max(report.max_residual, residual);
        if (!converged)
            throw SolverError("policy iteration did not converge in the 2-D solve", residual,
                              iters);
        u.swap(cur);
        return iters;
    }

    Problem p_;
    SolverOptions opt_;
    int nx_;
    int ny_;
    double dx_;
    double dy_;
    std::vector<RowKind> kind_;
    std::vector<double> reserve_;
    bool implicit_cross_ = true;
    double max_dxy_ = 0.0;
    std::unique_ptr<Lu> lu_;
    std::vector<unsigned char> cached_policy_;
    double cached_w_ = -1.0;
    int factorizations_ = 0;
};

void check_options(const SolverOptions& options) {
    if (options.max_policy_iterations < 1) throw ConfigError("max_policy_iterations must be >= 1");
    if (!(options.cross_cfl > 0.0)) throw ConfigError("cross_cfl must be positive");
}

std::vector<double> control_set(double lambda) {
    return lambda > 0.0 ? std::vector<double>{-lambda, lambda} : std::vector<double>{0.0};
}

std::vector<double> terminal_values(const Payoff& payoff, const GridSpec& grid) {
    const int ny = grid.n_y();
    std::vector<double> out(static_cast<std::size_t>(grid.x.n) * ny);
    for (int i = 0; i < grid.x.n; ++i) {
        const double g = payoff.at_log(grid.x.node(i));
        for (int j = 0; j < ny; ++j) out[static_cast<std::size_t>(i) * ny + j] = g;
    }
    return out;
}

Problem stochvol_problem(const StochVolSpec& spec, const Payoff& payoff, const GridSpec& grid) {
    spec.validate();
    grid.validate(4);
    if (!grid.two_d()) throw ConfigError("stochastic-volatility solve needs a sigma axis");
    if (std::abs(spec.rho) >= 1.0)
        throw DegenerateEllipticityError("|rho| = 1 makes the diffusion matrix singular");
    Problem p;
    p.grid = grid;
    p.r = spec.r;
    p.control = ControlAxis::y;
    p.y_one_sided = true;
    p.terminal = terminal_values(payoff, grid);
    const int nx = grid.x.n;
    const int ny = grid.y->n;
    const double rho_bar = std::sqrt(1.0 - spec.rho * spec.rho);
    p.nodes.resize(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        const double s = grid.y->node(j);
        const double be = spec.beta_fn(s);
        const double bb = spec.b(s);
        if (!(be > 0.0)) throw DomainError("beta(sigma) must be positive on the sigma axis");
        // edge rows carry no diffusion, so b may vanish there
        const bool edge = j == 0 || j == ny - 1;
        if (!(bb > 0.0) && !(edge && bb == 0.0))
            throw DegenerateEllipticityError("b(sigma) must be positive inside the sigma axis");
        NodeCoeffs c;
        c.dxx = 0.5 * be * be;
        c.vx = spec.r - 0.5 * be * be;
        c.dyy = 0.5 * bb * bb;
        c.vy = spec.a(s) - (spec.mu - spec.r) * spec.rho * bb / be;
        c.dxy = spec.rho * be * bb;
        c.k = rho_bar * bb;
        for (int i = 0; i < nx; ++i) p.nodes[static_cast<std::size_t>(i) * ny + j] = c;
    }
    return p;
}

PriceSurface blank_surface(const GridSpec& grid, Side side, EquationTag tag, double loading,
                           SecondAxis axis) {
    PriceSurface s;
    s.grid = grid;
    s.side = side;
    s.equation_tag = tag;
    s.sharpe_used = loading;
    s.second_axis = axis;
    return s;
}

}  // namespace

SolveResult solve_2d(const MarketSpec& spec, const Payoff& payoff, const SharpeParams& sharpe,
                     Side side, const GridSpec& grid, const SolverOptions& options) {
    spec.validate();
    sharpe.validate();
    check_options(options);
    grid.validate(4);
    if (!grid.two_d()) throw ConfigError("solve_2d needs an ln H axis");
    if (std::abs(spec.rho) >= 1.0)
        throw DegenerateEllipticityError("|rho| = 1 makes the diffusion matrix singular");

    Problem p;
    p.grid = grid;
    p.r = spec.r;
    p.control = ControlAxis::x;
    p.y_one_sided = false;
    p.maximize = side == Side::seller;
    p.candidates = control_set(side == Side::seller ? sharpe.alpha : sharpe.beta);
    p.terminal = terminal_values(payoff, grid);
    const int nx = grid.x.n;
    const int ny = grid.y->n;
    const double rho_bar = std::sqrt(1.0 - spec.rho * spec.rho);
    p.nodes.resize(static_cast<std::size_t>(nx) * ny);
    for (int i = 0; i < nx; ++i) {
        const double S = std::exp(grid.x.node(i));
        const double sig = spec.sigma(S);
        for (int j = 0; j < ny; ++j) {
            const double H = std::exp(grid.y->node(j));
            const double bb = spec.b(H);
            NodeCoeffs c;
            c.dxx = 0.5 * sig * sig;
            c.vx = mu_tilde(spec, S, H) - 0.5 * sig * sig;
            c.dyy = 0.5 * bb * bb;
            c.vy = spec.r - 0.5 * bb * bb;
            c.dxy = spec.rho * sig * bb;
            c.k = rho_bar * sig;
            p.nodes[static_cast<std::size_t>(i) * ny + j] = c;
        }
    }
    Engine engine(std::move(p), options);
    return engine.run(blank_surface(grid, side, EquationTag::basis_risk_2d,
                                    signed_loading(sharpe, side), SecondAxis::log_h));
}

SolveResult solve_stochvol_nonlinear(const StochVolSpec& spec, const Payoff& payoff,
                                     const SharpeParams& sharpe, Side side, const GridSpec& grid,
                                     const SolverOptions& options) {
    sharpe.validate();
    check_options(options);
    Problem p = stochvol_problem(spec, payoff, grid);
    p.maximize = side == Side::seller;
    p.candidates = control_set(side == Side::seller ? sharpe.alpha : sharpe.beta);
    Engine engine(std::move(p), options);
    return engine.run(blank_surface(grid, side, EquationTag::stochvol_nonlinear,
                                    signed_loading(sharpe, side), SecondAxis::sigma));
}

SolveResult solve_stochvol_linear(const StochVolSpec& spec, const Payoff& payoff,
                                  double alpha_signed, const GridSpec& grid,
                                  const SolverOptions& options) {
    if (!std::isfinite(alpha_signed)) throw ConfigError("alpha_signed must be finite");
    check_options(options);
    Problem p = stochvol_problem(spec, payoff, grid);
    p.maximize = true;
    p.candidates = {alpha_signed};
    Engine engine(std::move(p), options);
    return engine.run(blank_surface(grid, alpha_signed >= 0.0 ? Side::seller : Side::buyer,
                                    EquationTag::stochvol_linear, alpha_signed,
                                    SecondAxis::sigma));
}

}  // namespace sharpe
