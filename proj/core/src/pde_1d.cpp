#include "sharpe/error.hpp"
#include "sharpe/pde.hpp"

#include "fd_stencil.hpp"

#include <cmath>

namespace sharpe {

namespace {

using detail::Stencil3;

struct Coeffs1d {
    std::vector<double> D;
    std::vector<double> v;
    std::vector<double> k;
};

class Solver1d {
public:
    Solver1d(Coeffs1d c, double r, double dx, std::vector<double> candidates, bool maximize,
             double switch_tol)
        : c_(std::move(c)), r_(r), dx_(dx), hs_(std::move(candidates)), maximize_(maximize),
          switch_tol_(switch_tol), n_(static_cast<int>(c_.D.size())) {}

    [[nodiscard]] Stencil3 stencil(int i, double h) const noexcept {
        return detail::convection_diffusion(c_.D[i], c_.v[i] + h * c_.k[i], dx_);
    }

    // Optimal control index per interior node for the field u.
    void best_policy(const std::vector<double>& u, std::vector<int>& policy) const {
        const double slack = switch_tol_ * detail::sup_abs(u);
        for (int i = 1; i < n_ - 1; ++i) {
            int best = policy[i];
            double best_val = stencil(i, hs_[best]).apply(u[i - 1], u[i], u[i + 1]);
            for (int q = 0; q < static_cast<int>(hs_.size()); ++q) {
                if (q == best) continue;
                const double val = stencil(i, hs_[q]).apply(u[i - 1], u[i], u[i + 1]);
                if (maximize_ ? val > best_val + slack : val < best_val - slack) {
                    best = q;
                    best_val = val;
                }
            }
            policy[i] = best;
        }
    }

    [[nodiscard]] double apply_L(const std::vector<double>& u, const std::vector<int>& policy,
                                 int i) const noexcept {
        return stencil(i, hs_[policy[i]]).apply(u[i - 1], u[i], u[i + 1]) - r_ * u[i];
    }

    void fill_boundaries(std::vector<double>& u) const noexcept {
        if (n_ == 3) {
            u[0] = u[1];
            u[2] = u[1];
            return;
        }
        u[0] = 2.0 * u[1] - u[2];
        u[n_ - 1] = 2.0 * u[n_ - 2] - u[n_ - 3];
    }

    // Solve (I - w L_policy) u = rhs on the interior, boundaries eliminated.
    void linear_solve(const std::vector<double>& rhs, const std::vector<int>& policy, double w,
                      std::vector<double>& u) const {
        const int m = n_ - 2;
        std::vector<double> lo(m), di(m), up(m), b(m);
        for (int k = 0; k < m; ++k) {
            const int i = k + 1;
            const Stencil3 s = stencil(i, hs_[policy[i]]);
            lo[k] = -w * s.lower;
            di[k] = 1.0 - w * (s.centre - r_);
            up[k] = -w * s.upper;
            b[k] = rhs[i];
        }
        if (m == 1) {
            di[0] += lo[0] + up[0];
        } else {
            // u_0 = 2 u_1 - u_2 and u_{n-1} = 2 u_{n-2} - u_{n-3}
            di[0] += 2.0 * lo[0];
            up[0] -= lo[0];
            di[m - 1] += 2.0 * up[m - 1];
            lo[m - 1] -= up[m - 1];
        }
        detail::thomas_solve(std::move(lo), std::move(di), up, b);
        for (int k = 0; k < m; ++k) u[k + 1] = b[k];
        fill_boundaries(u);
    }

    [[nodiscard]] int size() const noexcept { return n_; }

private:
    Coeffs1d c_;
    double r_;
    double dx_;
    std::vector<double> hs_;
    bool maximize_;
    double switch_tol_;
    int n_;
};

}  // namespace

SolveResult solve_1d(const MarketSpec& spec, const Payoff& payoff, const SharpeParams& sharpe,
                     Side side, const GridSpec& grid, const SolverOptions& options) {
    spec.validate();
    sharpe.validate();
    grid.validate(3);
    if (grid.two_d()) throw ConfigError("solve_1d takes a grid without a second axis");
    if (!spec.h_independent())
        throw UnsupportedError("traded-asset coefficients depend on H; use solve_2d");
    if (options.max_policy_iterations < 1) throw ConfigError("max_policy_iterations must be >= 1");

    const int n_x = grid.x.n;
    const double dx = grid.x.step();
    const double rho_bar = std::sqrt(1.0 - spec.rho * spec.rho);
    Coeffs1d c{std::vector<double>(n_x), std::vector<double>(n_x), std::vector<double>(n_x)};
    for (int i = 0; i < n_x; ++i) {
        const double S = std::exp(grid.x.node(i));
        const double sig = spec.sigma(S);
        const double mt = mu_tilde(spec, S, 1.0);
        c.D[i] = 0.5 * sig * sig;
        c.v[i] = mt - 0.5 * sig * sig;
        c.k[i] = rho_bar * sig;
    }

    const double lambda = side == Side::seller ? sharpe.alpha : sharpe.beta;
    std::vector<double> hs = lambda > 0.0 ? std::vector<double>{-lambda, lambda}
                                          : std::vector<double>{0.0};
    const Solver1d solver(std::move(c), spec.r, dx, std::move(hs), side == Side::seller,
                          options.policy_switch_tol);

    PriceSurface surface;
    surface.grid = grid;
    surface.side = side;
    surface.equation_tag = EquationTag::basis_risk_1d;
    surface.sharpe_used = signed_loading(sharpe, side);
    surface.second_axis = SecondAxis::none;
    surface.values.assign(static_cast<std::size_t>(grid.n_t + 1) * n_x, 0.0);

    SolverReport report;
    report.boundary_scheme = "linear extrapolation in ln S";
    report.cross_term_scheme = "none";
    report.policy_iterations.reserve(grid.n_t);

    std::vector<double> prev(n_x), cur(n_x), next(n_x), rhs(n_x, 0.0);
    for (int i = 0; i < n_x; ++i) prev[i] = payoff.at_log(grid.x.node(i));
    std::copy(prev.begin(), prev.end(),
              surface.values.begin() + static_cast<std::ptrdiff_t>(grid.n_t) * n_x);

    const double dt = grid.dt();
    std::vector<int> policy(n_x, 0);
    std::vector<int> trial(n_x, 0);
    for (int n = grid.n_t - 1; n >= 0; --n) {
        const int step = grid.n_t - 1 - n;
        const double theta = options.scheme == TimeScheme::crank_nicolson &&
                                     step >= options.rannacher_steps
                                 ? 0.5
                                 : 1.0;
        solver.best_policy(prev, policy);
        for (int i = 1; i < n_x - 1; ++i) {
            rhs[i] = prev[i];
            if (theta < 1.0) rhs[i] += (1.0 - theta) * dt * solver.apply_L(prev, policy, i);
        }

        const double w = theta * dt;
        cur = prev;
        int iters = 0;
        bool converged = false;
        while (iters < options.max_policy_iterations) {
            ++iters;
            solver.linear_solve(rhs, policy, w, next);
            trial = policy;
            solver.best_policy(next, trial);
            const double change = detail::sup_diff(next, cur);
            cur.swap(next);
            if (trial == policy ||
                change <= options.tolerance * std::max(1.0, detail::sup_abs(cur))) {
                converged = true;
                break;
            }
            policy.swap(trial);
        }

        // residual of the discrete HJB equation under the optimal policy for cur
        trial = policy;
        solver.best_policy(cur, trial);
        double residual = 0.0;
        for (int i = 1; i < n_x - 1; ++i)
            residual = std::max(residual,
                                std::abs(cur[i] - w * solver.apply_L(cur, trial, i) - rhs[i]));
        report.max_residual = std::max(report.max_residual, residual);
        report.policy_iterations.push_back(iters);
        if (!converged)
            throw SolverError("policy iteration did not converge in the 1-D solve", residual, iters);

        std::copy(cur.begin(), cur.end(),
                  surface.values.begin() + static_cast<std::ptrdiff_t>(n) * n_x);
        prev.swap(cur);
    }
    return {std::move(surface), std::move(report)};
}

}  // namespace sharpe
