#include "sharpe/pde.hpp"

#include <cmath>

#include <benchmark/benchmark.h>

namespace {

const sharpe::MarketSpec kSpec = sharpe::MarketSpec::constant(0.07, 0.2, 0.077, 0.3, 0.9, 0.05);

// n_x by n_t = n_x grids
void BM_Solve1d(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto grid = sharpe::GridSpec::centred_1d(100.0, 2.5, n, n, 1.0);
    for (auto _ : state) {
        auto result = sharpe::solve_1d(kSpec, sharpe::Payoff::put(100.0), {0.2, 0.2}, sharpe::Side::seller, grid);
        benchmark::DoNotOptimize(result.first.values.data());
    }
    state.SetComplexityN(static_cast<benchmark::IterationCount>(n) * n);
}
BENCHMARK(BM_Solve1d)->Arg(101)->Arg(201)->Arg(401)->Unit(benchmark::kMillisecond)->Complexity();

void BM_Solve2d(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    auto grid = sharpe::GridSpec::centred_1d(100.0, 2.0, n, 20, 1.0);
    grid.y = sharpe::Axis{std::log(100.0) - 2.0, std::log(100.0) + 2.0, n};
    for (auto _ : state) {
        auto result = sharpe::solve_2d(kSpec, sharpe::Payoff::put(100.0), {0.2, 0.2}, sharpe::Side::seller, grid);
        benchmark::DoNotOptimize(result.first.values.data());
    }
}
BENCHMARK(BM_Solve2d)->Arg(41)->Arg(81)->Unit(benchmark::kMillisecond);

void BM_SolveStochvol(benchmark::State& state) {
    sharpe::StochVolSpec s;
    s.mu = 0.08;
    s.beta_fn = sharpe::CoefficientFn::tabulated({0.1, 0.4}, {0.1, 0.4});
    s.a = sharpe::CoefficientFn::tabulated({0.1, 0.4}, {0.2, -0.4});
    s.b = sharpe::CoefficientFn::tabulated({0.1, 0.15, 0.3, 0.4}, {0.0, 0.15, 0.15, 0.0});
    s.rho = -0.3;
    s.r = 0.05;
    auto grid = sharpe::GridSpec::centred_1d(100.0, 2.5, 101, 50, 1.0);
    grid.y = sharpe::Axis{0.1, 0.4, 41};
    for (auto _ : state) {
        auto result = sharpe::solve_stochvol_nonlinear(s, sharpe::Payoff::put(100.0), {0.2, 0.2},
                                                       sharpe::Side::seller, grid);
        benchmark::DoNotOptimize(result.first.values.data());
    }
}
BENCHMARK(BM_SolveStochvol)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
