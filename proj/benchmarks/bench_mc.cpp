#include "sharpe/montecarlo.hpp"

#include <benchmark/benchmark.h>

namespace {

const sharpe::MarketSpec kSpec = sharpe::MarketSpec::constant(0.07, 0.2, 0.077, 0.3, 0.9, 0.05);

void BM_PathRngNormal(benchmark::State& state) {
    sharpe::PathRng rng(1, 0);
    for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
}
BENCHMARK(BM_PathRngNormal);

void BM_PriceMc(benchmark::State& state) {
    sharpe::MCConfig c;
    c.n_paths = state.range(0);
    c.n_steps = static_cast<int>(state.range(1));
    c.n_threads = 1;
    for (auto _ : state) {
        const auto est =
            sharpe::price_mc(kSpec, sharpe::Payoff::call(100.0), {0.2, 0.2}, sharpe::Side::seller, c, 100.0, 100.0, 1.0);
        benchmark::DoNotOptimize(est.mean);
    }
    state.SetItemsProcessed(state.iterations() * c.n_paths * c.n_steps);
}
BENCHMARK(BM_PriceMc)->Args({100000, 1})->Args({100000, 50})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
