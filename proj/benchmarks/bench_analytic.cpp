#include "sharpe/analytic.hpp"

#include <benchmark/benchmark.h>

namespace {

const sharpe::MarketSpec kSpec = sharpe::MarketSpec::constant(0.07, 0.2, 0.077, 0.3, 0.9, 0.05);

void BM_NormalCdf(benchmark::State& state) {
    double x = -3.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(sharpe::std_normal_cdf(x));
        x = x > 3.0 ? -3.0 : x + 1e-3;
    }
}
BENCHMARK(BM_NormalCdf);

void BM_ClosedFormSellerCall(benchmark::State& state) {
    const auto payoff = sharpe::Payoff::call(100.0);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            sharpe::price_closed_form(kSpec, payoff, {0.2, 0.2}, sharpe::Side::seller, 100.0, 1.0));
}
BENCHMARK(BM_ClosedFormSellerCall);

}  // namespace

BENCHMARK_MAIN();
