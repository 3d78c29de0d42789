// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "harqopt/feedback_model.hpp"
#include "harqopt/mc_simulator.hpp"
#include "harqopt/numerics.hpp"
#include "harqopt/optimizer.hpp"

using namespace harqopt;

namespace {

numerics::PdfGrid bumpy(std::size_t n) {
    std::vector<double> m(n);
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += m[j] = std::exp(-static_cast<double>(j) / (n / 8.0));
    for (double& v : m) v /= total;
    return {0.0, 1.0 / static_cast<double>(n), std::move(m)};
}

void BM_Convolve(benchmark::State& state, bool serial) {
    const auto a = bumpy(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        auto c = serial ? numerics::convolve_serial(a, a) : numerics::convolve(a, a);
        benchmark::DoNotOptimize(c);
    }
}

struct DpFixture {
    DownlinkSpec dl = make_downlink_spec(3.0);
    RateGrid grid;
    FailureTable table;
    FeedbackErrorRates rates;
    explicit DpFixture(int units)
        : grid(RateGrid::make(1024, 4096, units, 1, units)),
          table(dl, grid),
          rates(error_rates_for(FeedbackSpec::from_db(-10.0, {0.5, 0.5, 0.5}))) {}
};

void BM_Dp(benchmark::State& state, bool serial) {
    const DpFixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto a = serial ? dp_rate_allocation_serial(10.0, f.rates, f.table, f.grid, 4)
                        : dp_rate_allocation(10.0, f.rates, f.table, f.grid, 4);
        benchmark::DoNotOptimize(a);
    }
}

HarqPolicy bench_policy() {
    HarqPolicy p;
    p.m_max = 4;
    p.rhos = {0.5, 0.5, 0.5, 0.5};
    p.alphas = {0.5, 0.5, 0.5};
    p.rho_min = 1.0 / 16.0;
    p.rho_max = 4.0;
    return p;
}

void BM_MonteCarlo(benchmark::State& state, bool serial) {
    const auto policy = bench_policy();
    const auto dl = make_downlink_spec(3.0);
    const auto fb = FeedbackSpec::from_db(-10.0, policy.alphas);
    const auto n = static_cast<std::uint64_t>(state.range(0));
    for (auto _ : state) {
        auto e = serial ? estimate_performance_serial(policy, dl, fb, n, 1, FeedbackMode::symbol_level)
                        : estimate_performance(policy, dl, fb, n, 1, FeedbackMode::symbol_level);
        benchmark::DoNotOptimize(e);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}

}  // namespace

BENCHMARK_CAPTURE(BM_Convolve, serial, true)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Convolve, openmp, false)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Dp, serial, true)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Dp, openmp, false)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_MonteCarlo, serial, true)->Arg(100'000)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_MonteCarlo, openmp, false)->Arg(100'000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
