#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "sentinel/detector.hpp"
#include "sentinel/dynsim.hpp"
#include "sentinel/rmt.hpp"
#include "sentinel/test_function.hpp"

using namespace sentinel;

static void BM_CovarianceEigen(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto g = rmt::gen_test_matrix(n, 4 * n, rmt::Distribution::gaussian, 1);
    for (auto _ : state) benchmark::DoNotOptimize(rmt::eigenvalues_sym(rmt::covariance(g)));
}
BENCHMARK(BM_CovarianceEigen)->Arg(20)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_LorenzSimulation(benchmark::State& state) {
    dynsim::SimConfig cfg;
    cfg.sample_rate = 100.0;
    cfg.duration = 180.0;
    cfg.initial_state = {1.0, 1.0, 1.0};
    for (auto _ : state) benchmark::DoNotOptimize(dynsim::simulate_lorenz({}, {}, cfg));
}
BENCHMARK(BM_LorenzSimulation)->Unit(benchmark::kMillisecond);

static void BM_LesSeriesLorenz(benchmark::State& state) {
    dynsim::SimConfig cfg;
    cfg.sample_rate = 100.0;
    cfg.duration = 180.0;
    cfg.initial_state = {1.0, 1.0, 1.0};
    const auto ts = dynsim::simulate_lorenz({}, {}, cfg);
    const std::vector<std::string> ids{"1", "2", "3"};
    for (auto _ : state) {
        benchmark::DoNotOptimize(detect::les_series(ts, {2000, 100}, TestFunction::power(2), false, ids));
    }
}
BENCHMARK(BM_LesSeriesLorenz)->Unit(benchmark::kMillisecond);

static void BM_LesVariance(benchmark::State& state) {
    const auto phi = TestFunction::parse(state.range(0) == 0 ? "square" : "log");
    for (auto _ : state) benchmark::DoNotOptimize(rmt::les_variance(phi, {0.25, 0.0}));
}
BENCHMARK(BM_LesVariance)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
