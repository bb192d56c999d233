// Serial reference path vs OpenMP path for the fleet-level kernels.
// Arg 0 selects Execution::serial, 1 selects Execution::parallel.
#include <benchmark/benchmark.h>

#include <rofleet/backtest.hpp>
#include <rofleet/sim.hpp>
#include <rofleet/spatial.hpp>
#include <rofleet/stats.hpp>
#include <rofleet/trend.hpp>

namespace {

using namespace rofleet;

Execution policy(const benchmark::State& state) {
    return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void label(benchmark::State& state) {
    state.SetLabel(state.range(0) == 0 ? "serial" : "parallel x" + std::to_string(max_threads()));
}

SimulationSpec fleet_spec() {
    SimulationSpec spec;
    spec.devices = 20;
    spec.ros_per_device = 8;
    spec.cadence = Duration{7200};
    spec.span = kDay * 280;
    spec.profile.total_shift = -6.4e-4;
    spec.profile.horizon = spec.span;
    spec.seed = 11;
    return spec;
}

const FleetDataset& trended() {
    static const FleetDataset data = [] {
        const FleetDataset raw = simulate_fleet(fleet_spec());
        TrendOptions opts;
        opts.ewma.half_life = half_life_in_samples(kDay * 30, raw.sample_period);
        return trend_fleet(raw, opts);
    }();
    return data;
}

void BM_SimulateFleet(benchmark::State& state) {
    const auto spec = fleet_spec();
    for (auto _ : state) benchmark::DoNotOptimize(simulate_fleet(spec, policy(state)));
    label(state);
}

void BM_TrendFleet(benchmark::State& state) {
    const FleetDataset raw = simulate_fleet(fleet_spec());
    TrendOptions opts;
    opts.method = TrendMethod::loess;
    for (auto _ : state) benchmark::DoNotOptimize(trend_fleet(raw, opts, policy(state)));
    label(state);
}

void BM_FleetTrendTest(benchmark::State& state) {
    const auto& data = trended();
    for (auto _ : state) benchmark::DoNotOptimize(fleet_trend_test(data, 0.01, policy(state)));
    label(state);
}

void BM_FleetBacktest(benchmark::State& state) {
    const auto& data = trended();
    BacktestConfig cfg;
    cfg.horizon_days = 60;
    cfg.initial_train_days = 40;
    cfg.step = 48;
    cfg.model = LagRegressionConfig{{1, 2}, false, {1}};
    for (auto _ : state) benchmark::DoNotOptimize(fleet_backtest(data, cfg, policy(state)));
    label(state);
}

void BM_Interpolate(benchmark::State& state) {
    auto spec = fleet_spec();
    spec.ros_per_device = 100;
    const auto medians = location_medians(fleet_epoch_shifts(simulate_shutdown(spec, 20)));
    for (auto _ : state) benchmark::DoNotOptimize(interpolate(medians, 201, policy(state)));
    label(state);
}

BENCHMARK(BM_SimulateFleet)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrendFleet)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FleetTrendTest)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_FleetBacktest)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Interpolate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
