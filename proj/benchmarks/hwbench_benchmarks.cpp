#include "hwbench/analysis.hpp"
#include "hwbench/campaign.hpp"
#include "hwbench/cell_sim.hpp"
#include "hwbench/median_filter.hpp"
#include "hwbench/steady_state.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

using namespace hwbench;

static void BM_RunningMedianPush(benchmark::State& state) {
  RunningMedian median(static_cast<std::size_t>(state.range(0)));
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 1e-9);
  std::vector<double> input(4096);
  for (auto& v : input) v = noise(rng);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(median.push(input[i++ & 4095]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_RunningMedianPush)->Arg(2)->Arg(5)->Arg(20);

static void BM_SteadyCurrent(benchmark::State& state) {
  const GroundTruthCell cell;
  const ReferenceAtmosphere ref;
  const CellGeometry geom;
  double e = -0.6;
  for (auto _ : state) {
    benchmark::DoNotOptimize(steady_current(e, cell, ref, geom));
    e = e > 0.6 ? -0.6 : e + 0.01;
  }
}
BENCHMARK(BM_SteadyCurrent);

static void BM_SimulatorTick(benchmark::State& state) {
  PlantConfig cfg;
  cfg.initial_oven_c = 700.0;
  cfg.initial_cell_c = 692.0;
  CellSimulator sim(cfg, 1);
  sim.set_oven_setpoint(708.0);
  sim.apply_voltage(0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim.tick());
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SimulatorTick);

static void BM_FirstDetection(benchmark::State& state) {
  const SteadyStateParams p;
  std::vector<double> r;
  for (int t = 1; t <= 3600; ++t) r.push_back(1e-8 + 1e-6 * std::exp(-t / 60.0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(first_detection_time(r, p));
  }
}
BENCHMARK(BM_FirstDetection);

static std::vector<IVPoint> synthetic_curve() {
  const GroundTruthCell cell;
  const ReferenceAtmosphere ref;
  const CellGeometry geom;
  std::vector<IVPoint> curve;
  int index = 0;
  for (int k = 0; k <= 120; ++k) {
    const double e = -0.6 + 0.01 * k;
    curve.push_back({index++, e, steady_current(e, cell, ref, geom), Branch::Ascending, 60.0, false});
  }
  return curve;
}

static void BM_AnalyzeCurve(benchmark::State& state) {
  const auto curve = synthetic_curve();
  const ReferenceAtmosphere ref;
  const CellGeometry geom;
  for (auto _ : state) {
    benchmark::DoNotOptimize(analyze_curve(curve, geom, ref, kConstants, AnalysisOptions{}));
  }
}
BENCHMARK(BM_AnalyzeCurve);

static void BM_ShortCampaign(benchmark::State& state) {
  CampaignSetup s;
  s.plant.initial_oven_c = 700.0;
  s.plant.initial_cell_c = 692.0;
  s.loop.sp_oven_offset_c = 8.0;
  s.plan = ScanPlan{0.0, -0.1, 0.1, 0.0, 0.05, ScanMode::DUD};
  for (auto _ : state) {
    Campaign campaign(s);
    benchmark::DoNotOptimize(campaign.run());
  }
}
BENCHMARK(BM_ShortCampaign)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
