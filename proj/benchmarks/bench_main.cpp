#include <benchmark/benchmark.h>

#include <random>

#include "inflection/econometrics.hpp"
#include "inflection/market_model.hpp"
#include "inflection/matching.hpp"
#include "inflection/panel_synth.hpp"

using namespace inflection;

namespace {

ScenarioConfig bench_config(int workers) {
  const MarketSpec spec{10, 4.0, 1.0, MarketPotentialSpec::quadratic(5.0, 4.0)};
  ScenarioConfig cfg;
  cfg.markets = {{0, "control", spec, {0.3, 0.3, 0.3}}, {1, "treated", spec, {0.3, 0.6, 0.8}}};
  cfg.workers_per_market = workers;
  cfg.quantity_scale = 30.0;
  cfg.covariates.shift = 0.5;
  return cfg;
}

void BM_CournotEquilibrium(benchmark::State& state) {
  const MarketSpec spec{10, 4.0, 1.0, MarketPotentialSpec::logistic(20.0, 1.2, 0.3)};
  double a = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cournot_equilibrium(spec, AiLevel(a)));
    a = a > 0.999 ? 0.0 : a + 0.001;
  }
}
BENCHMARK(BM_CournotEquilibrium);

void BM_InflectionPoint(benchmark::State& state) {
  const MarketSpec spec{10, 4.0, 1.0, MarketPotentialSpec::logistic(20.0, 1.2, 0.3)};
  for (auto _ : state) benchmark::DoNotOptimize(inflection_point(spec));
}
BENCHMARK(BM_InflectionPoint);

// Unbalanced panels need several alternating-projection sweeps.
void BM_AbsorbUnbalanced(benchmark::State& state) {
  const int units = static_cast<int>(state.range(0));
  const int T = 16;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1.0);
  std::bernoulli_distribution keep(0.85);
  std::vector<int> unit;
  std::vector<int> time;
  for (int i = 0; i < units; ++i) {
    for (int t = 0; t < T; ++t) {
      if (t == 0 || keep(rng)) {
        unit.push_back(i);
        time.push_back(t);
      }
    }
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(unit.size()), 3);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(rng);
  for (auto _ : state) benchmark::DoNotOptimize(absorb_two_way(m, unit, time));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(unit.size()));
}
BENCHMARK(BM_AbsorbUnbalanced)->Arg(1000)->Arg(10000);

void BM_GeneratePanel(benchmark::State& state) {
  const auto cfg = bench_config(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(generate_panel(cfg));
}
BENCHMARK(BM_GeneratePanel)->Arg(1000);

void BM_DidFit(benchmark::State& state) {
  const Panel panel = generate_panel(bench_config(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(did_fit(panel, RegressionSpec{}));
}
BENCHMARK(BM_DidFit)->Arg(1000)->Arg(5000);

void BM_EventStudyFit(benchmark::State& state) {
  const Panel panel = generate_panel(bench_config(1000));
  for (auto _ : state) benchmark::DoNotOptimize(event_study_fit(panel, RegressionSpec{}));
}
BENCHMARK(BM_EventStudyFit);

void BM_RunPsm(benchmark::State& state) {
  const auto workers =
      generate_worker_covariates(bench_config(static_cast<int>(state.range(0))));
  MatchOptions opts;
  opts.caliper = 1e-3;
  for (auto _ : state) benchmark::DoNotOptimize(run_psm(workers, 1, 0, opts));
}
BENCHMARK(BM_RunPsm)->Arg(1000)->Arg(5000);

}  // namespace
BENCHMARK_MAIN();
