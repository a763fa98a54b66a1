// Apache License, Version 2.0, refer to LICENSE.txt

#include <benchmark/benchmark.h>

#include <vector>

#include "itf/draws.hpp"
#include "itf/inference.hpp"
#include "itf/simgen.hpp"
#include "itf/stick.hpp"

namespace {

itf::MixedDataset scenario_data(std::size_t n) {
  return itf::generate(itf::default_scenario(2, n, 1)).data;
}

void BM_ItfSweep(benchmark::State& state) {
  const auto ds = scenario_data(static_cast<std::size_t>(state.range(0)));
  itf::SamplerConfig cfg;
  cfg.init = itf::InitMode::random;
  cfg.init_clusters = 10;
  itf::ItfSampler s(ds, itf::default_kernels(ds), cfg);
  itf::Rng rng(1);
  s.initialize(rng);
  for (auto _ : state) s.sweep(rng);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ItfSweep)->Arg(100)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_DpmSweep(benchmark::State& state) {
  const auto ds = scenario_data(static_cast<std::size_t>(state.range(0)));
  itf::SamplerConfig cfg;
  cfg.init = itf::InitMode::random;
  cfg.init_clusters = 10;
  itf::DpmSampler s(ds, itf::default_kernels(ds), cfg);
  itf::Rng rng(1);
  s.initialize(rng);
  for (auto _ : state) s.sweep(rng);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DpmSweep)->Arg(100)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_GemPredictive(benchmark::State& state) {
  std::vector<int> counts(static_cast<std::size_t>(state.range(0)));
  for (std::size_t k = 0; k < counts.size(); ++k) counts[k] = static_cast<int>(k % 7);
  for (auto _ : state) {
    double s = 0.0;
    for (std::size_t r = 0; r < counts.size(); ++r) s += itf::gem_log_predictive(counts, 0.8, r);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_GemPredictive)->Arg(8)->Arg(64)->Arg(512);

void BM_PredictiveDensity(benchmark::State& state) {
  const auto ds = scenario_data(300);
  itf::PosteriorDraws pd;
  pd.header.model = itf::ModelKind::itf;
  pd.header.kernels = itf::default_kernels(ds);
  itf::ItfSampler s(ds, pd.header.kernels);
  itf::Rng rng(2);
  s.initialize(rng);
  for (int t = 0; t < 200; ++t) {
    s.sweep(rng);
    if (t % 10 == 9) pd.draws.push_back(itf::snapshot(s, t, 0));
  }
  const itf::Predictor pred(pd, 1e-4);
  const auto y = itf::observation_row(ds, 0);
  for (auto _ : state) benchmark::DoNotOptimize(pred.log_density(y));
}
BENCHMARK(BM_PredictiveDensity)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
