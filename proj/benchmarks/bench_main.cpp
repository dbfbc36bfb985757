#include <benchmark/benchmark.h>

#include <random>

#include "maskguard/calibration.hpp"
#include "maskguard/evaluation.hpp"
#include "maskguard/pipeline.hpp"

using namespace maskguard;

namespace {

ScenarioCase masked_case(double duration) {
  const Network net = default_network();
  return make_internal_fma_case(net, FaultSpec{FaultKind::AG, 0.3, 10.0, 0.4, std::nullopt}, duration,
                                35.0, 1);
}

void BM_SolveFaulted(benchmark::State& state) {
  const Network net = default_network();
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_faulted(net, FaultLocation{FaultSite::ProtectedLine, 0.3},
                                           FaultKind::ABG, 10.0));
  }
}
BENCHMARK(BM_SolveFaulted);

void BM_GenerateStream(benchmark::State& state) {
  const ScenarioCase c = masked_case(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(realize(c));
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_GenerateStream)->Unit(benchmark::kMillisecond);

void BM_MismatchIndexUpdate(benchmark::State& state) {
  MismatchIndex mi(make_pipeline_config(default_network()).mi);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(1.0, 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(mi.update(noise(rng)));
}
BENCHMARK(BM_MismatchIndexUpdate);

void BM_MlpPredict(benchmark::State& state) {
  const MlpModel model({kFeatureCount, 310, 90, 2}, 0.0, 1);
  std::vector<double> x(kFeatureCount, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(x));
}
BENCHMARK(BM_MlpPredict);

void BM_Pipeline(benchmark::State& state) {
  const Network net = default_network();
  const Stream s = realize(masked_case(1.0));
  auto model = std::make_shared<MlpModel>(std::vector<std::size_t>{kFeatureCount, 310, 90, 2}, 0.0, 1);
  const PipelineConfig cfg = make_pipeline_config(net, model);
  for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(s, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.size()));
}
BENCHMARK(BM_Pipeline)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
