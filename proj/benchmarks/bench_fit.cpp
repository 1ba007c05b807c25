#include "despd/diag/validation.hpp"
#include "despd/irls.hpp"
#include "despd/lambda_selection.hpp"
#include "despd/sim/mixture.hpp"
#include "despd/uncertainty.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace despd;

std::vector<OptionQuote> replicate(std::uint64_t seed) {
  return sim::generate_replicate(sim::MixtureSpec::reference(), sim::reference_strikes(),
                                 {sim::NoiseScale::Full, seed});
}

void BM_FixedLambdaFit(benchmark::State& state) {
  const auto q = replicate(1);
  const auto grid = SupportGrid::covering(q, static_cast<std::size_t>(state.range(0)));
  FitConfig cfg;
  cfg.lambda_policy = FixedLambda{1e4};
  for (auto _ : state) benchmark::DoNotOptimize(fit(q, grid, cfg));
}
BENCHMARK(BM_FixedLambdaFit)->Arg(50)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_SchallSelection(benchmark::State& state) {
  const auto q = replicate(2);
  const auto grid = SupportGrid::covering(q, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(select_lambda_schall(q, grid, FitConfig{}));
}
BENCHMARK(BM_SchallSelection)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_AicSweep(benchmark::State& state) {
  const auto q = replicate(3);
  const auto grid = SupportGrid::covering(q, 200);
  FitConfig cfg;
  cfg.lambda_policy = AicGrid::linspace(-4, 10, 57);
  for (auto _ : state) benchmark::DoNotOptimize(select_lambda_aic(q, grid, cfg));
}
BENCHMARK(BM_AicSweep)->Unit(benchmark::kMillisecond);

void BM_HatTrace(benchmark::State& state) {
  const auto q = replicate(4);
  FitConfig cfg;
  cfg.lambda_policy = FixedLambda{1e4};
  const SpdFit f = fit(q, SupportGrid::covering(q, static_cast<std::size_t>(state.range(0))), cfg);
  for (auto _ : state) benchmark::DoNotOptimize(hat_matrix_trace(f));
}
BENCHMARK(BM_HatTrace)->Arg(200)->Arg(400)->Unit(benchmark::kMicrosecond);

void BM_Loocv(benchmark::State& state) {
  const auto q = replicate(5);
  const SpdFit f = fit(q, SupportGrid::covering(q, 200), FitConfig{});
  for (auto _ : state) benchmark::DoNotOptimize(diag::loocv_rmse(f, FitConfig{}, {false, 1}));
}
BENCHMARK(BM_Loocv)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
