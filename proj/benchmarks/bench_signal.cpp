#include <benchmark/benchmark.h>

#include "fcpred/mvar.hpp"
#include "fcpred/pli.hpp"
#include "fcpred/signal.hpp"
#include "fcpred/synth.hpp"

namespace fcpred {
namespace {

MultichannelRecording mvar_recording(int channels, long samples) {
  return gen_mvar_signal(random_stable_mvar(channels, 3, 42, 0.9, 256.0), samples);
}

void BM_BandpassZeroPhase(benchmark::State& state) {
  const auto rec = mvar_recording(static_cast<int>(state.range(0)), 256 * 60);
  const FilterSpec spec = FilterSpec::bandpass(0.1, 45.0, 4);
  for (auto _ : state) benchmark::DoNotOptimize(apply_filter(rec, spec));
  state.SetItemsProcessed(state.iterations() * rec.samples().size());
}
BENCHMARK(BM_BandpassZeroPhase)->Arg(4)->Arg(28)->Unit(benchmark::kMillisecond);

void BM_FitMvar(benchmark::State& state) {
  const auto rec = mvar_recording(static_cast<int>(state.range(0)), 256 * 60);
  for (auto _ : state) benchmark::DoNotOptimize(fit_mvar(rec, 5));
}
BENCHMARK(BM_FitMvar)->Arg(4)->Arg(28)->Unit(benchmark::kMillisecond);

void BM_SelectOrderBic(benchmark::State& state) {
  const auto rec = mvar_recording(8, 256 * 60);
  for (auto _ : state) benchmark::DoNotOptimize(select_order(rec, 10, OrderCriterion::kBic));
}
BENCHMARK(BM_SelectOrderBic)->Unit(benchmark::kMillisecond);

void BM_Dtf(benchmark::State& state) {
  const MvarModel model = fit_mvar(mvar_recording(static_cast<int>(state.range(0)), 256 * 60), 5);
  const std::vector<double> freqs = frequency_grid(1.0, 45.0, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(dtf(model, freqs, {1.0, 45.0}));
}
BENCHMARK(BM_Dtf)->Arg(4)->Arg(28)->Unit(benchmark::kMillisecond);

void BM_PliMatrix(benchmark::State& state) {
  const auto rec = mvar_recording(static_cast<int>(state.range(0)), 256 * 60);
  for (auto _ : state) benchmark::DoNotOptimize(pli_matrix(rec));
}
BENCHMARK(BM_PliMatrix)->Arg(4)->Arg(28)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace fcpred
