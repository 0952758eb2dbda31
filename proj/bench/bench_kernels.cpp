// serial vs parallel kernels
#include <benchmark/benchmark.h>

#include "cbn/intervene.hpp"
#include "cbn/kernels.hpp"
#include "cbn/model.hpp"

using namespace cbn;

namespace {

const GroundTruthCbn& net() {
  static const GroundTruthCbn m = [] {
    Admg g = random_identifiable_admg(14, 3, 3, 2, 0, 5);
    return random_cbn(g, 2, 0.25, 6);
  }();
  return m;
}

const SampleBatch& batch() {
  static const SampleBatch b = sample_observational(net(), 1 << 20, 7);
  return b;
}

Exec mode(const benchmark::State& s) { return s.range(0) ? Exec::parallel : Exec::serial; }

void BM_count_conditional(benchmark::State& s) {
  const auto& b = batch();
  const auto e = mode(s);
  for (auto _ : s) {
    auto t = kernels::dispatch_count(e, b, b.rows(), 5, {0, 1, 2, 3}, {{4, 1}});
    benchmark::DoNotOptimize(t);
  }
  s.SetItemsProcessed(s.iterations() * static_cast<int64_t>(b.rows()));
}

void BM_sample_observational(benchmark::State& s) {
  const auto e = mode(s);
  for (auto _ : s) {
    auto b = sample_observational(net(), 1 << 18, 11, e);
    benchmark::DoNotOptimize(b);
  }
  s.SetItemsProcessed(s.iterations() * (1 << 18));
}

void BM_exact_observational(benchmark::State& s) {
  const auto e = mode(s);
  for (auto _ : s) {
    auto p = exact_observational(net(), e);
    benchmark::DoNotOptimize(p);
  }
}

void BM_exact_interventional(benchmark::State& s) {
  const auto e = mode(s);
  for (auto _ : s) {
    auto p = exact_interventional(net(), 0, 1, e);
    benchmark::DoNotOptimize(p);
  }
}

}  // namespace

BENCHMARK(BM_count_conditional)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_sample_observational)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_exact_observational)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_exact_interventional)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
