#include <benchmark/benchmark.h>

#include <vector>

#include "genrl/rng.hpp"
#include "genrl/vtrace.hpp"

namespace {

void BM_ComputeVTrace(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  genrl::Rng rng(1);
  std::vector<double> values(n + 1), rewards(n), ratios(n);
  for (auto& v : values) v = rng.uniform(-1.0, 1.0);
  for (auto& r : rewards) r = rng.uniform(-1.0, 1.0);
  for (auto& r : ratios) r = rng.uniform(0.1, 3.0);
  const genrl::vtrace::VTraceConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(genrl::vtrace::compute_vtrace(values, rewards, ratios, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_ComputeVTrace)->Arg(20)->Arg(100)->Arg(1000);

}  // namespace
