#include <benchmark/benchmark.h>

#include <vector>

#include "genrl/env/jssp.hpp"
#include "genrl/rng.hpp"

namespace {

void BM_JsspEpisode(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  genrl::env::JsspEnv env({n, n, 1, 99});
  genrl::Rng rng(1);
  std::uint64_t seed = 0;
  std::int64_t steps = 0;
  for (auto _ : state) {
    env.reset(seed++);
    while (!env.done()) {
      const auto mask = env.action_mask();
      std::vector<int> legal;
      for (std::size_t a = 0; a < mask.size(); ++a)
        if (mask[a]) legal.push_back(static_cast<int>(a));
      benchmark::DoNotOptimize(env.step(legal[rng.below(legal.size())]));
      ++steps;
    }
  }
  state.SetItemsProcessed(steps);
}
BENCHMARK(BM_JsspEpisode)->Arg(6)->Arg(15);

void BM_BruteForceOptimal(benchmark::State& state) {
  const int jobs = static_cast<int>(state.range(0));
  const auto inst = genrl::env::generate_taillard(jobs, 3, 1, 9, 7);
  for (auto _ : state) benchmark::DoNotOptimize(genrl::env::brute_force_optimal(inst));
}
BENCHMARK(BM_BruteForceOptimal)->Arg(3)->Arg(4);

}  // namespace
