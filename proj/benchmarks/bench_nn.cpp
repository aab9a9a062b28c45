#include <benchmark/benchmark.h>

#include <vector>

#include "genrl/nn/graph.hpp"
#include "genrl/nn/matrix.hpp"
#include "genrl/nn/mlp.hpp"
#include "genrl/rng.hpp"

namespace {

genrl::nn::Matrix random_matrix(std::size_t r, std::size_t c, genrl::Rng& rng) {
  genrl::nn::Matrix m(r, c);
  for (auto& x : m.data) x = rng.uniform(-1.0, 1.0);
  return m;
}

void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  genrl::Rng rng(1);
  const auto a = random_matrix(n, n, rng);
  const auto b = random_matrix(n, n, rng);
  genrl::nn::Matrix out(n, n);
  for (auto _ : state) {
    genrl::nn::gemm_accumulate(a, b, out);
    benchmark::DoNotOptimize(out.data.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Gemm)->Arg(32)->Arg(64)->Arg(128);

void BM_MlpPredictBatch(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  genrl::Rng rng(2);
  const genrl::nn::Mlp mlp({{36, 64, 64, 6}, genrl::nn::Activation::kRelu}, rng);
  const auto input = random_matrix(batch, 36, rng);
  for (auto _ : state) benchmark::DoNotOptimize(mlp.predict_batch(input));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_MlpPredictBatch)->Arg(1)->Arg(32)->Arg(256);

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  genrl::Rng rng(3);
  genrl::nn::Mlp mlp({{36, 64, 64, 6}, genrl::nn::Activation::kRelu}, rng);
  const auto input = random_matrix(batch, 36, rng);
  for (auto _ : state) {
    genrl::nn::Graph g;
    const auto loss = g.mean(mlp.forward(g, g.constant(input)));
    g.backward(loss);
    for (auto* p : mlp.parameters()) p->zero_grad();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}
BENCHMARK(BM_MlpForwardBackward)->Arg(32)->Arg(256);

}  // namespace
