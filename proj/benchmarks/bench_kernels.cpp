#include <benchmark/benchmark.h>

#include <vector>

#include "milattn/datagen.hpp"
#include "milattn/metrics.hpp"
#include "milattn/model.hpp"

namespace milattn {
namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  for (double& v : m.values()) v = standard_normal(rng);
  return m;
}

ModelConfig bench_config(std::size_t k, std::size_t l) {
  ModelConfig c;
  c.embed_dim = k;
  c.attention_dim = l;
  c.featurizer_depth = 1;
  c.classifier_depth = 2;
  return c;
}

void BM_AffineRows(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Matrix x = random_matrix(m, 16, rng);
  const Matrix w = random_matrix(16, 16, rng);
  const std::vector<double> b(16, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(affine_rows(x, w, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(m));
}
BENCHMARK(BM_AffineRows)->Arg(250)->Arg(1000);

void BM_ForwardBag(benchmark::State& state) {
  const auto model = init_model(bench_config(static_cast<std::size_t>(state.range(0)), 8), 1);
  Rng rng(2);
  const Matrix bag = random_matrix(250, 4, rng);
  for (auto _ : state) benchmark::DoNotOptimize(forward_bag(model, bag));
}
BENCHMARK(BM_ForwardBag)->Arg(8)->Arg(64);

void BM_LossAndGrads(benchmark::State& state) {
  const auto model = init_model(bench_config(8, 4), 3);
  DatasetOptions o;
  o.sizes = {static_cast<std::size_t>(state.range(0)), 1, 1};
  const auto data = generate_dataset(Modality::Gaussian, ProblemKind::MIL, o, 3, GaussianSpec{});
  std::vector<const Bag*> batch;
  for (const auto& b : data.train) batch.push_back(&b);
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grads(model, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossAndGrads)->Arg(10)->Arg(100);

void BM_Auroc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(4);
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = uniform01(rng);
    y[i] = static_cast<int>(i % 2);
  }
  for (auto _ : state) benchmark::DoNotOptimize(auroc(s, y));
}
BENCHMARK(BM_Auroc)->Arg(250)->Arg(10000);

}  // namespace
}  // namespace milattn
