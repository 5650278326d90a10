#include <benchmark/benchmark.h>

#include <vector>

#include "seasoncast/features.hpp"
#include "seasoncast/model.hpp"
#include "seasoncast/nn.hpp"
#include "seasoncast/random.hpp"
#include "seasoncast/synth.hpp"
#include "seasoncast/window_transforms.hpp"

namespace {

using namespace seasoncast;

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng, 100.0, 10.0);
  return v;
}

void BM_ApplyTransforms(benchmark::State& state) {
  const auto window = random_vector(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_transforms(window, {true, true}));
  }
}
BENCHMARK(BM_ApplyTransforms)->Arg(13)->Arg(25)->Arg(256);

void BM_MlpForward(benchmark::State& state) {
  Rng rng(2);
  const std::vector<std::size_t> sizes{64, 32, 12};
  const Mlp mlp = Mlp::create(static_cast<std::size_t>(state.range(0)), sizes, 0.2, rng);
  const auto input = random_vector(mlp.input_dim(), 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mlp.forward(input, false, rng));
  }
}
BENCHMARK(BM_MlpForward)->Arg(100)->Arg(400);

void BM_MlpForwardBackward(benchmark::State& state) {
  Rng rng(4);
  const std::vector<std::size_t> sizes{64, 32, 12};
  const Mlp mlp = Mlp::create(static_cast<std::size_t>(state.range(0)), sizes, 0.2, rng);
  const auto input = random_vector(mlp.input_dim(), 5);
  const std::vector<double> upstream(12, 1.0);
  MlpGrad grads = mlp.zero_grad();
  for (auto _ : state) {
    MlpCache cache;
    mlp.forward(input, true, rng, &cache);
    benchmark::DoNotOptimize(mlp.backward(cache, upstream, grads));
  }
}
BENCHMARK(BM_MlpForwardBackward)->Arg(100)->Arg(400);

void BM_EnsembleStats(benchmark::State& state) {
  EnsembleForecast f;
  f.n_members = 50;
  f.n_leads = 16;
  f.members = random_vector(f.n_members * f.n_leads, 6);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ensemble_stats(f));
  }
}
BENCHMARK(BM_EnsembleStats);

void BM_ModelForwardDesk(benchmark::State& state) {
  SynthConfig sc;
  sc.n_stores = 2;
  sc.n_products = 2;
  const auto art = generate(sc);
  const ModelConfig cfg = desk_config();
  const auto set = assemble_samples(art.dataset, cfg.features, cfg.target_series(), cfg.lookback, cfg.horizon);
  const LrlSnnModel model(cfg, 7);
  Rng rng(8);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.forward(set.samples[i++ % set.samples.size()], false, rng));
  }
}
BENCHMARK(BM_ModelForwardDesk);

}  // namespace
BENCHMARK_MAIN();
