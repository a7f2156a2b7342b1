// Microbenchmarks for the paths the experiment spends its time in: window
// encoding, the forward pass, the fused loss/gradient step, and the
// diagonal perturbation. Run with --benchmark_min_time=... to tighten noise.

#include <benchmark/benchmark.h>

#include <vector>

#include "advforge/attack.hpp"
#include "advforge/cnn.hpp"
#include "advforge/datagen.hpp"
#include "advforge/dataset.hpp"
#include "advforge/gaf.hpp"
#include "advforge/rng.hpp"

namespace {

using namespace advforge;

GeneratorConfig small_config() {
  GeneratorConfig cfg;
  cfg.per_class = 8;
  cfg.seed = 17;
  return cfg;
}

void BM_EncodeWindow(benchmark::State& state) {
  auto windows = build_windows(small_config());
  std::size_t i = 0;
  for (auto _ : state) {
    GafTensor t = encode_window(windows[i % windows.size()].first);
    benchmark::DoNotOptimize(t.values.data());
    ++i;
  }
}
BENCHMARK(BM_EncodeWindow);

void BM_Forward(benchmark::State& state) {
  Dataset ds = build_dataset(small_config());
  CnnModel model = init_model(7);
  std::size_t i = 0;
  for (auto _ : state) {
    Prediction p = forward(model, ds.items[i % ds.items.size()].tensor);
    benchmark::DoNotOptimize(p.probabilities.data());
    ++i;
  }
}
BENCHMARK(BM_Forward);

void BM_LossAndGrad(benchmark::State& state) {
  Dataset ds = build_dataset(small_config());
  CnnModel model = init_model(7);
  std::vector<std::size_t> batch(std::size_t(state.range(0)));
  for (std::size_t k = 0; k < batch.size(); ++k) batch[k] = k % ds.items.size();
  std::vector<double> grad(CnnModel::kParamCount);
  for (auto _ : state) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = loss_and_grad(model, ds.items, batch, grad);
    benchmark::DoNotOptimize(loss);
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossAndGrad)->Arg(1)->Arg(16)->Arg(64);

void BM_PerturbDiagonals(benchmark::State& state) {
  auto windows = build_windows(small_config());
  GafTensor t = encode_window(windows[0].first);
  AttackConfig cfg;
  Rng rng(99);
  for (auto _ : state) {
    GafTensor next = perturb_diagonals(t, cfg, rng);
    benchmark::DoNotOptimize(next.values.data());
  }
}
BENCHMARK(BM_PerturbDiagonals);

}  // namespace

BENCHMARK_MAIN();
