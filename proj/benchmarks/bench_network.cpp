#include <benchmark/benchmark.h>

#include <random>

#include "pcmsim/metrics.hpp"
#include "pcmsim/snn.hpp"
#include "pcmsim/trainer.hpp"

using namespace pcmsim;

namespace {

const std::vector<std::size_t> kTopology{30, 64, 64, 2};

LifConfig bench_lif() {
  LifConfig lif;
  lif.t_steps = 100;
  lif.beta = 0.95;
  lif.gain_scale = 4.0;
  return lif;
}

std::vector<SpikeTrain> random_inputs(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::bernoulli_distribution b(0.04);
  std::vector<SpikeTrain> out;
  for (std::size_t k = 0; k < count; ++k) {
    SpikeTrain s(100, kTopology.front());
    for (auto& x : s.flat()) x = b(rng);
    out.push_back(std::move(s));
  }
  return out;
}

RealWeightTensor random_wr(std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> d(0.0, 1.0);
  RealWeightTensor w;
  for (std::size_t l = 0; l + 1 < kTopology.size(); ++l) {
    Matrix<double> m(kTopology[l], kTopology[l + 1]);
    for (auto& x : m.flat()) x = d(rng);
    w.push_back(std::move(m));
  }
  return w;
}

void BM_Forward(benchmark::State& state) {
  SpikingNetwork net(kTopology, bench_lif());
  const auto w = binarize(random_wr(1));
  const auto in = random_inputs(1, 2).front();
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(w, in));
}
BENCHMARK(BM_Forward);

void BM_LossAndGrad(benchmark::State& state) {
  SpikingNetwork net(kTopology, bench_lif());
  const auto w = binarize(random_wr(3));
  const auto in = random_inputs(1, 4).front();
  std::vector<Matrix<double>> grads;
  for (const auto& m : w) grads.emplace_back(m.rows(), m.cols());
  const SpikeFunction f{5.0, false, true};
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad(net, w, in, 1, f, 0.01, &grads));
}
BENCHMARK(BM_LossAndGrad);

void BM_HardwareEnsemble(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  SpikingNetwork net(kTopology, bench_lif());
  const auto w_r = random_wr(5);
  const auto inputs = random_inputs(16, 6);
  HardwareConfig hw;
  for (auto _ : state) {
    HardwareSource src(w_r, hw, 7);
    benchmark::DoNotOptimize(ensemble_predict(src, net, inputs, k));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(k * inputs.size()));
}
BENCHMARK(BM_HardwareEnsemble)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
