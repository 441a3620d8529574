#include <benchmark/benchmark.h>

#include <random>

#include "pcmsim/crossbar.hpp"
#include "pcmsim/sampler.hpp"
#include "pcmsim/weight_mapper.hpp"

using namespace pcmsim;

namespace {

Matrix<double> random_weights(std::size_t n, std::size_t m, std::uint64_t seed) {
  Matrix<double> w(n, m);
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (auto& x : w.flat()) x = u(rng);
  return w;
}

void BM_ProgramPlanes(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto w = random_weights(n, n, 1);
  const NoiseModelConfig noise;
  const MappingConfig map;
  const auto prog = build_plane_program(w, 16, map, noise);
  CrossbarConfig cfg;
  CrossbarCore core(n, n, cfg, noise, map.kappa, 2);
  for (auto _ : state) {
    core.program_planes(prog);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * (n + 16)));
}
BENCHMARK(BM_ProgramPlanes)->Arg(64)->Arg(256);

void BM_DrawSample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto l = static_cast<std::size_t>(state.range(1));
  const auto w = random_weights(n, n, 3);
  const NoiseModelConfig noise;
  const MappingConfig map;
  CrossbarConfig cfg;
  cfg.l_noise_cols = l;
  CrossbarCore core(n, n, cfg, noise, map.kappa, 4);
  core.program_planes(build_plane_program(w, l, map, noise));
  for (auto _ : state) benchmark::DoNotOptimize(core.draw_sample(0));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}
BENCHMARK(BM_DrawSample)->Args({64, 16})->Args({256, 1})->Args({256, 16});

void BM_SoftwareSampler(benchmark::State& state) {
  SamplerSpec spec;
  spec.kind = static_cast<SamplerKind>(state.range(0));
  const auto w = random_weights(256, 256, 5);
  Rng rng(6);
  for (auto _ : state) benchmark::DoNotOptimize(sample(spec, w, rng));
  state.SetItemsProcessed(state.iterations() * 256 * 256);
}
BENCHMARK(BM_SoftwareSampler)
    ->Arg(static_cast<int>(SamplerKind::kLogisticExact))
    ->Arg(static_cast<int>(SamplerKind::kGaussian))
    ->Arg(static_cast<int>(SamplerKind::kFxp8));

void BM_FeasibilitySweep(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sweep_single_cell_feasibility(-2.0, 2.0, 0.05, MappingConfig{}, NoiseModelConfig{}));
  }
}
BENCHMARK(BM_FeasibilitySweep)->Unit(benchmark::kMillisecond);

}  // namespace
