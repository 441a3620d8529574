#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "pcmsim/crossbar.hpp"
#include "pcmsim/errors.hpp"
#include "pcmsim/sampler.hpp"

using namespace pcmsim;

namespace {

CrossbarCore make_core(const Matrix<double>& w, std::size_t l, const NoiseModelConfig& noise,
                       std::uint64_t seed, SampleMode mode = SampleMode::kReprogramPerSample,
                       unsigned adc_bits = 8) {
  CrossbarConfig cfg;
  cfg.l_noise_cols = l;
  cfg.sample_mode = mode;
  cfg.adc.bits = adc_bits;
  MappingConfig map;
  CrossbarCore core(w.rows(), w.cols(), cfg, noise, map.kappa, seed);
  const bool silent = noise.c0 == 0.0 && noise.c1 == 0.0 && noise.c2 == 0.0;
  core.program_planes(build_plane_program(w, l, map, noise, silent ? std::optional(5.0)
                                                                   : std::nullopt));
  return core;
}

// Weight plane set to its exact targets so only the noise plane is random.
void restore_exact(CrossbarCore& core, const Matrix<double>& w) {
  Matrix<ConductancePair> t(w.rows(), w.cols());
  for (std::size_t i = 0; i < w.size(); ++i) t.flat()[i] = map_weight(w.flat()[i], MappingConfig{});
  core.restore_weight_plane(t);
}

}  // namespace

TEST_SUITE("crossbar") {
  TEST_CASE("ADC arithmetic") {
    AdcConfig adc;
    CHECK(adc.max_code() == 127);
    CHECK(quantize(adc, 0.0) == 0);
    CHECK(quantize(adc, 25.0) == 127);
    CHECK(quantize(adc, 40.0) == 127);
    CHECK(quantize(adc, -40.0) == -127);
    CHECK(quantize(adc, 12.5) == 64);
    CHECK(dequantize(adc, 64) == doctest::Approx(12.598425).epsilon(1e-6));
    CHECK(std::abs(dequantize(adc, quantize(adc, 12.5)) - 12.5) <= adc.lsb() / 2 + 1e-12);
  }

  TEST_CASE("ADC is monotone with half-LSB round trip") {
    AdcConfig adc;
    std::int64_t prev = quantize(adc, -30.0);
    for (double v = -30.0; v <= 30.0; v += 0.013) {
      const auto c = quantize(adc, v);
      CHECK(c >= prev);
      prev = c;
      if (std::abs(v) <= adc.full_scale) CHECK(std::abs(dequantize(adc, c) - v) <= adc.lsb() / 2 + 1e-12);
    }
  }

  TEST_CASE("out-of-range target and shape mismatch") {
    NoiseModelConfig noise;
    CrossbarConfig cfg;
    cfg.l_noise_cols = 2;
    CrossbarCore core(2, 2, cfg, noise, 8.0, 1);
    auto prog = build_plane_program(Matrix<double>(2, 2, 0.5), 2, MappingConfig{}, noise);
    prog.weight_pairs(0, 0).plus = 30.0;
    CHECK_THROWS_AS(core.program_planes(prog), DomainError);
    auto wrong = build_plane_program(Matrix<double>(3, 2, 0.5), 2, MappingConfig{}, noise);
    CHECK_THROWS_AS(core.program_planes(wrong), ArgumentError);
  }

  TEST_CASE("sampling before a refresh is a state error") {
    NoiseModelConfig noise;
    CrossbarConfig cfg;
    CrossbarCore core(2, 2, cfg, noise, 8.0, 1);
    CHECK_THROWS_AS(core.sample_binary_weights(0), StateError);
    auto good = make_core(Matrix<double>(2, 2, 0.0), 2, noise, 1);
    CHECK_THROWS_AS(good.sample_binary_weights(0), StateError);
    good.refresh_noise_register(0);
    CHECK_NOTHROW(good.sample_binary_weights(0));
  }

  TEST_CASE("zero-noise programming is exact and the register holds zero") {
    const auto noise = NoiseModelConfig::noiseless();
    Matrix<double> w(4, 3);
    double v = -1.7;
    for (auto& x : w.flat()) x = (v += 0.29);
    auto core = make_core(w, 3, noise, 2);
    const auto prog = build_plane_program(w, 3, MappingConfig{}, noise, 5.0);
    for (std::size_t n = 0; n < 4; ++n) {
      for (std::size_t m = 0; m < 3; ++m) {
        CHECK(core.weight_cell(n, m).plus.programmed_g() == prog.weight_pairs(n, m).plus);
        CHECK(core.weight_cell(n, m).minus.programmed_g() == prog.weight_pairs(n, m).minus);
      }
    }
    core.refresh_noise_register(0);
    for (auto c : core.noise_register().flat()) CHECK(c == 0);
  }

  TEST_CASE("default programming stays within the verify bound") {
    NoiseModelConfig noise;
    Matrix<double> w(256, 256);
    Rng rng(3);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (auto& x : w.flat()) x = u(rng);
    auto core = make_core(w, 16, noise, 4);
    const auto prog = build_plane_program(w, 16, MappingConfig{}, noise);
    std::size_t bad = 0;
    const double bound = core.config().weight_program_bound;
    for (std::size_t n = 0; n < 256; ++n) {
      for (std::size_t m = 0; m < 256; ++m) {
        const auto& c = core.weight_cell(n, m);
        bad += std::abs(c.plus.programmed_g() - prog.weight_pairs(n, m).plus) > bound;
        bad += std::abs(c.minus.programmed_g() - prog.weight_pairs(n, m).minus) > bound;
      }
    }
    CHECK(bad == 0);
  }

  TEST_CASE("register spread matches the sampling budget") {
    NoiseModelConfig noise;
    auto core = make_core(Matrix<double>(8, 1, 0.0), 8, noise, 5);
    std::vector<double> vals;
    for (int k = 0; k < 3000; ++k) {
      core.refresh_noise_register(0);
      for (std::size_t n = 0; n < 8; ++n) {
        for (std::size_t l = 0; l < 8; ++l) vals.push_back(core.register_value(n, l));
      }
    }
    double m = 0.0, v = 0.0;
    for (double x : vals) m += x;
    m /= vals.size();
    for (double x : vals) v += (x - m) * (x - m);
    const double sd = std::sqrt(v / (vals.size() - 1));
    CHECK(std::abs(sd / 0.8 - 1.0) < 0.05);
  }

  TEST_CASE("static mode without read noise repeats the register") {
    NoiseModelConfig noise;
    noise.read_rho = 0.0;
    auto core = make_core(Matrix<double>(4, 4, 0.0), 4, noise, 6, SampleMode::kStaticProgram);
    core.refresh_noise_register(0);
    const auto first = core.noise_register();
    core.refresh_noise_register(1);
    CHECK(core.noise_register() == first);
  }

  TEST_CASE("w_r = 0 samples +1 half the time") {
    NoiseModelConfig noise;
    auto core = make_core(Matrix<double>(4, 4, 0.0), 4, noise, 7);
    restore_exact(core, Matrix<double>(4, 4, 0.0));
    Matrix<double> plus(4, 4, 0.0);
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
      const auto s = core.draw_sample(0);
      for (std::size_t i = 0; i < s.values.size(); ++i) plus.flat()[i] += s.values.flat()[i] > 0;
    }
    // a zero register code ties to +1: P(+1) = Phi(lsb / 2 / (kappa sigma_delta))
    const double expect = normal_cdf(0.5 * core.config().adc.lsb() / (8.0 * 0.8));
    for (double c : plus.flat()) CHECK(std::abs(c / n - expect) < 0.006);
  }

  TEST_CASE("hardware marginal follows Phi(w / sigma_delta)") {
    NoiseModelConfig noise;
    Matrix<double> w(1, 5);
    const double ws[] = {-2.0, -1.0, 0.0, 1.0, 2.0};
    for (std::size_t i = 0; i < 5; ++i) w(0, i) = ws[i];
    auto core = make_core(w, 5, noise, 8, SampleMode::kReprogramPerSample, 16);
    restore_exact(core, w);
    std::vector<double> plus(5, 0.0);
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
      const auto s = core.draw_sample(0);
      for (std::size_t i = 0; i < 5; ++i) plus[i] += s.values(0, i) > 0;
    }
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(std::abs(plus[i] / n - normal_cdf(ws[i] / 0.8)) < 0.01);
    }
  }

  TEST_CASE("single synapse at w = 0.8 gives Phi(1)") {
    NoiseModelConfig noise;
    auto core = make_core(Matrix<double>(1, 1, 0.8), 64, noise, 9, SampleMode::kReprogramPerSample, 16);
    restore_exact(core, Matrix<double>(1, 1, 0.8));
    int plus = 0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) plus += core.draw_sample(0).values(0, 0) > 0;
    CHECK(std::abs(static_cast<double>(plus) / n - 0.8413) < 0.01);
  }

  TEST_CASE("L = 1 shares the noise value across a row") {
    NoiseModelConfig noise;
    auto core = make_core(Matrix<double>(2, 6, 0.0), 1, noise, 10);
    restore_exact(core, Matrix<double>(2, 6, 0.0));
    Matrix<double> cmp;
    for (int k = 0; k < 2000; ++k) {
      core.refresh_noise_register(0);
      const auto s = core.sample_binary_weights(0, &cmp);
      for (std::size_t n = 0; n < 2; ++n) {
        for (std::size_t m = 1; m < 6; ++m) CHECK(s.values(n, m) == s.values(n, 0));
      }
    }
  }

  TEST_CASE("arbitration is uniform over the register columns") {
    NoiseModelConfig noise;
    const std::size_t l = 8;
    auto core = make_core(Matrix<double>(1, 16, 0.0), l, noise, 11);
    std::vector<double> counts(l, 0.0);
    const int n = 20000;
    core.refresh_noise_register(0);
    for (int k = 0; k < n; ++k) {
      const auto s = core.sample_binary_weights(0);
      for (auto a : s.arbitration) {
        REQUIRE(a < l);
        counts[a] += 1.0;
      }
    }
    const double total = n * 16.0;
    const double p = 1.0 / l;
    const double sd = std::sqrt(total * p * (1 - p));
    for (double c : counts) CHECK(std::abs(c - total * p) < 3.0 * sd + 1.0);
  }

  TEST_CASE("ceiled weights essentially never flip") {
    NoiseModelConfig noise;
    auto core = make_core(Matrix<double>(1, 2, 3.0), 2, noise, 12);
    core.restore_weight_plane([&] {
      Matrix<ConductancePair> m(1, 2);
      m(0, 0) = {24.0, 0.0};
      m(0, 1) = {0.0, 24.0};
      return m;
    }());
    int flips = 0;
    const int n = 100000;
    for (int k = 0; k < n; ++k) {
      const auto s = core.draw_sample(0);
      flips += s.values(0, 0) < 0;
      flips += s.values(0, 1) > 0;
    }
    CHECK(static_cast<double>(flips) / (2.0 * n) < 1e-3);
  }

  TEST_CASE("noise-free comparison equals the effective weight within one LSB") {
    const auto noise = NoiseModelConfig::noiseless();
    Matrix<double> w(10, 10);
    Rng rng(13);
    std::uniform_real_distribution<double> u(-2.5, 2.5);
    for (auto& x : w.flat()) x = u(rng);
    auto core = make_core(w, 4, noise, 14);
    core.refresh_noise_register(0);
    Matrix<double> cmp;
    core.sample_binary_weights(0, &cmp);
    const double lsb_w = core.config().adc.lsb() / core.kappa();
    MappingConfig map;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double eff = effective_weight(w.flat()[i], map);
      // The ADC saturates above full_scale / kappa in weight units.
      const double limit = core.config().adc.full_scale / core.kappa();
      CHECK(std::abs(cmp.flat()[i] - std::clamp(eff, -limit, limit)) <= lsb_w + 1e-12);
    }
  }

  TEST_CASE("sample-and-hold: one sample serves all comparisons until the next draw") {
    NoiseModelConfig noise;
    auto core = make_core(Matrix<double>(3, 3, 0.1), 3, noise, 15);
    core.reseed(77);
    const auto a = core.draw_sample(0);
    core.reseed(77);
    const auto b = core.draw_sample(0);
    CHECK(a.values == b.values);
    CHECK(a.arbitration == b.arbitration);
  }

  TEST_CASE("deterministic sign read of the weight plane") {
    NoiseModelConfig noise;
    Matrix<double> w(2, 2);
    w(0, 0) = 1.5;
    w(0, 1) = -1.5;
    w(1, 0) = 0.9;
    w(1, 1) = -0.9;
    CrossbarConfig cfg;
    CrossbarCore core(2, 2, cfg, noise, 8.0, 16);
    Matrix<ConductancePair> t(2, 2);
    for (std::size_t i = 0; i < 4; ++i) t.flat()[i] = map_weight(w.flat()[i], MappingConfig{});
    core.program_weight_plane(t);
    const auto s = core.sample_deterministic(0);
    CHECK(s(0, 0) == 1);
    CHECK(s(0, 1) == -1);
    CHECK(s(1, 0) == 1);
    CHECK(s(1, 1) == -1);
  }
}
