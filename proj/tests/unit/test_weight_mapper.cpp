#include <doctest.h>

#include <cmath>

#include "pcmsim/errors.hpp"
#include "pcmsim/weight_mapper.hpp"

using namespace pcmsim;

namespace {

NoiseModelConfig constant_noise(double c0) {
  NoiseModelConfig m;
  m.c2 = m.c1 = 0.0;
  m.c0 = c0;
  m.read_rho = 0.0;
  return m;
}

}  // namespace

TEST_SUITE("weight_mapper") {
  TEST_CASE("map_weight at the documented anchor points") {
    MappingConfig cfg;
    CHECK(map_weight(2.0, cfg) == ConductancePair{16.0, 0.0});
    CHECK(map_weight(3.0, cfg) == ConductancePair{24.0, 0.0});
    CHECK(map_weight(-3.0, cfg) == ConductancePair{0.0, 24.0});
    CHECK(map_weight(0.0, cfg) == ConductancePair{0.0, 0.0});
    CHECK(map_weight(-1.0, cfg) == ConductancePair{0.0, 8.0});
    CHECK(cfg.ceiled_weight() == doctest::Approx(3.0));
    CHECK(effective_weight(2.5, cfg) == doctest::Approx(3.0));
    CHECK(effective_weight(-0.7, cfg) == doctest::Approx(-0.7));
  }

  TEST_CASE("map_weight rejects non-finite weights") {
    MappingConfig cfg;
    CHECK_THROWS_AS(map_weight(std::nan(""), cfg), ArgumentError);
    CHECK_THROWS_AS(map_weight(INFINITY, cfg), ArgumentError);
  }

  TEST_CASE("map_weight is monotone and mirror-symmetric") {
    MappingConfig cfg;
    double prev = -1e9;
    for (double w = -4.0; w <= 4.0; w += 0.01) {
      const auto p = map_weight(w, cfg);
      CHECK(p.difference() >= prev);
      prev = p.difference();
      const auto m = map_weight(-w, cfg);
      CHECK(m.plus == p.minus);
      CHECK(m.minus == p.plus);
    }
  }

  TEST_CASE("symmetric split keeps the differential") {
    MappingConfig cfg;
    cfg.encoding = PairEncoding::kSymmetricSplit;
    for (double w : {-3.0, -1.3, 0.0, 0.4, 2.0}) {
      const auto p = map_weight(w, cfg);
      CHECK(p.difference() == doctest::Approx(map_weight(w, MappingConfig{}).difference()));
      CHECK(p.plus >= 0.0);
      CHECK(p.minus >= 0.0);
    }
  }

  TEST_CASE("solver reports the achievable sigma when the budget is out of reach") {
    MappingConfig cfg;
    const auto noise = constant_noise(0.4);
    try {
      solve_noise_cell(cfg, noise);
      FAIL("expected InfeasibleError");
    } catch (const InfeasibleError& e) {
      CHECK(e.achievable_sigma_lo() == doctest::Approx(std::sqrt(0.32)).epsilon(1e-9));
      CHECK(e.achievable_sigma_hi() == doctest::Approx(std::sqrt(0.32)).epsilon(1e-9));
    }
  }

  TEST_CASE("constant noise meeting the budget everywhere returns g_min") {
    MappingConfig cfg;
    const auto noise = constant_noise(std::sqrt(0.32));
    const double g = solve_noise_cell(cfg, noise);
    CHECK(g == noise.g_min);
    CHECK(std::abs(noise_cell_residual(g, cfg, noise)) <= 1e-6);
  }

  TEST_CASE("default model: root found and budget met") {
    MappingConfig cfg;
    NoiseModelConfig noise;
    const double g = solve_noise_cell(cfg, noise);
    CHECK(noise.in_range(g));
    const double sp = sigma_p(noise, g);
    const double sr = sigma_r(noise, g, 0);
    CHECK(std::abs(2 * sp * sp + 2 * sr * sr - 0.64) <= 1e-6);
    // smallest root: the residual is negative everywhere below it
    for (double x = noise.g_min; x < g - 1e-3; x += 0.01) {
      CHECK(noise_cell_residual(x, cfg, noise) < 0.0);
    }
  }

  TEST_CASE("weight-plane variance is a small share of the sampling budget") {
    CHECK(weight_plane_variance_fraction(MappingConfig{}, NoiseModelConfig{}) <= 0.05);
  }

  TEST_CASE("noise-free planes preserve the mean") {
    MappingConfig cfg;
    const auto noise = NoiseModelConfig::noiseless();
    Matrix<double> w(3, 4);
    double v = -2.0;
    for (auto& x : w.flat()) x = (v += 0.33);
    const auto prog = build_plane_program(w, 2, cfg, noise, 5.0);
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t c = 0; c < 4; ++c) {
        const double sum =
            prog.weight_pairs(r, c).difference() / cfg.kappa + prog.noise_pairs(r, 0).difference();
        CHECK(sum == doctest::Approx(effective_weight(w(r, c), cfg)));
      }
    }
  }

  TEST_CASE("plane program shapes and symmetric noise targets") {
    Matrix<double> w(5, 7, 0.3);
    const auto prog = build_plane_program(w, 3, MappingConfig{}, NoiseModelConfig{});
    CHECK(prog.weight_pairs.rows() == 5);
    CHECK(prog.weight_pairs.cols() == 7);
    CHECK(prog.noise_pairs.rows() == 5);
    CHECK(prog.noise_pairs.cols() == 3);
    for (const auto& p : prog.noise_pairs.flat()) {
      CHECK(p.plus == prog.noise_target);
      CHECK(p.minus == prog.noise_target);
    }
    CHECK_THROWS_AS(build_plane_program(w, 0, MappingConfig{}, NoiseModelConfig{}), ArgumentError);
  }

  TEST_CASE("config validation") {
    NoiseModelConfig noise;
    MappingConfig cfg;
    CHECK_NOTHROW(cfg.validate(noise));
    cfg.kappa = 0.5;
    CHECK_THROWS_AS(cfg.validate(noise), ArgumentError);
    cfg = MappingConfig{};
    cfg.g_ceiled = 30.0;
    CHECK_THROWS_AS(cfg.validate(noise), ArgumentError);
    cfg = MappingConfig{};
    cfg.sigma_delta = 0.0;
    CHECK_THROWS_AS(cfg.validate(noise), ArgumentError);
  }

  TEST_CASE("single cell cannot carry weight and noise for most weights") {
    const auto sweep =
        sweep_single_cell_feasibility(-2.0, 2.0, 0.05, MappingConfig{}, NoiseModelConfig{});
    CHECK(sweep.reports.size() == 81);
    CHECK(sweep.infeasible_fraction() >= 0.9);
  }

  TEST_CASE("constructed-feasible case") {
    NoiseModelConfig noise;
    MappingConfig cfg;
    const double g = 5.0;
    const double sp = sigma_p(noise, g), sr = sigma_r(noise, g, 0);
    cfg.sigma_delta = std::sqrt(2 * sp * sp + 2 * sr * sr);
    FeasibilityOptions opts;
    opts.conductance_per_unit = 1.0;
    const auto report = check_single_cell_feasibility(0.0, cfg, noise, opts);
    REQUIRE(report.is_feasible());
    bool found = false;
    for (const auto& p : report.feasible) {
      found = found || (std::abs(p.plus - g) < 1e-9 && std::abs(p.minus - g) < 1e-9);
    }
    CHECK(found);
  }

  TEST_CASE("zero sampling noise is infeasible with any noisy device") {
    MappingConfig cfg;
    cfg.sigma_delta = 0.0;
    NoiseModelConfig noise;
    noise.c0 = 0.3;
    const auto sweep = sweep_single_cell_feasibility(-2.0, 2.0, 0.5, cfg, noise);
    CHECK(sweep.infeasible_fraction() == 1.0);
    CHECK_FALSE(sweep.feasible_range.has_value());
  }
}
