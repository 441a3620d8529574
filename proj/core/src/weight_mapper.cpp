#include "pcmsim/weight_mapper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pcmsim/errors.hpp"

namespace pcmsim {

namespace {

constexpr double kResidualTol = 1e-6;
constexpr std::size_t kScanSteps = 2500;

}  // namespace

void MappingConfig::validate(const NoiseModelConfig& noise) const {
  if (!(kappa >= 1.0)) throw ArgumentError("mapping: kappa must be >= 1");
  if (!(w_ceil > 0.0)) throw ArgumentError("mapping: w_ceil must be > 0");
  if (!(g_at_wmax > 0.0 && g_at_wmax < g_ceiled && g_ceiled <= noise.g_max)) {
    throw ArgumentError("mapping: require 0 < g_at_wmax < g_ceiled <= g_max");
  }
  if (!(sigma_delta > 0.0)) throw ArgumentError("mapping: sigma_delta must be > 0");
}

double effective_weight(double w_r, const MappingConfig& cfg) {
  if (!std::isfinite(w_r)) throw ArgumentError("map_weight: non-finite weight");
  if (std::abs(w_r) <= cfg.w_ceil) return w_r;
  return std::copysign(cfg.ceiled_weight(), w_r);
}

ConductancePair map_weight(double w_r, const MappingConfig& cfg) {
  const double w_eff = effective_weight(w_r, cfg);
  const double d = std::abs(w_r) <= cfg.w_ceil ? cfg.scale() * w_eff
                                               : std::copysign(cfg.g_ceiled, w_r);
  if (cfg.encoding == PairEncoding::kSymmetricSplit) {
    const double c = 0.5 * cfg.g_ceiled;
    return {c + 0.5 * d, c - 0.5 * d};
  }
  return d >= 0.0 ? ConductancePair{d, 0.0} : ConductancePair{0.0, -d};
}

double noise_cell_residual(double g, const MappingConfig& cfg, const NoiseModelConfig& noise) {
  const double sp = sigma_p(noise, g);
  const double sr = sigma_r(noise, g, 0);
  return 2.0 * sp * sp + 2.0 * sr * sr - cfg.sigma_delta * cfg.sigma_delta;
}

double solve_noise_cell(const MappingConfig& cfg, const NoiseModelConfig& noise) {
  const double lo = noise.g_min;
  const double hi = noise.g_max;
  const double step = (hi - lo) / static_cast<double>(kScanSteps);
  auto at = [&](std::size_t i) { return i == kScanSteps ? hi : lo + step * static_cast<double>(i); };

  double prev_g = lo;
  double prev_r = noise_cell_residual(lo, cfg, noise);
  if (std::abs(prev_r) <= kResidualTol) return lo;

  double var_lo = prev_r, var_hi = prev_r;
  for (std::size_t i = 1; i <= kScanSteps; ++i) {
    const double g = at(i);
    const double r = noise_cell_residual(g, cfg, noise);
    var_lo = std::min(var_lo, r);
    var_hi = std::max(var_hi, r);
    if (std::abs(r) <= kResidualTol) return g;
    if ((prev_r < 0.0) != (r < 0.0)) {
      double a = prev_g, b = g, ra = prev_r;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        const double rm = noise_cell_residual(m, cfg, noise);
        if (std::abs(rm) <= kResidualTol || b - a < 1e-15) return m;
        if ((ra < 0.0) == (rm < 0.0)) {
          a = m;
          ra = rm;
        } else {
          b = m;
        }
      }
      return 0.5 * (a + b);
    }
    prev_g = g;
    prev_r = r;
  }

  const double s2 = cfg.sigma_delta * cfg.sigma_delta;
  const double sigma_lo = std::sqrt(std::max(var_lo + s2, 0.0));
  const double sigma_hi = std::sqrt(std::max(var_hi + s2, 0.0));
  throw InfeasibleError("solve_noise_cell: sigma_delta " + std::to_string(cfg.sigma_delta) +
                            " not achievable; achievable range [" + std::to_string(sigma_lo) +
                            ", " + std::to_string(sigma_hi) + "]",
                        sigma_lo, sigma_hi);
}

FeasibilityReport check_single_cell_feasibility(double w_r, const MappingConfig& cfg,
                                                const NoiseModelConfig& noise,
                                                const FeasibilityOptions& opts) {
  const double scale = opts.conductance_per_unit.value_or(cfg.scale());
  const double target_mean = w_r * scale;
  const double target_var = std::pow(cfg.sigma_delta * scale, 2);
  const double mean_tol = opts.mean_tol * scale;
  const double var_tol = opts.var_rel_tol * target_var;

  const auto n = static_cast<std::size_t>(
                     std::floor((noise.g_max - noise.g_min) / opts.resolution + 1e-9)) +
                 1;
  std::vector<double> grid(n), var(n);
  for (std::size_t i = 0; i < n; ++i) {
    grid[i] = std::min(noise.g_min + opts.resolution * static_cast<double>(i), noise.g_max);
    const double sp = sigma_p(noise, grid[i]);
    const double sr = sigma_r(noise, grid[i], 0);
    var[i] = sp * sp + sr * sr;
  }

  FeasibilityReport report;
  report.w_r = w_r;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(grid[i] - grid[j] - target_mean) > mean_tol) continue;
      if (std::abs(var[i] + var[j] - target_var) > var_tol) continue;
      report.feasible.push_back({grid[i], grid[j]});
    }
  }
  return report;
}

double FeasibilitySweep::infeasible_fraction() const {
  if (reports.empty()) return 0.0;
  const auto bad = std::count_if(reports.begin(), reports.end(),
                                 [](const FeasibilityReport& r) { return !r.is_feasible(); });
  return static_cast<double>(bad) / static_cast<double>(reports.size());
}

FeasibilitySweep sweep_single_cell_feasibility(double w_lo, double w_hi, double step,
                                               const MappingConfig& cfg,
                                               const NoiseModelConfig& noise,
                                               const FeasibilityOptions& opts) {
  if (!(step > 0.0) || w_hi < w_lo) throw ArgumentError("feasibility sweep: bad range");
  FeasibilitySweep sweep;
  const auto count = static_cast<std::size_t>(std::floor((w_hi - w_lo) / step + 1e-9)) + 1;
  for (std::size_t k = 0; k < count; ++k) {
    const double w = w_lo + step * static_cast<double>(k);
    auto report = check_single_cell_feasibility(w, cfg, noise, opts);
    if (report.is_feasible()) {
      if (!sweep.feasible_range) {
        sweep.feasible_range = std::pair{w, w};
      } else {
        sweep.feasible_range->first = std::min(sweep.feasible_range->first, w);
        sweep.feasible_range->second = std::max(sweep.feasible_range->second, w);
      }
    }
    sweep.reports.push_back(std::move(report));
  }
  return sweep;
}

double weight_plane_variance_fraction(const MappingConfig& cfg, const NoiseModelConfig& noise) {
  double worst = 0.0;
  auto consider = [&](double w) {
    const auto pair = map_weight(w, cfg);
    worst = std::max(worst, pair_noise_variance(noise, pair.plus, pair.minus, 0));
  };
  constexpr int kSteps = 400;
  for (int k = 0; k <= kSteps; ++k) {
    consider(-cfg.w_ceil + 2.0 * cfg.w_ceil * k / kSteps);
  }
  consider(2.0 * cfg.w_ceil);
  consider(-2.0 * cfg.w_ceil);
  return worst / (cfg.kappa * cfg.kappa) / (cfg.sigma_delta * cfg.sigma_delta);
}

PlaneProgram build_plane_program(const Matrix<double>& w_r, std::size_t l_noise_cols,
                                 const MappingConfig& cfg, const NoiseModelConfig& noise,
                                 std::optional<double> noise_target) {
  if (l_noise_cols == 0) throw ArgumentError("build_plane_program: L must be >= 1");
  cfg.validate(noise);
  PlaneProgram program;
  program.weight_pairs = Matrix<ConductancePair>(w_r.rows(), w_r.cols());
  for (std::size_t r = 0; r < w_r.rows(); ++r) {
    for (std::size_t c = 0; c < w_r.cols(); ++c) {
      program.weight_pairs(r, c) = map_weight(w_r(r, c), cfg);
    }
  }
  program.noise_target = noise_target ? *noise_target : solve_noise_cell(cfg, noise);
  program.noise_pairs = Matrix<ConductancePair>(
      w_r.rows(), l_noise_cols, ConductancePair{program.noise_target, program.noise_target});
  return program;
}

}  // namespace pcmsim
