#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pcmsim/matrix.hpp"
#include "pcmsim/pcm_device.hpp"

namespace pcmsim {

enum class PairEncoding {
  kOneSided,        // (D, 0) or (0, -D)
  kSymmetricSplit,  // (c + D/2, c - D/2) around c = g_ceiled / 2
};

/// Weight-to-conductance mapping parameters.
struct MappingConfig {
  double kappa = 8.0;
  double w_ceil = 2.0;
  double g_at_wmax = 16.0;
  double g_ceiled = 24.0;
  double sigma_delta = 0.8;
  PairEncoding encoding = PairEncoding::kOneSided;

  void validate(const NoiseModelConfig& noise) const;

  /// µS of weight-plane differential per unit of nominal weight.
  double scale() const noexcept { return g_at_wmax / w_ceil; }
  /// Nominal weight represented by a ceiled cell (3 at the defaults).
  double ceiled_weight() const noexcept { return g_ceiled / scale(); }
};

struct ConductancePair {
  double plus = 0.0;
  double minus = 0.0;

  double difference() const noexcept { return plus - minus; }
  friend bool operator==(const ConductancePair&, const ConductancePair&) = default;
};

/// Effective nominal weight after the ceiling rule.
double effective_weight(double w_r, const MappingConfig& cfg);

/// Weight-plane conductance targets for one nominal weight.
ConductancePair map_weight(double w_r, const MappingConfig& cfg);

/// Raised when no noise-cell conductance meets the sigma_delta budget. Carries
/// the achievable range of sqrt(2 sigma_p^2 + 2 sigma_r^2) over the range.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(const std::string& what, double sigma_lo, double sigma_hi)
      : std::runtime_error(what), sigma_lo_(sigma_lo), sigma_hi_(sigma_hi) {}
  double achievable_sigma_lo() const noexcept { return sigma_lo_; }
  double achievable_sigma_hi() const noexcept { return sigma_hi_; }

 private:
  double sigma_lo_;
  double sigma_hi_;
};

/// Residual of the noise-plane variance budget at conductance g for a pair
/// targeted at (g, g): 2 sigma_p^2(g) + 2 sigma_r^2(g, 0) - sigma_delta^2.
double noise_cell_residual(double g, const MappingConfig& cfg, const NoiseModelConfig& noise);

/// Smallest conductance g* whose symmetric pair meets the budget, to
/// |residual| <= 1e-6. Throws InfeasibleError when none exists.
double solve_noise_cell(const MappingConfig& cfg, const NoiseModelConfig& noise);

/// Options for the single-cell feasibility checker. A single differential
/// pair must carry both the nominal weight and the sampling noise:
///   w_r * scale      = G+ - G-
///   (sigma_delta * scale)^2 = pair noise variance
/// `conductance_per_unit` is that scale; unset means the weight-plane scale
/// (g_at_wmax / w_ceil), 1.0 reproduces the unscaled equations.
struct FeasibilityOptions {
  double resolution = 0.1;
  double mean_tol = 0.01;
  double var_rel_tol = 0.01;
  std::optional<double> conductance_per_unit;
};

struct FeasibilityReport {
  double w_r = 0.0;
  std::vector<ConductancePair> feasible;

  bool is_feasible() const noexcept { return !feasible.empty(); }
};

FeasibilityReport check_single_cell_feasibility(double w_r, const MappingConfig& cfg,
                                                const NoiseModelConfig& noise,
                                                const FeasibilityOptions& opts = {});

struct FeasibilitySweep {
  std::vector<FeasibilityReport> reports;
  std::optional<std::pair<double, double>> feasible_range;  // min/max feasible w_r

  double infeasible_fraction() const;
};

FeasibilitySweep sweep_single_cell_feasibility(double w_lo, double w_hi, double step,
                                               const MappingConfig& cfg,
                                               const NoiseModelConfig& noise,
                                               const FeasibilityOptions& opts = {});

/// Largest fraction of sigma_delta^2 contributed by the weight plane,
/// kappa^-2 * pair variance, over nominal weights in [-w_ceil, w_ceil] plus
/// the ceiled level.
double weight_plane_variance_fraction(const MappingConfig& cfg, const NoiseModelConfig& noise);

/// Conductance targets for both planes of one crossbar.
struct PlaneProgram {
  Matrix<ConductancePair> weight_pairs;  // N x M
  Matrix<ConductancePair> noise_pairs;   // N x L
  double noise_target = 0.0;             // g*, shared by every noise device
};

/// Noise cells are targeted at solve_noise_cell() unless `noise_target` is
/// given (used with noiseless device models, where no root exists).
PlaneProgram build_plane_program(const Matrix<double>& w_r, std::size_t l_noise_cols,
                                 const MappingConfig& cfg, const NoiseModelConfig& noise,
                                 std::optional<double> noise_target = std::nullopt);

}  // namespace pcmsim
