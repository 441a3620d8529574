#pragma once

#include <cstddef>

#include "pcmsim/random.hpp"

namespace pcmsim {

/// Conductance noise model of a PCM device. All conductances are in µS.
///
/// Programming noise: sigma_p(G) = max(c2*G^2 + c1*G + c0, 0).
/// Read noise:        sigma_r(G, t) = read_rho * G * f(t), where
///                    f(t) = sqrt(1 + ln(1 + t)) when read_time_dependent is
///                    set and f = 1 otherwise.
///
/// The defaults are calibration inputs: a quadratic programming-noise profile
/// peaking near mid-range (about 1 µS at 12.5 µS), read noise roughly an order
/// of magnitude smaller, and a root of the noise-plane variance budget for
/// sigma_delta = 0.8 near 2.6 µS.
struct NoiseModelConfig {
  double c2 = -0.0045;
  double c1 = 0.1125;
  double c0 = 0.3;
  double read_rho = 0.01;
  bool read_time_dependent = true;
  double g_min = 0.0;
  double g_max = 25.0;

  /// Throws ArgumentError when the bounds are inconsistent or the noise is
  /// negative anywhere on [g_min, g_max].
  void validate() const;

  bool in_range(double g) const noexcept { return g >= g_min && g <= g_max; }

  /// A model with every noise source disabled.
  static NoiseModelConfig noiseless() {
    NoiseModelConfig cfg;
    cfg.c2 = cfg.c1 = cfg.c0 = 0.0;
    cfg.read_rho = 0.0;
    return cfg;
  }
};

double sigma_p(const NoiseModelConfig& model, double g);
double sigma_r(const NoiseModelConfig& model, double g, std::size_t read_index);

/// Read-noise time modulation f(t); f(0) = 1 and non-decreasing.
double read_time_factor(const NoiseModelConfig& model, std::size_t read_index);

/// sigma_p^2(G+) + sigma_p^2(G-) + sigma_r^2(G+, t) + sigma_r^2(G-, t)
double pair_noise_variance(const NoiseModelConfig& model, double g_plus, double g_minus,
                           std::size_t read_index = 0);

/// One programmable PCM conductance.
class PcmDevice {
 public:
  /// Iterative program-and-verify: draws G ~ Normal(target, sigma_p(target))
  /// clipped to the conductance range until |G - target| <= program_bound.
  /// When max_iters draws are exhausted the closest draw is kept and
  /// converged() reports false.
  void program(const NoiseModelConfig& model, double target, double program_bound,
               unsigned max_iters, Rng& rng);

  /// Sets the realized conductance directly, bypassing programming noise.
  void force(const NoiseModelConfig& model, double g);

  /// Returns the programmed conductance plus one read-noise draw, clipped to
  /// the conductance range.
  double read(const NoiseModelConfig& model, std::size_t read_index, Rng& rng) const;

  double target_g() const noexcept { return target_g_; }
  double programmed_g() const noexcept { return programmed_g_; }
  bool programmed() const noexcept { return programmed_; }
  bool converged() const noexcept { return converged_; }
  unsigned iterations() const noexcept { return iterations_; }

 private:
  double target_g_ = 0.0;
  double programmed_g_ = 0.0;
  unsigned iterations_ = 0;
  bool programmed_ = false;
  bool converged_ = false;
};

/// Differential pair of devices; represents G+ - G-.
struct DpcmCell {
  PcmDevice plus;
  PcmDevice minus;

  double programmed_difference() const noexcept {
    return plus.programmed_g() - minus.programmed_g();
  }
  double read_difference(const NoiseModelConfig& model, std::size_t read_index, Rng& rng) const {
    const double gp = plus.read(model, read_index, rng);
    const double gm = minus.read(model, read_index, rng);
    return gp - gm;
  }
};

}  // namespace pcmsim
