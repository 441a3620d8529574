#include "pcmsim/pcm_device.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "pcmsim/errors.hpp"

namespace pcmsim {

namespace {

void require_in_range(const NoiseModelConfig& model, double g, const char* what) {
  if (!std::isfinite(g) || !model.in_range(g)) {
    throw DomainError(std::string(what) + ": conductance " + std::to_string(g) +
                      " uS outside [" + std::to_string(model.g_min) + ", " +
                      std::to_string(model.g_max) + "]");
  }
}

double clamp_g(const NoiseModelConfig& model, double g) {
  return std::clamp(g, model.g_min, model.g_max);
}

}  // namespace

void NoiseModelConfig::validate() const {
  if (!(g_min >= 0.0)) throw ArgumentError("noise model: g_min must be >= 0");
  if (!(g_max > g_min)) throw ArgumentError("noise model: g_max must exceed g_min");
  if (!(read_rho >= 0.0)) throw ArgumentError("noise model: read_rho must be >= 0");
  if (!std::isfinite(c2) || !std::isfinite(c1) || !std::isfinite(c0)) {
    throw ArgumentError("noise model: programming-noise coefficients must be finite");
  }
}

double sigma_p(const NoiseModelConfig& model, double g) {
  require_in_range(model, g, "sigma_p");
  return std::max(model.c2 * g * g + model.c1 * g + model.c0, 0.0);
}

double read_time_factor(const NoiseModelConfig& model, std::size_t read_index) {
  if (!model.read_time_dependent) return 1.0;
  return std::sqrt(1.0 + std::log1p(static_cast<double>(read_index)));
}

double sigma_r(const NoiseModelConfig& model, double g, std::size_t read_index) {
  require_in_range(model, g, "sigma_r");
  return model.read_rho * g * read_time_factor(model, read_index);
}

double pair_noise_variance(const NoiseModelConfig& model, double g_plus, double g_minus,
                           std::size_t read_index) {
  const double pp = sigma_p(model, g_plus);
  const double pm = sigma_p(model, g_minus);
  const double rp = sigma_r(model, g_plus, read_index);
  const double rm = sigma_r(model, g_minus, read_index);
  return pp * pp + pm * pm + rp * rp + rm * rm;
}

void PcmDevice::program(const NoiseModelConfig& model, double target, double program_bound,
                        unsigned max_iters, Rng& rng) {
  require_in_range(model, target, "program");
  if (!(program_bound > 0.0)) throw ArgumentError("program: program_bound must be > 0");
  if (max_iters == 0) throw ArgumentError("program: max_iters must be >= 1");

  target_g_ = target;
  programmed_ = true;
  const double sigma = sigma_p(model, target);
  if (sigma == 0.0) {
    programmed_g_ = target;
    converged_ = true;
    iterations_ = 1;
    return;
  }

  std::normal_distribution<double> draw(target, sigma);
  double best = target;
  double best_err = std::numeric_limits<double>::infinity();
  for (unsigned it = 1; it <= max_iters; ++it) {
    const double g = clamp_g(model, draw(rng));
    const double err = std::abs(g - target);
    if (err <= program_bound) {
      programmed_g_ = g;
      converged_ = true;
      iterations_ = it;
      return;
    }
    if (err < best_err) {
      best_err = err;
      best = g;
    }
  }
  programmed_g_ = best;
  converged_ = false;
  iterations_ = max_iters;
}

void PcmDevice::force(const NoiseModelConfig& model, double g) {
  require_in_range(model, g, "force");
  target_g_ = g;
  programmed_g_ = g;
  programmed_ = true;
  converged_ = true;
  iterations_ = 0;
}

double PcmDevice::read(const NoiseModelConfig& model, std::size_t read_index, Rng& rng) const {
  if (!programmed_) throw StateError("read: device has not been programmed");
  const double sigma = sigma_r(model, programmed_g_, read_index);
  if (sigma == 0.0) return programmed_g_;
  std::normal_distribution<double> noise(0.0, sigma);
  return clamp_g(model, programmed_g_ + noise(rng));
}

}  // namespace pcmsim
