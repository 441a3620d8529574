#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcmsim/matrix.hpp"
#include "pcmsim/random.hpp"

namespace pcmsim {

enum class SamplerKind {
  kLogisticExact,  // sign(w_r + delta), delta = 0.5 * log(eps / (1 - eps))
  kGaussian,       // sign(w_r + delta), delta ~ Normal(0, sigma_delta^2)
  kGumbelSoftmax,  // tanh((w_r + delta) / tau), logistic delta
  kFxp8,           // logistic or Gaussian noise, everything in Q2.5
};

struct SamplerSpec {
  SamplerKind kind = SamplerKind::kLogisticExact;
  double sigma_delta = 0.8;
  double tau = 0.5;
  SamplerKind fxp8_noise = SamplerKind::kGaussian;  // kLogisticExact or kGaussian

  /// Throws ArgumentError for tau <= 0, sigma_delta <= 0 or an unsupported
  /// fxp8 noise kind.
  void validate() const;
};

/// p = sigmoid(2 w_r), probability of drawing +1.
double bernoulli_param(double w_r);
std::vector<double> bernoulli_params(std::span<const double> w_r);
/// Inverse of bernoulli_param; throws DomainError unless 0 < p < 1.
double logit_from_p(double p);
std::vector<double> logits_from_p(std::span<const double> p);

double logistic_noise(Rng& rng);

/// Signed 8-bit fixed point with 5 fractional bits (Q2.5), range +/-127/32.
namespace fxp8 {
constexpr int kFracBits = 5;
constexpr int kMaxCode = 127;
std::int32_t quantize(double v);  // half away from zero, saturating
constexpr double to_double(std::int32_t code) { return code / double(1 << kFracBits); }
}  // namespace fxp8

/// One draw of the weight tensor. Binary kinds return values in {-1, +1};
/// the relaxed kind returns values in (-1, 1).
std::vector<double> sample(const SamplerSpec& spec, std::span<const double> w_r, Rng& rng);
Matrix<double> sample(const SamplerSpec& spec, const Matrix<double>& w_r, Rng& rng);

/// Standard normal CDF.
double normal_cdf(double x);

/// sup over a grid on [lo, hi] of |Phi(w / sigma) - sigmoid(2 w)|.
double gaussian_approximation_gap(double sigma_delta, double lo = -2.0, double hi = 2.0,
                                  int steps = 4000);

}  // namespace pcmsim
