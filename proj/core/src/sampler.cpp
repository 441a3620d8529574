#include "pcmsim/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pcmsim/errors.hpp"

namespace pcmsim {

void SamplerSpec::validate() const {
  if (!(sigma_delta > 0.0)) throw ArgumentError("sampler: sigma_delta must be > 0");
  if (kind == SamplerKind::kGumbelSoftmax && !(tau > 0.0)) {
    throw ArgumentError("sampler: tau must be > 0");
  }
  if (kind == SamplerKind::kFxp8 && fxp8_noise != SamplerKind::kLogisticExact &&
      fxp8_noise != SamplerKind::kGaussian) {
    throw ArgumentError("sampler: fxp8 noise must be logistic or gaussian");
  }
}

double bernoulli_param(double w_r) { return 1.0 / (1.0 + std::exp(-2.0 * w_r)); }

std::vector<double> bernoulli_params(std::span<const double> w_r) {
  std::vector<double> p(w_r.size());
  std::transform(w_r.begin(), w_r.end(), p.begin(), bernoulli_param);
  return p;
}

double logit_from_p(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("logits_from_p: p must lie in (0, 1)");
  return 0.5 * (std::log(p) - std::log1p(-p));
}

std::vector<double> logits_from_p(std::span<const double> p) {
  std::vector<double> w(p.size());
  std::transform(p.begin(), p.end(), w.begin(), logit_from_p);
  return w;
}

double logistic_noise(Rng& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double eps = 0.0;
  do {
    eps = uniform(rng);
  } while (eps <= 0.0);
  return 0.5 * std::log(eps / (1.0 - eps));
}

namespace fxp8 {
std::int32_t quantize(double v) {
  const double scaled = std::round(v * (1 << kFracBits));
  return static_cast<std::int32_t>(std::clamp(scaled, double(-kMaxCode), double(kMaxCode)));
}
}  // namespace fxp8

std::vector<double> sample(const SamplerSpec& spec, std::span<const double> w_r, Rng& rng) {
  spec.validate();
  std::vector<double> out(w_r.size());
  std::normal_distribution<double> gauss(0.0, spec.sigma_delta);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t i = 0; i < w_r.size(); ++i) {
    const double w = w_r[i];
    switch (spec.kind) {
      case SamplerKind::kLogisticExact:
        out[i] = w + logistic_noise(rng) >= 0.0 ? 1.0 : -1.0;
        break;
      case SamplerKind::kGaussian:
        out[i] = w + gauss(rng) >= 0.0 ? 1.0 : -1.0;
        break;
      case SamplerKind::kGumbelSoftmax:
        out[i] = std::tanh((w + logistic_noise(rng)) / spec.tau);
        break;
      case SamplerKind::kFxp8: {
        const double delta = spec.fxp8_noise == SamplerKind::kGaussian ? gauss(rng)
                                                                        : logistic_noise(rng);
        const std::int32_t sum = fxp8::quantize(w) + fxp8::quantize(delta);
        // An exact zero is resolved by one extra random bit.
        if (sum == 0) {
          out[i] = coin(rng) ? 1.0 : -1.0;
        } else {
          out[i] = sum > 0 ? 1.0 : -1.0;
        }
        break;
      }
    }
  }
  return out;
}

Matrix<double> sample(const SamplerSpec& spec, const Matrix<double>& w_r, Rng& rng) {
  return Matrix<double>(w_r.rows(), w_r.cols(), sample(spec, w_r.flat(), rng));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double gaussian_approximation_gap(double sigma_delta, double lo, double hi, int steps) {
  double gap = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double w = lo + (hi - lo) * k / steps;
    gap = std::max(gap, std::abs(normal_cdf(w / sigma_delta) - bernoulli_param(w)));
  }
  return gap;
}

}  // namespace pcmsim
