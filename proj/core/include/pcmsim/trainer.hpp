#pragma once

#include <cstdint>
#include <vector>

#include "pcmsim/matrix.hpp"
#include "pcmsim/random.hpp"
#include "pcmsim/snn.hpp"

namespace pcmsim {

/// Per-layer real-valued parameters w_r; P(w = +1) = sigmoid(2 w_r).
using RealWeightTensor = std::vector<Matrix<double>>;

struct TrainConfig {
  double tau = 0.5;              // relaxation temperature
  double lr = 0.01;              // Adam step size
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double kl_weight = 1.0;        // pull toward p = 0.5, scaled by 1 / n_train (Bayesian only)
  std::size_t kl_warmup_epochs = 0;  // KL weight ramps linearly to kl_weight over these epochs
  double surrogate_slope = 5.0;  // k in k * sigmoid'(k (u - theta))
  double init_std = 0.5;
  double weight_clip = 4.0;
  double rate_epsilon = 0.01;    // smoothing of the rate-normalized confidence
  bool detach_reset = true;      // stop gradients through the reset path
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochLog {
  double loss = 0.0;
  double accuracy = 0.0;
  double weight_norm = 0.0;
};

struct TrainResult {
  RealWeightTensor w_r;
  std::vector<EpochLog> log;
};

/// Spike nonlinearity used by the differentiable forward pass.
struct SpikeFunction {
  double slope = 5.0;
  bool smooth = false;  // sigmoid spikes instead of Heaviside (gradient checks)
  bool detach_reset = true;
};

/// Cross-entropy of the rate-normalized confidence for one input raster and
/// its gradient with respect to the effective weights. `grads` (when non-null)
/// must match the weight shapes and is accumulated into.
struct LossEval {
  double loss = 0.0;
  int predicted = 0;
};
LossEval loss_and_grad(const SpikingNetwork& net, const std::vector<Matrix<double>>& weights,
                       const SpikeTrain& input, int label, const SpikeFunction& spike,
                       double rate_epsilon, std::vector<Matrix<double>>* grads);

/// Variational training of the Bernoulli posterior with relaxed weights
/// w = tanh((w_r + delta) / tau), logistic delta, one draw per minibatch.
TrainResult train(const std::vector<SpikeTrain>& inputs, const std::vector<int>& labels,
                  const SpikingNetwork& net, const TrainConfig& cfg);

/// Point-estimate training: delta = 0 and w = sign(w_r) with a
/// straight-through gradient on |w_r| <= 1.
TrainResult train_frequentist(const std::vector<SpikeTrain>& inputs,
                              const std::vector<int>& labels, const SpikingNetwork& net,
                              const TrainConfig& cfg);

/// sign(w_r) per entry, zero mapped to +1.
std::vector<Matrix<double>> binarize(const RealWeightTensor& w_r);

}  // namespace pcmsim
