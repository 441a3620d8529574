#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pcmsim/matrix.hpp"

namespace pcmsim {

enum class ResetMode { kToZero, kSubtract };

/// Discrete-time leaky integrate-and-fire parameters.
struct LifConfig {
  double beta = 0.9;   // membrane decay, [0, 1)
  double theta = 1.0;  // firing threshold
  ResetMode reset = ResetMode::kToZero;
  std::size_t t_steps = 50;
  double gain_scale = 1.0;  // per-layer gain = gain_scale * theta / sqrt(fan_in)
  double syn_decay = 0.0;   // one-pole synaptic trace; 0 disables it

  void validate() const;
};

/// Binary spike raster, [t_steps x neurons].
using SpikeTrain = Matrix<std::uint8_t>;

/// One LIF update in place: u <- beta*u + current, spike where u >= theta,
/// then reset. Throws NumericError on a non-finite current.
void lif_step(std::span<double> u, std::span<const double> current, const LifConfig& cfg,
              std::span<std::uint8_t> spikes);

/// Fully connected feed-forward LIF network. Layer l maps layer_sizes[l] to
/// layer_sizes[l + 1] through a [fan_in x fan_out] weight matrix.
class SpikingNetwork {
 public:
  SpikingNetwork(std::vector<std::size_t> layer_sizes, LifConfig cfg);

  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  std::size_t num_layers() const noexcept { return sizes_.size() - 1; }
  const LifConfig& lif() const noexcept { return cfg_; }
  /// Current injected per presynaptic spike for each layer.
  double gain(std::size_t layer) const { return gains_.at(layer); }

  /// Throws ArgumentError when the weight shapes do not match the topology.
  void check_weights(const std::vector<Matrix<double>>& weights) const;

  /// Output-layer spikes for one input raster.
  SpikeTrain forward(const std::vector<Matrix<double>>& weights, const SpikeTrain& input) const;

  /// Spike rasters of every layer, input included.
  std::vector<SpikeTrain> forward_all(const std::vector<Matrix<double>>& weights,
                                      const SpikeTrain& input) const;

 private:
  std::vector<std::size_t> sizes_;
  LifConfig cfg_;
  std::vector<double> gains_;
};

/// Per-neuron spike count divided by t_steps.
std::vector<double> spike_rates(const SpikeTrain& out);

/// Rates normalized to sum to one; uniform when no output neuron fired.
std::vector<double> rate_decode(const SpikeTrain& out);

}  // namespace pcmsim
