#include "pcmsim/snn.hpp"

#include <cmath>
#include <numeric>

#include "pcmsim/errors.hpp"

namespace pcmsim {

void LifConfig::validate() const {
  if (!(beta >= 0.0 && beta < 1.0)) throw ArgumentError("lif: beta must be in [0, 1)");
  if (!(theta > 0.0)) throw ArgumentError("lif: theta must be > 0");
  if (t_steps == 0) throw ArgumentError("lif: t_steps must be >= 1");
  if (!(gain_scale > 0.0)) throw ArgumentError("lif: gain_scale must be > 0");
  if (!(syn_decay >= 0.0 && syn_decay < 1.0)) throw ArgumentError("lif: syn_decay must be in [0, 1)");
}

void lif_step(std::span<double> u, std::span<const double> current, const LifConfig& cfg,
              std::span<std::uint8_t> spikes) {
  if (u.size() != current.size() || u.size() != spikes.size()) {
    throw ArgumentError("lif_step: shape mismatch");
  }
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (!std::isfinite(current[j])) throw NumericError("lif_step: non-finite input current");
    double v = cfg.beta * u[j] + current[j];
    const bool fired = v >= cfg.theta;
    spikes[j] = fired ? 1 : 0;
    if (fired) v = cfg.reset == ResetMode::kToZero ? 0.0 : v - cfg.theta;
    u[j] = v;
  }
}

SpikingNetwork::SpikingNetwork(std::vector<std::size_t> layer_sizes, LifConfig cfg)
    : sizes_(std::move(layer_sizes)), cfg_(cfg) {
  cfg_.validate();
  if (sizes_.size() < 2) throw ArgumentError("network: need at least input and output layers");
  for (auto s : sizes_) {
    if (s == 0) throw ArgumentError("network: empty layer");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    gains_.push_back(cfg_.gain_scale * cfg_.theta / std::sqrt(static_cast<double>(sizes_[l])));
  }
}

void SpikingNetwork::check_weights(const std::vector<Matrix<double>>& weights) const {
  if (weights.size() != num_layers()) throw ArgumentError("network: wrong number of layers");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != sizes_[l] || weights[l].cols() != sizes_[l + 1]) {
      throw ArgumentError("network: weight shape mismatch at layer " + std::to_string(l));
    }
  }
}

std::vector<SpikeTrain> SpikingNetwork::forward_all(const std::vector<Matrix<double>>& weights,
                                                    const SpikeTrain& input) const {
  check_weights(weights);
  if (input.cols() != sizes_.front()) throw ArgumentError("forward: input width mismatch");
  const std::size_t steps = input.rows();

  std::vector<SpikeTrain> rasters;
  rasters.reserve(sizes_.size());
  rasters.push_back(input);
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const auto& w = weights[l];
    const auto& pre = rasters.back();
    const std::size_t n_out = sizes_[l + 1];
    SpikeTrain post(steps, n_out);
    std::vector<double> u(n_out, 0.0), current(n_out), trace(n_out, 0.0);
    for (std::size_t t = 0; t < steps; ++t) {
      std::fill(current.begin(), current.end(), 0.0);
      const auto spikes_in = pre.row(t);
      for (std::size_t i = 0; i < spikes_in.size(); ++i) {
        if (!spikes_in[i]) continue;
        const auto row = w.row(i);
        for (std::size_t j = 0; j < n_out; ++j) current[j] += row[j];
      }
      for (auto& c : current) c *= gains_[l];
      if (cfg_.syn_decay > 0.0) {
        for (std::size_t j = 0; j < n_out; ++j) {
          trace[j] = cfg_.syn_decay * trace[j] + current[j];
          current[j] = trace[j];
        }
      }
      lif_step(u, current, cfg_, post.row(t));
    }
    rasters.push_back(std::move(post));
  }
  return rasters;
}

SpikeTrain SpikingNetwork::forward(const std::vector<Matrix<double>>& weights,
                                   const SpikeTrain& input) const {
  auto rasters = forward_all(weights, input);
  return std::move(rasters.back());
}

std::vector<double> spike_rates(const SpikeTrain& out) {
  if (out.rows() == 0) throw ArgumentError("spike_rates: empty raster");
  std::vector<double> rates(out.cols(), 0.0);
  for (std::size_t t = 0; t < out.rows(); ++t) {
    const auto row = out.row(t);
    for (std::size_t j = 0; j < row.size(); ++j) rates[j] += row[j];
  }
  for (auto& r : rates) r /= static_cast<double>(out.rows());
  return rates;
}

std::vector<double> rate_decode(const SpikeTrain& out) {
  auto rates = spike_rates(out);
  const double total = std::accumulate(rates.begin(), rates.end(), 0.0);
  if (total == 0.0) {
    std::fill(rates.begin(), rates.end(), 1.0 / static_cast<double>(rates.size()));
  } else {
    for (auto& r : rates) r /= total;
  }
  return rates;
}

}  // namespace pcmsim
