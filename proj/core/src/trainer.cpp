#include "pcmsim/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "pcmsim/errors.hpp"
#include "pcmsim/sampler.hpp"

namespace pcmsim {

void TrainConfig::validate() const {
  if (!(tau > 0.0)) throw ArgumentError("train: tau must be > 0");
  if (!(lr > 0.0)) throw ArgumentError("train: lr must be > 0");
  if (!(kl_weight >= 0.0)) throw ArgumentError("train: kl_weight must be >= 0");
  if (batch_size == 0) throw ArgumentError("train: batch_size must be >= 1");
  if (!(surrogate_slope > 0.0)) throw ArgumentError("train: surrogate_slope must be > 0");
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

LossEval loss_and_grad(const SpikingNetwork& net, const std::vector<Matrix<double>>& weights,
                       const SpikeTrain& input, int label, const SpikeFunction& spike,
                       double rate_epsilon, std::vector<Matrix<double>>* grads) {
  net.check_weights(weights);
  const auto& lif = net.lif();
  if (lif.syn_decay != 0.0) throw ArgumentError("train: synaptic trace is not differentiable here");
  const auto& sizes = net.layer_sizes();
  const std::size_t steps = input.rows();
  const std::size_t layers = net.num_layers();

  // s[l] holds layer l's spikes (l = 0 is the input); u[l] the pre-reset
  // membrane of layer l (l >= 1).
  std::vector<Matrix<double>> s(layers + 1), u(layers + 1);
  s[0] = Matrix<double>(steps, sizes[0]);
  for (std::size_t i = 0; i < input.size(); ++i) s[0].flat()[i] = input.flat()[i];

  for (std::size_t l = 1; l <= layers; ++l) {
    const std::size_t n = sizes[l];
    const auto& w = weights[l - 1];
    const double gain = net.gain(l - 1);
    s[l] = Matrix<double>(steps, n);
    u[l] = Matrix<double>(steps, n);
    std::vector<double> post(n, 0.0), current(n);
    for (std::size_t t = 0; t < steps; ++t) {
      std::fill(current.begin(), current.end(), 0.0);
      const auto pre = s[l - 1].row(t);
      for (std::size_t i = 0; i < pre.size(); ++i) {
        if (pre[i] == 0.0) continue;
        const auto row = w.row(i);
        for (std::size_t j = 0; j < n; ++j) current[j] += pre[i] * row[j];
      }
      auto ur = u[l].row(t);
      auto sr = s[l].row(t);
      for (std::size_t j = 0; j < n; ++j) {
        const double v = lif.beta * post[j] + gain * current[j];
        const double fired = spike.smooth ? sigmoid(spike.slope * (v - lif.theta))
                                          : (v >= lif.theta ? 1.0 : 0.0);
        ur[j] = v;
        sr[j] = fired;
        post[j] = lif.reset == ResetMode::kToZero ? v * (1.0 - fired) : v - lif.theta * fired;
      }
    }
  }

  const std::size_t n_out = sizes.back();
  std::vector<double> z(n_out, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t k = 0; k < n_out; ++k) z[k] += s[layers](t, k);
  }
  for (auto& v : z) v = v / static_cast<double>(steps) + rate_epsilon;
  const double zsum = std::accumulate(z.begin(), z.end(), 0.0);

  LossEval out;
  out.loss = -std::log(z[static_cast<std::size_t>(label)] / zsum);
  out.predicted = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
  if (!grads) return out;

  // dL/ds for the output layer, spread uniformly over timesteps.
  std::vector<Matrix<double>> ds(layers + 1);
  ds[layers] = Matrix<double>(steps, n_out);
  for (std::size_t k = 0; k < n_out; ++k) {
    const double dr = (k == static_cast<std::size_t>(label) ? -1.0 / z[k] : 0.0) + 1.0 / zsum;
    for (std::size_t t = 0; t < steps; ++t) ds[layers](t, k) = dr / static_cast<double>(steps);
  }

  for (std::size_t l = layers; l >= 1; --l) {
    const std::size_t n = sizes[l];
    const std::size_t n_in = sizes[l - 1];
    const auto& w = weights[l - 1];
    auto& gw = (*grads)[l - 1];
    const double gain = net.gain(l - 1);
    if (l > 1) ds[l - 1] = Matrix<double>(steps, n_in);
    std::vector<double> du_post(n, 0.0), di(n);
    for (std::size_t t = steps; t-- > 0;) {
      const auto ur = u[l].row(t);
      const auto sr = s[l].row(t);
      const auto dsr = ds[l].row(t);
      bool any = false;
      for (std::size_t j = 0; j < n; ++j) {
        const double sig = sigmoid(spike.slope * (ur[j] - lif.theta));
        const double sp = spike.slope * sig * (1.0 - sig);
        double du_pre = 0.0;
        if (lif.reset == ResetMode::kToZero) {
          du_pre = du_post[j] * (1.0 - sr[j]);
          du_pre += (spike.detach_reset ? dsr[j] : dsr[j] - du_post[j] * ur[j]) * sp;
        } else {
          du_pre = du_post[j];
          du_pre += (spike.detach_reset ? dsr[j] : dsr[j] - lif.theta * du_post[j]) * sp;
        }
        di[j] = du_pre;
        du_post[j] = lif.beta * du_pre;
        any = any || du_pre != 0.0;
      }
      if (!any) continue;
      const auto pre = s[l - 1].row(t);
      for (std::size_t i = 0; i < n_in; ++i) {
        if (pre[i] != 0.0) {
          auto grow = gw.row(i);
          const double a = gain * pre[i];
          for (std::size_t j = 0; j < n; ++j) grow[j] += a * di[j];
        }
        if (l > 1) {
          const auto row = w.row(i);
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += row[j] * di[j];
          ds[l - 1](t, i) += gain * acc;
        }
      }
    }
  }
  return out;
}

namespace {

struct Adam {
  double lr;
  double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::size_t step = 0;
  std::vector<std::vector<double>> m, v;

  Adam(double lr_, const RealWeightTensor& shape) : lr(lr_) {
    for (const auto& w : shape) {
      m.emplace_back(w.size(), 0.0);
      v.emplace_back(w.size(), 0.0);
    }
  }

  void update(RealWeightTensor& params, const std::vector<Matrix<double>>& grads, double clip) {
    ++step;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step));
    for (std::size_t l = 0; l < params.size(); ++l) {
      auto p = params[l].flat();
      const auto g = grads[l].flat();
      for (std::size_t i = 0; i < p.size(); ++i) {
        m[l][i] = b1 * m[l][i] + (1.0 - b1) * g[i];
        v[l][i] = b2 * v[l][i] + (1.0 - b2) * g[i] * g[i];
        p[i] -= lr * (m[l][i] / c1) / (std::sqrt(v[l][i] / c2) + eps);
        p[i] = std::clamp(p[i], -clip, clip);
      }
    }
  }
};

double weight_norm(const RealWeightTensor& w) {
  double acc = 0.0;
  for (const auto& m : w) {
    for (double v : m.flat()) acc += v * v;
  }
  return std::sqrt(acc);
}

enum class Objective { kBayesian, kFrequentist };

TrainResult run_training(const std::vector<SpikeTrain>& inputs, const std::vector<int>& labels,
                         const SpikingNetwork& net, const TrainConfig& cfg, Objective objective) {
  cfg.validate();
  if (inputs.size() != labels.size() || inputs.empty()) {
    throw ArgumentError("train: inputs and labels must be non-empty and aligned");
  }
  const auto& sizes = net.layer_sizes();
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= sizes.back()) {
      throw ArgumentError("train: label out of range");
    }
  }

  Rng init_rng = make_rng(cfg.seed, {id(Stream::kTrain), 0});
  Rng noise_rng = make_rng(cfg.seed, {id(Stream::kTrain), 1});
  Rng order_rng = make_rng(cfg.seed, {id(Stream::kTrain), 2});
  std::normal_distribution<double> init(0.0, cfg.init_std);

  TrainResult result;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    Matrix<double> w(sizes[l], sizes[l + 1]);
    for (auto& v : w.flat()) v = init(init_rng);
    result.w_r.push_back(std::move(w));
  }

  const SpikeFunction spike{cfg.surrogate_slope, false, cfg.detach_reset};
  const double kl_full = cfg.kl_weight / static_cast<double>(inputs.size());
  Adam adam(cfg.lr, result.w_r);
  std::vector<std::size_t> order(inputs.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<Matrix<double>> eff(result.w_r.size()), grads(result.w_r.size());
  std::vector<Matrix<double>> delta(result.w_r.size());
  for (std::size_t l = 0; l < result.w_r.size(); ++l) {
    eff[l] = Matrix<double>(result.w_r[l].rows(), result.w_r[l].cols());
    grads[l] = eff[l];
    delta[l] = eff[l];
  }

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    const double kl_scale =
        cfg.kl_warmup_epochs == 0
            ? kl_full
            : kl_full * std::min(1.0, static_cast<double>(epoch + 1) /
                                          static_cast<double>(cfg.kl_warmup_epochs));
    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      for (std::size_t l = 0; l < eff.size(); ++l) {
        const auto wr = result.w_r[l].flat();
        auto we = eff[l].flat();
        auto d = delta[l].flat();
        for (std::size_t i = 0; i < wr.size(); ++i) {
          if (objective == Objective::kBayesian) {
            d[i] = logistic_noise(noise_rng);
            we[i] = std::tanh((wr[i] + d[i]) / cfg.tau);
          } else {
            we[i] = wr[i] >= 0.0 ? 1.0 : -1.0;
          }
        }
        std::fill(grads[l].flat().begin(), grads[l].flat().end(), 0.0);
      }

      for (std::size_t b = start; b < end; ++b) {
        const auto idx = order[b];
        const auto eval = loss_and_grad(net, eff, inputs[idx], labels[idx], spike,
                                        cfg.rate_epsilon, &grads);
        loss_sum += eval.loss;
        correct += eval.predicted == labels[idx] ? 1 : 0;
      }
      if (!std::isfinite(loss_sum)) {
        std::ostringstream msg;
        msg << "train: loss became non-finite in epoch " << epoch << " at sample " << start;
        throw TrainingError(msg.str());
      }

      // Chain rule to w_r, average over the batch, then (Bayesian only) the KL
      // term KL(Bern(sigmoid(2 w_r)) || Bern(1/2)) whose derivative is 4 w_r p (1 - p).
      const double inv_b = 1.0 / static_cast<double>(end - start);
      for (std::size_t l = 0; l < grads.size(); ++l) {
        auto g = grads[l].flat();
        const auto wr = result.w_r[l].flat();
        const auto we = eff[l].flat();
        for (std::size_t i = 0; i < g.size(); ++i) {
          double gi = g[i] * inv_b;
          if (objective == Objective::kBayesian) {
            gi *= (1.0 - we[i] * we[i]) / cfg.tau;
            const double p = bernoulli_param(wr[i]);
            gi += kl_scale * 4.0 * wr[i] * p * (1.0 - p);
          } else {
            gi *= std::abs(wr[i]) <= 1.0 ? 1.0 : 0.0;
          }
          g[i] = gi;
        }
      }
      adam.update(result.w_r, grads, cfg.weight_clip);
    }

    EpochLog entry;
    entry.loss = loss_sum / static_cast<double>(order.size());
    entry.accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
    entry.weight_norm = weight_norm(result.w_r);
    result.log.push_back(entry);
  }
  return result;
}

}  // namespace

TrainResult train(const std::vector<SpikeTrain>& inputs, const std::vector<int>& labels,
                  const SpikingNetwork& net, const TrainConfig& cfg) {
  return run_training(inputs, labels, net, cfg, Objective::kBayesian);
}

TrainResult train_frequentist(const std::vector<SpikeTrain>& inputs,
                              const std::vector<int>& labels, const SpikingNetwork& net,
                              const TrainConfig& cfg) {
  return run_training(inputs, labels, net, cfg, Objective::kFrequentist);
}

std::vector<Matrix<double>> binarize(const RealWeightTensor& w_r) {
  std::vector<Matrix<double>> out;
  out.reserve(w_r.size());
  for (const auto& m : w_r) {
    Matrix<double> b(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.size(); ++i) b.flat()[i] = m.flat()[i] >= 0.0 ? 1.0 : -1.0;
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace pcmsim
