#include "pcmsim/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "pcmsim/errors.hpp"

namespace pcmsim {

std::vector<ReliabilityBin> reliability_bins(std::span<const double> confidences,
                                             std::span<const std::uint8_t> correct,
                                             std::size_t n_bins) {
  if (confidences.empty()) throw ArgumentError("ece: empty input");
  if (confidences.size() != correct.size()) throw ArgumentError("ece: size mismatch");
  if (n_bins == 0) throw ArgumentError("ece: n_bins must be >= 1");

  std::vector<ReliabilityBin> bins(n_bins);
  std::vector<double> conf_sum(n_bins, 0.0), hit_sum(n_bins, 0.0);
  for (std::size_t b = 0; b < n_bins; ++b) {
    bins[b].lo = static_cast<double>(b) / static_cast<double>(n_bins);
    bins[b].hi = static_cast<double>(b + 1) / static_cast<double>(n_bins);
  }
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const double c = confidences[i];
    if (!(c >= 0.0 && c <= 1.0)) throw ArgumentError("ece: confidence outside [0, 1]");
    const auto b = std::min(static_cast<std::size_t>(c * static_cast<double>(n_bins)), n_bins - 1);
    conf_sum[b] += c;
    hit_sum[b] += correct[i] ? 1.0 : 0.0;
    ++bins[b].count;
  }
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (bins[b].count == 0) continue;
    const auto n = static_cast<double>(bins[b].count);
    bins[b].mean_confidence = conf_sum[b] / n;
    bins[b].accuracy = hit_sum[b] / n;
  }
  return bins;
}

double ece_from_bins(const std::vector<ReliabilityBin>& bins) {
  std::size_t total = 0;
  for (const auto& b : bins) total += b.count;
  if (total == 0) throw ArgumentError("ece: empty bins");
  double ece = 0.0;
  for (const auto& b : bins) {
    if (b.count == 0) continue;
    ece += static_cast<double>(b.count) / static_cast<double>(total) *
           std::abs(b.accuracy - b.mean_confidence);
  }
  return ece;
}

double expected_calibration_error(std::span<const double> confidences,
                                  std::span<const std::uint8_t> correct, std::size_t n_bins) {
  return ece_from_bins(reliability_bins(confidences, correct, n_bins));
}

int predict_class(std::span<const double> confidence) {
  return static_cast<int>(std::max_element(confidence.begin(), confidence.end()) -
                          confidence.begin());
}

EvalReport make_report(std::string mode, std::size_t n_ensemble,
                       std::vector<std::vector<double>> confidences, std::span<const int> labels,
                       std::size_t n_bins) {
  if (confidences.size() != labels.size()) throw ArgumentError("report: size mismatch");
  std::vector<double> top(confidences.size());
  std::vector<std::uint8_t> correct(confidences.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < confidences.size(); ++i) {
    const int pred = predict_class(confidences[i]);
    top[i] = confidences[i][static_cast<std::size_t>(pred)];
    correct[i] = pred == labels[i] ? 1 : 0;
    hits += correct[i];
  }
  EvalReport report;
  report.mode = std::move(mode);
  report.n_ensemble = n_ensemble;
  report.bins = reliability_bins(top, correct, n_bins);
  report.ece = ece_from_bins(report.bins);
  report.accuracy = static_cast<double>(hits) / static_cast<double>(labels.size());
  report.confidences = std::move(confidences);
  return report;
}

SamplerSource::SamplerSource(SamplerSpec spec, RealWeightTensor w_r, std::uint64_t seed)
    : spec_(spec), w_r_(std::move(w_r)), seed_(seed) {
  spec_.validate();
}

std::vector<Matrix<double>> SamplerSource::draw(std::size_t member) {
  std::vector<Matrix<double>> out;
  out.reserve(w_r_.size());
  for (std::size_t l = 0; l < w_r_.size(); ++l) {
    Rng rng = make_rng(seed_, {id(Stream::kSampler), member, l});
    out.push_back(sample(spec_, w_r_[l], rng));
  }
  return out;
}

namespace {

Matrix<double> to_double(const Matrix<std::int8_t>& m) {
  Matrix<double> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.size(); ++i) out.flat()[i] = m.flat()[i];
  return out;
}

}  // namespace

HardwareSource::HardwareSource(const RealWeightTensor& w_r, const HardwareConfig& cfg,
                               std::uint64_t seed)
    : cfg_(cfg), seed_(seed) {
  for (std::size_t l = 0; l < w_r.size(); ++l) {
    programs_.push_back(
        build_plane_program(w_r[l], cfg.crossbar.l_noise_cols, cfg.mapping, cfg.noise));
    CrossbarCore core(w_r[l].rows(), w_r[l].cols(), cfg.crossbar, cfg.noise, cfg.mapping.kappa,
                      derive_seed(seed, {l}));
    core.program_planes(programs_.back());
    cores_.push_back(std::move(core));
  }
}

void HardwareSource::restore_weight_planes(const std::vector<Matrix<ConductancePair>>& realized) {
  if (realized.size() != cores_.size()) {
    throw ArgumentError("restore_weight_planes: layer count mismatch");
  }
  for (std::size_t l = 0; l < cores_.size(); ++l) cores_[l].restore_weight_plane(realized[l]);
}

std::vector<Matrix<double>> HardwareSource::draw(std::size_t member) {
  std::vector<Matrix<double>> out;
  out.reserve(cores_.size());
  for (std::size_t l = 0; l < cores_.size(); ++l) {
    cores_[l].reseed(derive_seed(seed_, {l, member + 1}));
    out.push_back(to_double(cores_[l].draw_sample(cfg_.read_index).values));
  }
  return out;
}

CommitteeSource::CommitteeSource(const RealWeightTensor& w_r, const HardwareConfig& cfg,
                                 std::uint64_t seed)
    : cfg_(cfg), seed_(seed) {
  cfg.mapping.validate(cfg.noise);
  // Magnitudes below one ADC step would read as zero and tie to +1; lifting
  // them to one step keeps the noise-free read equal to sign(w_r).
  const double floor = cfg.crossbar.adc.lsb() / cfg.mapping.scale();
  for (const auto& w : w_r) {
    Matrix<ConductancePair> t(w.rows(), w.cols());
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double v = w.flat()[i];
      const double lifted = std::abs(v) >= floor ? v : (v < 0.0 ? -floor : floor);
      t.flat()[i] = map_weight(lifted, cfg.mapping);
    }
    targets_.push_back(std::move(t));
  }
}

std::vector<Matrix<double>> CommitteeSource::draw(std::size_t member) {
  std::vector<Matrix<double>> out;
  out.reserve(targets_.size());
  auto xbar = cfg_.crossbar;
  xbar.l_noise_cols = 1;
  for (std::size_t l = 0; l < targets_.size(); ++l) {
    CrossbarCore core(targets_[l].rows(), targets_[l].cols(), xbar, cfg_.noise,
                      cfg_.mapping.kappa, derive_seed(seed_, {l, member}));
    core.program_weight_plane(targets_[l]);
    out.push_back(to_double(core.sample_deterministic(cfg_.read_index)));
  }
  return out;
}

std::vector<std::vector<double>> ensemble_predict(WeightSource& source, const SpikingNetwork& net,
                                                  std::span<const SpikeTrain> inputs,
                                                  std::size_t k) {
  if (k == 0) throw ArgumentError("ensemble_predict: K must be >= 1");
  const std::size_t ks[] = {k};
  return std::move(ensemble_predict_sizes(source, net, inputs, ks).front());
}

std::vector<std::vector<std::vector<double>>> ensemble_predict_sizes(
    WeightSource& source, const SpikingNetwork& net, std::span<const SpikeTrain> inputs,
    std::span<const std::size_t> ks) {
  if (ks.empty()) return {};
  for (auto k : ks) {
    if (k == 0) throw ArgumentError("ensemble_predict_sizes: K must be >= 1");
  }
  const std::size_t k_max = *std::max_element(ks.begin(), ks.end());
  const std::size_t n_out = net.layer_sizes().back();
  // Running mean, so identical members reproduce the single model exactly.
  std::vector<std::vector<double>> mean(inputs.size(), std::vector<double>(n_out, 0.0));
  std::vector<std::vector<std::vector<double>>> out(ks.size());
  for (std::size_t member = 0; member < k_max; ++member) {
    const auto weights = source.draw(member);
    const double inv = 1.0 / static_cast<double>(member + 1);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const auto conf = rate_decode(net.forward(weights, inputs[i]));
      for (std::size_t c = 0; c < n_out; ++c) mean[i][c] += (conf[c] - mean[i][c]) * inv;
    }
    for (std::size_t j = 0; j < ks.size(); ++j) {
      if (ks[j] == member + 1) out[j] = mean;
    }
  }
  return out;
}

EvalReport committee_machine_eval(const RealWeightTensor& w_frequentist, const HardwareConfig& cfg,
                                  const SpikingNetwork& net, std::span<const SpikeTrain> inputs,
                                  std::span<const int> labels, std::size_t k_members,
                                  std::uint64_t seed, std::size_t n_bins) {
  CommitteeSource source(w_frequentist, cfg, seed);
  return make_report("cm-K" + std::to_string(k_members), k_members,
                     ensemble_predict(source, net, inputs, k_members), labels, n_bins);
}

EvalReport fxp8_eval(const RealWeightTensor& w_r, const SamplerSpec& fxp8_spec,
                     const SpikingNetwork& net, std::span<const SpikeTrain> inputs,
                     std::span<const int> labels, std::size_t k, std::uint64_t seed,
                     std::size_t n_bins) {
  if (fxp8_spec.kind != SamplerKind::kFxp8) throw ArgumentError("fxp8_eval: sampler must be fxp8");
  SamplerSource source(fxp8_spec, w_r, seed);
  return make_report("fxp8", k, ensemble_predict(source, net, inputs, k), labels, n_bins);
}

}  // namespace pcmsim
