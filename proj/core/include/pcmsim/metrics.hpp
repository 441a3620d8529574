#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pcmsim/crossbar.hpp"
#include "pcmsim/matrix.hpp"
#include "pcmsim/sampler.hpp"
#include "pcmsim/snn.hpp"
#include "pcmsim/trainer.hpp"
#include "pcmsim/weight_mapper.hpp"

namespace pcmsim {

struct ReliabilityBin {
  double lo = 0.0;
  double hi = 0.0;
  double mean_confidence = 0.0;
  double accuracy = 0.0;
  std::size_t count = 0;
};

/// Equal-width bins on [0, 1]; the last bin is closed.
std::vector<ReliabilityBin> reliability_bins(std::span<const double> confidences,
                                             std::span<const std::uint8_t> correct,
                                             std::size_t n_bins = 10);

/// ECE = sum_b |B_b| / n * |acc(B_b) - conf(B_b)|. Throws ArgumentError for
/// empty input, mismatched sizes or n_bins = 0.
double expected_calibration_error(std::span<const double> confidences,
                                  std::span<const std::uint8_t> correct, std::size_t n_bins = 10);

double ece_from_bins(const std::vector<ReliabilityBin>& bins);

struct EvalReport {
  std::string mode;  // hardware-L<n>, fp32, fxp8, cm-K<n>, frequentist
  std::size_t n_ensemble = 0;
  double accuracy = 0.0;
  double ece = 0.0;
  std::vector<ReliabilityBin> bins;
  std::vector<std::vector<double>> confidences;  // per input, ensemble-averaged
};

/// Argmax with ties resolved to the lower class index.
int predict_class(std::span<const double> confidence);

EvalReport make_report(std::string mode, std::size_t n_ensemble,
                       std::vector<std::vector<double>> confidences, std::span<const int> labels,
                       std::size_t n_bins = 10);

/// Produces the weights of ensemble member `member`. Implementations derive
/// all randomness from (seed, member), so draws do not depend on call order.
class WeightSource {
 public:
  virtual ~WeightSource() = default;
  virtual std::vector<Matrix<double>> draw(std::size_t member) = 0;
};

/// Software sampler over q(w).
class SamplerSource : public WeightSource {
 public:
  SamplerSource(SamplerSpec spec, RealWeightTensor w_r, std::uint64_t seed);
  std::vector<Matrix<double>> draw(std::size_t member) override;

 private:
  SamplerSpec spec_;
  RealWeightTensor w_r_;
  std::uint64_t seed_;
};

/// The same weights for every member.
class FixedSource : public WeightSource {
 public:
  explicit FixedSource(std::vector<Matrix<double>> weights) : weights_(std::move(weights)) {}
  std::vector<Matrix<double>> draw(std::size_t) override { return weights_; }

 private:
  std::vector<Matrix<double>> weights_;
};

struct HardwareConfig {
  CrossbarConfig crossbar;
  NoiseModelConfig noise;
  MappingConfig mapping;
  std::size_t read_index = 0;
};

/// One programmed crossbar core per layer; each member refreshes the noise
/// register and samples binary weights.
class HardwareSource : public WeightSource {
 public:
  HardwareSource(const RealWeightTensor& w_r, const HardwareConfig& cfg, std::uint64_t seed);
  /// Replaces each core's weight plane with previously realized conductances.
  void restore_weight_planes(const std::vector<Matrix<ConductancePair>>& realized);
  std::vector<Matrix<double>> draw(std::size_t member) override;

  const std::vector<CrossbarCore>& cores() const noexcept { return cores_; }
  const std::vector<PlaneProgram>& programs() const noexcept { return programs_; }

 private:
  HardwareConfig cfg_;
  std::uint64_t seed_;
  std::vector<PlaneProgram> programs_;
  std::vector<CrossbarCore> cores_;
};

/// Committee-machine member: a weight plane holding the frequentist weights,
/// programmed independently per member, binarized by sign of the read.
class CommitteeSource : public WeightSource {
 public:
  CommitteeSource(const RealWeightTensor& w_r, const HardwareConfig& cfg, std::uint64_t seed);
  std::vector<Matrix<double>> draw(std::size_t member) override;

 private:
  HardwareConfig cfg_;
  std::uint64_t seed_;
  std::vector<Matrix<ConductancePair>> targets_;
};

/// Averages rate-decoded confidences over members 0..K-1 for every input.
std::vector<std::vector<double>> ensemble_predict(WeightSource& source, const SpikingNetwork& net,
                                                  std::span<const SpikeTrain> inputs,
                                                  std::size_t k);

/// Ensemble averages for several sizes at once: entry j averages members
/// 0..ks[j]-1, identical to ensemble_predict with k = ks[j].
std::vector<std::vector<std::vector<double>>> ensemble_predict_sizes(
    WeightSource& source, const SpikingNetwork& net, std::span<const SpikeTrain> inputs,
    std::span<const std::size_t> ks);

EvalReport committee_machine_eval(const RealWeightTensor& w_frequentist, const HardwareConfig& cfg,
                                  const SpikingNetwork& net, std::span<const SpikeTrain> inputs,
                                  std::span<const int> labels, std::size_t k_members,
                                  std::uint64_t seed, std::size_t n_bins = 10);

EvalReport fxp8_eval(const RealWeightTensor& w_r, const SamplerSpec& fxp8_spec,
                     const SpikingNetwork& net, std::span<const SpikeTrain> inputs,
                     std::span<const int> labels, std::size_t k, std::uint64_t seed,
                     std::size_t n_bins = 10);

}  // namespace pcmsim
