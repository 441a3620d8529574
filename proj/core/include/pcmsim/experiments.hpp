#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "pcmsim/config.hpp"
#include "pcmsim/data.hpp"
#include "pcmsim/metrics.hpp"
#include "pcmsim/snn.hpp"
#include "pcmsim/trainer.hpp"

namespace pcmsim {

/// Encoded train/test rasters plus the network they feed.
struct PreparedData {
  SpikingNetwork net;
  SpikeEncoder encoder;
  MinMaxScaler scaler;
  std::vector<SpikeTrain> train_x;
  std::vector<int> train_y;
  std::vector<SpikeTrain> test_x;
  std::vector<int> test_y;
  std::size_t n_off_manifold = 0;  // trailing test rows drawn away from both moons
};

/// Loads or generates the dataset, splits, scales, fits the encoder on the
/// training rows and encodes both sets. Everything derives from cfg.seed.
PreparedData prepare_data(const ExperimentConfig& cfg);

/// Two-moons held-out set: `n_test` fresh samples followed by `ood_points`
/// grid-bounded points farther than `ood_margin` from both arcs, labelled by
/// a fair coin.
Dataset two_moons_heldout(const DatasetConfig& cfg, std::uint64_t seed);

HardwareConfig hardware_config(const ExperimentConfig& cfg, std::size_t l_noise_cols);

TrainResult train_weights(const ExperimentConfig& cfg, const PreparedData& data,
                          bool frequentist);

/// The configured weight file when present (checked against the topology),
/// otherwise freshly trained weights.
RealWeightTensor obtain_weights(const ExperimentConfig& cfg, const PreparedData& data,
                                bool frequentist);

/// Seed of the hardware cores for a given L; shared by map and infer so a
/// snapshot reproduces the run that produced it.
std::uint64_t hardware_seed(const ExperimentConfig& cfg, std::size_t l_noise_cols);

/// Ensemble evaluation of one mode at several ensemble sizes. `w` holds the
/// Bayesian w_r, or the frequentist weights for the committee machine.
std::vector<EvalReport> evaluate_mode(const ExperimentConfig& cfg, const SpikingNetwork& net,
                                      const RealWeightTensor& w, EvalMode mode,
                                      std::span<const std::size_t> ks, std::size_t l_noise_cols,
                                      std::span<const SpikeTrain> inputs,
                                      std::span<const int> labels);

/// Deterministic sign(w) network, one member.
EvalReport evaluate_frequentist(const ExperimentConfig& cfg, const SpikingNetwork& net,
                                const RealWeightTensor& w_freq,
                                std::span<const SpikeTrain> inputs, std::span<const int> labels);

struct SweepRow {
  std::string mode;  // "hardware" or a baseline name
  std::size_t l_noise_cols = 0;
  std::size_t k = 0;
  double accuracy = 0.0;
  double ece = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> hardware;   // |L| x |K| rows, L-major
  std::vector<SweepRow> baselines;  // fp32, fxp8 and cm per K, then the frequentist single model
};

SweepTable run_sweep(const ExperimentConfig& cfg, const PreparedData& data,
                     const RealWeightTensor& w_r, const RealWeightTensor& w_freq);

/// Class-1 probability per grid point for each ensemble size.
struct ConfidenceMap {
  Matrix<double> points;                 // grid points, raw coordinates
  std::vector<std::size_t> ks;
  std::vector<std::vector<double>> p1;   // per K, per point
  std::vector<double> frequentist_p1;    // single deterministic model
};

ConfidenceMap two_moons_confidence_map(const ExperimentConfig& cfg, const PreparedData& data,
                                       const RealWeightTensor& w_r,
                                       const RealWeightTensor& w_freq);

/// Fraction of values inside [lo, hi].
double fraction_in_band(std::span<const double> values, double lo, double hi);

// Commands. Each writes its artifacts into cfg.output_dir and returns their paths.
std::vector<std::filesystem::path> cmd_train(const ExperimentConfig& cfg, EvalMode mode);
std::vector<std::filesystem::path> cmd_map(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> cmd_infer(const ExperimentConfig& cfg, EvalMode mode,
                                             const std::optional<std::filesystem::path>& input);
std::vector<std::filesystem::path> cmd_sweep_l(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> cmd_two_moons_map(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> cmd_area(const ExperimentConfig& cfg);

}  // namespace pcmsim
