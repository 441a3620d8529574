#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcmsim/area.hpp"
#include "pcmsim/crossbar.hpp"
#include "pcmsim/data.hpp"
#include "pcmsim/pcm_device.hpp"
#include "pcmsim/sampler.hpp"
#include "pcmsim/snn.hpp"
#include "pcmsim/trainer.hpp"
#include "pcmsim/weight_mapper.hpp"

namespace pcmsim {

enum class DatasetKind { kWbcd, kTwoMoons };
enum class EvalMode { kHardware, kFp32, kFxp8, kCommittee };

struct DatasetConfig {
  DatasetKind kind = DatasetKind::kWbcd;
  std::filesystem::path path;  // WBCD CSV
  double train_fraction = 0.8;
  TwoMoonsSpec two_moons;
  std::size_t n_test = 400;      // two-moons held-out samples
  double ood_margin = 0.6;       // off-manifold points lie farther than this from both arcs
  std::size_t ood_points = 400;  // off-manifold held-out points (labels drawn uniformly)
};

struct EvalConfig {
  EvalMode mode = EvalMode::kHardware;
  std::size_t k = 32;
  std::vector<std::size_t> ensemble_sizes = {1, 2, 4, 8, 16, 32, 64};
  std::vector<std::size_t> l_values = {1, 16};
  std::size_t n_bins = 10;
};

/// Complete description of one experiment; every field has a default and
/// the JSON document may override any subset.
struct ExperimentConfig {
  DatasetConfig dataset;
  EncoderConfig encoder;
  std::vector<std::size_t> hidden = {64, 64};
  LifConfig lif;
  TrainConfig train;
  MappingConfig mapping;
  NoiseModelConfig noise;
  CrossbarConfig crossbar;
  SamplerSpec sampler;  // fp32 mode
  SamplerSpec fxp8{SamplerKind::kFxp8};
  EvalConfig eval;
  AreaModelConfig area;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  std::optional<std::filesystem::path> weights_path;
  std::optional<std::filesystem::path> frequentist_weights_path;

  nlohmann::json source;  // document the config was parsed from

  void validate() const;
};

/// Parses a config document. Relative paths resolve against `base_dir`.
/// Throws UsageError naming the offending field path.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

EvalMode parse_mode(const std::string& s);
std::string to_string(EvalMode mode);

}  // namespace pcmsim
