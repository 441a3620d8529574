#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcmsim/area.hpp"
#include "pcmsim/metrics.hpp"
#include "pcmsim/trainer.hpp"
#include "pcmsim/weight_mapper.hpp"

namespace pcmsim {

/// Version string baked in at configure time (git describe when available).
const char* version_string() noexcept;

std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Identifies the run that produced an artifact.
struct Provenance {
  std::string config_hash;  // 16 hex digits of FNV-1a over the canonical config
  std::uint64_t seed = 0;
  std::string version;

  nlohmann::json to_json() const;
  /// Lines of the form "# key: value" for CSV headers.
  std::string csv_header() const;
};

/// Hash over the canonical (sorted-key, compact) dump of the config document.
Provenance make_provenance(const nlohmann::json& config_doc, std::uint64_t seed);

/// Writes to a sibling temporary file and renames it over `path`, so readers
/// never observe a partially written artifact. Creates parent directories.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& doc);

/// Compact, locale-independent rendering used in every CSV.
std::string format_double(double v);

struct WeightFile {
  std::string kind;  // "bayesian" or "frequentist"
  std::vector<std::size_t> layer_sizes;
  RealWeightTensor w_r;
  std::vector<EpochLog> log;
};

nlohmann::json weights_to_json(const WeightFile& file, const Provenance& prov);
/// Throws FormatError when the document does not describe a weight file.
WeightFile weights_from_json(const nlohmann::json& doc);
WeightFile load_weights(const std::filesystem::path& path);

/// Programmed state of every layer's core.
struct LayerSnapshot {
  Matrix<double> w_r;
  std::size_t l_noise_cols = 0;
  double noise_target = 0.0;
  Matrix<ConductancePair> weight_targets;
  Matrix<ConductancePair> weight_realized;
  Matrix<ConductancePair> noise_realized;
  std::size_t unconverged = 0;  // devices that missed their verify bound
};

std::vector<LayerSnapshot> snapshot_hardware(const HardwareSource& source,
                                             const RealWeightTensor& w_r);
nlohmann::json snapshot_to_json(const std::vector<LayerSnapshot>& layers,
                                const std::vector<std::size_t>& layer_sizes,
                                const Provenance& prov);
/// Returns the layers; weight targets and realized weight-plane values are
/// required, noise-plane values are optional.
std::vector<LayerSnapshot> snapshot_from_json(const nlohmann::json& doc);
bool is_snapshot(const nlohmann::json& doc);

nlohmann::json report_to_json(const EvalReport& report, const Provenance& prov);
std::string bins_to_csv(const EvalReport& report, const Provenance& prov);
nlohmann::json area_to_json(const AreaEstimate& estimate, const AreaModelConfig& cfg,
                            const Provenance& prov);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace pcmsim
