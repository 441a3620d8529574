#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pcmsim/matrix.hpp"
#include "pcmsim/random.hpp"
#include "pcmsim/snn.hpp"

namespace pcmsim {

/// Feature rows with integer class labels.
struct Dataset {
  Matrix<double> features;  // samples x features
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  Dataset subset(const std::vector<std::size_t>& indices) const;
};

struct GridSpec {
  double x_min = -1.5;
  double x_max = 2.5;
  double y_min = -1.0;
  double y_max = 1.5;
  std::size_t resolution = 100;  // points per axis
};

struct TwoMoonsSpec {
  std::size_t n_samples = 400;
  double noise_std = 0.1;
  std::uint64_t seed = 0;
  GridSpec grid;
};

/// Two interleaved unit half-circles. Label 0 is the upper arc
/// (cos t, sin t); label 1 the lower arc (1 - cos t, 0.5 - sin t).
Dataset gen_two_moons(const TwoMoonsSpec& spec);

/// Row-major lattice over the grid bounds; x varies fastest.
Matrix<double> grid_points(const GridSpec& grid);

/// Distance from a point to the nearer of the two noiseless arcs.
double distance_to_moons(double x, double y);

enum class Diagnosis { kBenign = 0, kMalignant = 1 };

struct WbcdRecord {
  std::string id;
  Diagnosis label = Diagnosis::kBenign;
  std::array<double, 30> features{};
};

/// Parses the UCI WDBC layout: id, diagnosis (M/B), 30 real features.
/// Throws FormatError for an empty file or a wrong column count and
/// ParseError for unreadable fields; both carry the line number.
std::vector<WbcdRecord> load_wbcd(const std::filesystem::path& path);
Dataset to_dataset(const std::vector<WbcdRecord>& records);

/// Seeded shuffle split into disjoint train/test index sets.
struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
Split train_test_split(std::size_t n, double train_fraction, std::uint64_t seed);

/// Per-feature min-max scaling fitted on one set and applied (with clipping
/// to [0, 1]) to any other.
class MinMaxScaler {
 public:
  void fit(const Matrix<double>& features);
  /// Fits on explicit per-feature bounds.
  void fit_bounds(std::vector<double> lo, std::vector<double> hi);
  Matrix<double> transform(const Matrix<double>& features) const;

  const std::vector<double>& lo() const noexcept { return lo_; }
  const std::vector<double>& hi() const noexcept { return hi_; }

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

enum class EncodingScheme { kPopulation, kRate };

struct EncoderConfig {
  EncodingScheme scheme = EncodingScheme::kRate;
  std::size_t neurons_per_feature = 1;  // population scheme only
  std::size_t t_steps = 100;
  double target_rate = 0.04;  // spikes per neuron per timestep
  double tuning_width = 0.15;

  void validate() const;
};

/// Bernoulli spike encoder. fit() chooses one global rate scale so that the
/// average firing probability over the fitted set equals target_rate.
class SpikeEncoder {
 public:
  explicit SpikeEncoder(EncoderConfig cfg);

  const EncoderConfig& config() const noexcept { return cfg_; }
  std::size_t num_neurons(std::size_t num_features) const;
  double scale() const noexcept { return scale_; }

  void fit(const Matrix<double>& features);

  /// Per-neuron firing probability for one normalized feature row.
  std::vector<double> probabilities(std::span<const double> features) const;

  SpikeTrain encode(std::span<const double> features, Rng& rng) const;

  /// Encodes every row; row i uses the stream derived from (seed, i).
  std::vector<SpikeTrain> encode_all(const Matrix<double>& features, std::uint64_t seed) const;

 private:
  std::vector<double> raw_rates(std::span<const double> features) const;

  EncoderConfig cfg_;
  double scale_ = 1.0;
};

/// Mean spike probability (spikes / neuron / step) over a set of rasters.
double average_rate(const std::vector<SpikeTrain>& trains);

}  // namespace pcmsim
