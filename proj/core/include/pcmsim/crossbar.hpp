#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pcmsim/matrix.hpp"
#include "pcmsim/pcm_device.hpp"
#include "pcmsim/random.hpp"
#include "pcmsim/weight_mapper.hpp"

namespace pcmsim {

/// Signed, uniform, mid-tread ADC saturating at +/- full_scale.
struct AdcConfig {
  unsigned bits = 8;
  double full_scale = 25.0;  // µS

  void validate() const;
  std::int64_t max_code() const noexcept { return (std::int64_t{1} << (bits - 1)) - 1; }
  double lsb() const noexcept { return full_scale / static_cast<double>(max_code()); }
};

/// Rounds half away from zero; saturates outside +/- full_scale.
std::int64_t quantize(const AdcConfig& adc, double v);
double dequantize(const AdcConfig& adc, std::int64_t code);

enum class SampleMode {
  kReprogramPerSample,  // noise plane re-programmed before every register refresh
  kStaticProgram,       // noise plane programmed once; only read noise varies
};

struct CrossbarConfig {
  AdcConfig adc;
  std::size_t l_noise_cols = 16;
  SampleMode sample_mode = SampleMode::kReprogramPerSample;
  double weight_program_bound = 0.1;  // µS, about 1/80 of a weight unit
  double noise_program_bound = 25.0;  // µS, wide enough to keep the full noise spread
  unsigned max_iters = 1000;
};

/// One sampled binary weight matrix plus the register column chosen for each
/// weight-plane column.
struct BinaryWeightSample {
  Matrix<std::int8_t> values;              // N x M, entries in {-1, +1}
  std::vector<std::uint32_t> arbitration;  // per column, in [0, L)
};

/// Two-plane differential PCM core: an N x M weight plane holding the nominal
/// weights and an N x L noise plane whose programming noise provides the
/// sampling noise. Noise-plane reads are latched into a register of ADC codes.
///
/// Noise-plane reads use a read pulse kappa times longer than weight-plane
/// reads, so the register holds ADC(kappa * (G+ - G-)) and the binary weight is
///   w[n, m] = sign(ADC(Gw+ - Gw-) + register[n, l_m]),  sign(0) = +1,
/// which equals sign(w_r + delta) with delta the noise-plane differential.
class CrossbarCore {
 public:
  CrossbarCore(std::size_t rows, std::size_t cols, const CrossbarConfig& config,
               const NoiseModelConfig& noise, double kappa, std::uint64_t seed);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t noise_cols() const noexcept { return config_.l_noise_cols; }
  const CrossbarConfig& config() const noexcept { return config_; }
  const NoiseModelConfig& noise_model() const noexcept { return noise_; }
  double kappa() const noexcept { return kappa_; }

  /// Re-derives the programming, read and arbitration streams from `seed`.
  void reseed(std::uint64_t seed);

  /// Programs both planes. Throws ArgumentError on a dimension mismatch and
  /// DomainError for out-of-range targets.
  void program_planes(const PlaneProgram& program);
  /// Programs only the weight plane (committee-machine cores have no noise plane).
  void program_weight_plane(const Matrix<ConductancePair>& targets);
  /// Sets the weight plane to previously realized conductances (snapshot reload).
  void restore_weight_plane(const Matrix<ConductancePair>& realized);

  /// Reads every noise cell into the register. In reprogram-per-sample mode
  /// the noise devices are first re-programmed to their targets.
  void refresh_noise_register(std::size_t read_index);

  /// Samples one binary weight matrix against the current register. When
  /// `comparison` is non-null it receives, per synapse, the compared value
  /// in nominal-weight units: kappa^-1 * weight read + register value.
  BinaryWeightSample sample_binary_weights(std::size_t read_index,
                                           Matrix<double>* comparison = nullptr);

  /// Refresh followed by sample.
  BinaryWeightSample draw_sample(std::size_t read_index);

  /// sign(ADC(weight read)) with no noise plane involved.
  Matrix<std::int8_t> sample_deterministic(std::size_t read_index);

  const DpcmCell& weight_cell(std::size_t n, std::size_t m) const { return weight_plane_(n, m); }
  const DpcmCell& noise_cell(std::size_t n, std::size_t l) const { return noise_plane_(n, l); }
  const Matrix<std::int64_t>& noise_register() const noexcept { return register_; }
  bool register_valid() const noexcept { return register_valid_; }
  /// Register entry converted back to nominal-weight units.
  double register_value(std::size_t n, std::size_t l) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  CrossbarConfig config_;
  NoiseModelConfig noise_;
  double kappa_;
  Matrix<DpcmCell> weight_plane_;
  Matrix<DpcmCell> noise_plane_;
  Matrix<ConductancePair> noise_targets_;
  Matrix<std::int64_t> register_;
  bool noise_programmed_ = false;
  bool register_valid_ = false;
  Rng program_rng_;
  Rng read_rng_;
  Rng arbitration_rng_;
};

}  // namespace pcmsim
