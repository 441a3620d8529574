#include "pcmsim/crossbar.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pcmsim/errors.hpp"

namespace pcmsim {

void AdcConfig::validate() const {
  if (bits < 1 || bits > 48) throw ArgumentError("adc: bits must be in [1, 48]");
  if (!(full_scale > 0.0)) throw ArgumentError("adc: full_scale must be > 0");
}

std::int64_t quantize(const AdcConfig& adc, double v) {
  const auto max_code = adc.max_code();
  const double scaled = v / adc.full_scale * static_cast<double>(max_code);
  const double limit = static_cast<double>(max_code);
  if (scaled >= limit) return max_code;
  if (scaled <= -limit) return -max_code;
  return static_cast<std::int64_t>(std::round(scaled));  // std::round is half-away-from-zero
}

double dequantize(const AdcConfig& adc, std::int64_t code) {
  return static_cast<double>(code) * adc.lsb();
}

CrossbarCore::CrossbarCore(std::size_t rows, std::size_t cols, const CrossbarConfig& config,
                           const NoiseModelConfig& noise, double kappa, std::uint64_t seed)
    : rows_(rows),
      cols_(cols),
      config_(config),
      noise_(noise),
      kappa_(kappa),
      weight_plane_(rows, cols),
      noise_plane_(rows, config.l_noise_cols),
      noise_targets_(rows, config.l_noise_cols),
      register_(rows, config.l_noise_cols) {
  if (rows == 0 || cols == 0) throw ArgumentError("crossbar: empty plane");
  if (config.l_noise_cols == 0) throw ArgumentError("crossbar: L must be >= 1");
  if (!(kappa >= 1.0)) throw ArgumentError("crossbar: kappa must be >= 1");
  config.adc.validate();
  noise.validate();
  reseed(seed);
}

void CrossbarCore::reseed(std::uint64_t seed) {
  program_rng_.seed(derive_seed(seed, {id(Stream::kProgram)}));
  read_rng_.seed(derive_seed(seed, {id(Stream::kRead)}));
  arbitration_rng_.seed(derive_seed(seed, {id(Stream::kArbitration)}));
}

void CrossbarCore::program_weight_plane(const Matrix<ConductancePair>& targets) {
  if (targets.rows() != rows_ || targets.cols() != cols_) {
    throw ArgumentError("program_planes: weight plane dimension mismatch");
  }
  for (std::size_t n = 0; n < rows_; ++n) {
    for (std::size_t m = 0; m < cols_; ++m) {
      auto& cell = weight_plane_(n, m);
      const auto& t = targets(n, m);
      cell.plus.program(noise_, t.plus, config_.weight_program_bound, config_.max_iters,
                        program_rng_);
      cell.minus.program(noise_, t.minus, config_.weight_program_bound, config_.max_iters,
                         program_rng_);
    }
  }
}

void CrossbarCore::restore_weight_plane(const Matrix<ConductancePair>& realized) {
  if (realized.rows() != rows_ || realized.cols() != cols_) {
    throw ArgumentError("restore_weight_plane: dimension mismatch");
  }
  for (std::size_t i = 0; i < realized.size(); ++i) {
    weight_plane_.flat()[i].plus.force(noise_, realized.flat()[i].plus);
    weight_plane_.flat()[i].minus.force(noise_, realized.flat()[i].minus);
  }
}

void CrossbarCore::program_planes(const PlaneProgram& program) {
  if (program.noise_pairs.rows() != rows_ || program.noise_pairs.cols() != config_.l_noise_cols) {
    throw ArgumentError("program_planes: noise plane dimension mismatch");
  }
  for (const auto& t : program.noise_pairs.flat()) {
    if (!noise_.in_range(t.plus) || !noise_.in_range(t.minus)) {
      throw DomainError("program_planes: noise target outside conductance range");
    }
  }
  program_weight_plane(program.weight_pairs);
  noise_targets_ = program.noise_pairs;
  for (std::size_t i = 0; i < noise_plane_.size(); ++i) {
    auto& cell = noise_plane_.flat()[i];
    const auto& t = noise_targets_.flat()[i];
    cell.plus.program(noise_, t.plus, config_.noise_program_bound, config_.max_iters,
                      program_rng_);
    cell.minus.program(noise_, t.minus, config_.noise_program_bound, config_.max_iters,
                       program_rng_);
  }
  noise_programmed_ = true;
  register_valid_ = false;
}

void CrossbarCore::refresh_noise_register(std::size_t read_index) {
  if (!noise_programmed_) throw StateError("refresh_noise_register: planes not programmed");
  const bool reprogram = config_.sample_mode == SampleMode::kReprogramPerSample;
  for (std::size_t i = 0; i < noise_plane_.size(); ++i) {
    auto& cell = noise_plane_.flat()[i];
    if (reprogram) {
      const auto& t = noise_targets_.flat()[i];
      cell.plus.program(noise_, t.plus, config_.noise_program_bound, config_.max_iters,
                        program_rng_);
      cell.minus.program(noise_, t.minus, config_.noise_program_bound, config_.max_iters,
                         program_rng_);
    }
    const double diff = cell.read_difference(noise_, read_index, read_rng_);
    register_.flat()[i] = quantize(config_.adc, kappa_ * diff);
  }
  register_valid_ = true;
}

double CrossbarCore::register_value(std::size_t n, std::size_t l) const {
  return dequantize(config_.adc, register_(n, l)) / kappa_;
}

BinaryWeightSample CrossbarCore::sample_binary_weights(std::size_t read_index,
                                                       Matrix<double>* comparison) {
  if (!register_valid_) throw StateError("sample_binary_weights: noise register is stale");
  BinaryWeightSample sample;
  sample.values = Matrix<std::int8_t>(rows_, cols_);
  sample.arbitration.resize(cols_);
  if (comparison) *comparison = Matrix<double>(rows_, cols_);

  const auto l_max = static_cast<std::uint32_t>(config_.l_noise_cols - 1);
  std::uniform_int_distribution<std::uint32_t> pick(0, l_max);
  // One read-clock cycle per weight-plane column; the arbitration draw is
  // shared by every row of that column.
  for (std::size_t m = 0; m < cols_; ++m) {
    const std::uint32_t l = l_max == 0 ? 0 : pick(arbitration_rng_);
    sample.arbitration[m] = l;
    for (std::size_t n = 0; n < rows_; ++n) {
      const double diff = weight_plane_(n, m).read_difference(noise_, read_index, read_rng_);
      const std::int64_t sum = quantize(config_.adc, diff) + register_(n, l);
      sample.values(n, m) = sum >= 0 ? std::int8_t{1} : std::int8_t{-1};
      if (comparison) {
        (*comparison)(n, m) = dequantize(config_.adc, sum) / kappa_;
      }
    }
  }
  return sample;
}

BinaryWeightSample CrossbarCore::draw_sample(std::size_t read_index) {
  refresh_noise_register(read_index);
  return sample_binary_weights(read_index);
}

Matrix<std::int8_t> CrossbarCore::sample_deterministic(std::size_t read_index) {
  Matrix<std::int8_t> out(rows_, cols_);
  for (std::size_t n = 0; n < rows_; ++n) {
    for (std::size_t m = 0; m < cols_; ++m) {
      const auto& cell = weight_plane_(n, m);
      if (!cell.plus.programmed()) throw StateError("sample_deterministic: plane not programmed");
      const double diff = cell.read_difference(noise_, read_index, read_rng_);
      out(n, m) = quantize(config_.adc, diff) >= 0 ? std::int8_t{1} : std::int8_t{-1};
    }
  }
  return out;
}

}  // namespace pcmsim
