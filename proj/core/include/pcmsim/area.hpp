#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pcmsim {

enum class PrngLayout { kShared36Bit, kPerRow22Bit };

/// Transistor-count assumptions for the synaptic-core comparison. Every
/// per-component count is a declared assumption; the comparison reports the
/// itemized inventory alongside the totals.
struct AreaModelConfig {
  std::uint64_t n_rows = 256;
  std::uint64_t n_cols = 256;
  std::uint64_t l_noise_cols = 16;

  // PCM core
  std::uint64_t t_access = 1;        // 1T1R access transistor per device
  std::uint64_t register_bits = 8;   // ADC code width held per noise value
  std::uint64_t t_register_bit = 6;  // static latch per register bit
  std::uint64_t arbitration_prng_bits = 16;

  // FxP8 CMOS core
  std::uint64_t sram_bits_per_weight = 8;
  std::uint64_t t_sram_bit = 6;
  PrngLayout prng_layout = PrngLayout::kShared36Bit;
  std::uint64_t shared_prng_bits = 36;
  std::uint64_t per_row_prng_bits = 22;
  std::uint64_t t_noise_shaper = 2000;  // uniform bits -> 8-bit noise sample, per PRNG

  // Shared building blocks
  std::uint64_t t_dff = 24;            // master-slave static D flip-flop
  std::uint64_t lfsr_xor_gates = 3;    // feedback XORs per LFSR
  std::uint64_t t_xor = 12;
  std::uint64_t t_comparator = 48;     // per-row sign comparator, both cores

  bool include_adc = false;
  std::uint64_t adc_units = 256;
  std::uint64_t t_adc = 1500;

  void validate() const;
};

struct AreaItem {
  std::string core;  // "pcm" or "cmos"
  std::string name;
  std::uint64_t count = 0;
  std::string formula;
};

struct AreaEstimate {
  std::uint64_t pcm_count = 0;
  std::uint64_t cmos_count = 0;
  double ratio = 0.0;  // cmos_count / pcm_count
  std::vector<AreaItem> breakdown;
  std::vector<std::string> assumptions;
};

AreaEstimate estimate_area(const AreaModelConfig& cfg);

}  // namespace pcmsim
