#include "pcmsim/area.hpp"

#include "pcmsim/errors.hpp"

namespace pcmsim {

void AreaModelConfig::validate() const {
  const std::uint64_t counts[] = {n_rows,         n_cols,          l_noise_cols,
                                  t_access,       register_bits,   t_register_bit,
                                  arbitration_prng_bits,           sram_bits_per_weight,
                                  t_sram_bit,     shared_prng_bits, per_row_prng_bits,
                                  t_noise_shaper, t_dff,           lfsr_xor_gates,
                                  t_xor,          t_comparator,    adc_units,
                                  t_adc};
  for (auto c : counts) {
    if (c == 0) throw ArgumentError("area: all counts must be positive integers");
  }
}

AreaEstimate estimate_area(const AreaModelConfig& cfg) {
  cfg.validate();
  AreaEstimate est;
  auto add = [&](const char* core, std::string name, std::uint64_t count, std::string formula) {
    est.breakdown.push_back({core, std::move(name), count, std::move(formula)});
    (std::string(core) == "pcm" ? est.pcm_count : est.cmos_count) += count;
  };
  const std::uint64_t lfsr_feedback = cfg.lfsr_xor_gates * cfg.t_xor;

  add("pcm", "weight plane access", 2 * cfg.n_rows * cfg.n_cols * cfg.t_access,
      "2 * rows * cols * t_access");
  add("pcm", "noise plane access", 2 * cfg.n_rows * cfg.l_noise_cols * cfg.t_access,
      "2 * rows * L * t_access");
  add("pcm", "noise register",
      cfg.n_rows * cfg.l_noise_cols * cfg.register_bits * cfg.t_register_bit,
      "rows * L * register_bits * t_register_bit");
  add("pcm", "arbitration prng", cfg.arbitration_prng_bits * cfg.t_dff + lfsr_feedback,
      "arbitration_prng_bits * t_dff + xor feedback");
  add("pcm", "comparators", cfg.n_rows * cfg.t_comparator, "rows * t_comparator");
  if (cfg.include_adc) add("pcm", "adc", cfg.adc_units * cfg.t_adc, "adc_units * t_adc");

  add("cmos", "sram weights",
      cfg.n_rows * cfg.n_cols * cfg.sram_bits_per_weight * cfg.t_sram_bit,
      "rows * cols * sram_bits * t_sram_bit");
  if (cfg.prng_layout == PrngLayout::kShared36Bit) {
    add("cmos", "prng (shared)",
        cfg.shared_prng_bits * cfg.t_dff + lfsr_feedback + cfg.t_noise_shaper,
        "shared_prng_bits * t_dff + xor feedback + t_noise_shaper");
  } else {
    add("cmos", "prng (per row)",
        cfg.n_rows * (cfg.per_row_prng_bits * cfg.t_dff + lfsr_feedback + cfg.t_noise_shaper),
        "rows * (per_row_prng_bits * t_dff + xor feedback + t_noise_shaper)");
  }
  add("cmos", "comparators", cfg.n_rows * cfg.t_comparator, "rows * t_comparator");

  est.ratio = static_cast<double>(est.cmos_count) / static_cast<double>(est.pcm_count);
  est.assumptions = {
      "per-component transistor counts are modelling assumptions, not measured values",
      "D flip-flop: " + std::to_string(cfg.t_dff) + " transistors (master-slave static)",
      "SRAM bit: " + std::to_string(cfg.t_sram_bit) + " transistors",
      "noise register bit: " + std::to_string(cfg.t_register_bit) + " transistors",
      "noise shaper per PRNG: " + std::to_string(cfg.t_noise_shaper) + " transistors",
      std::string("ADC ") + (cfg.include_adc ? "included on the PCM core" : "excluded from both cores"),
  };
  return est;
}

}  // namespace pcmsim
