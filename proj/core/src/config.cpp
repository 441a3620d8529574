#include "pcmsim/config.hpp"

#include <fstream>
#include <set>

#include "pcmsim/errors.hpp"

namespace pcmsim {

namespace {

using nlohmann::json;

// Reads one JSON object, recording consumed keys so unknown ones are reported.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw UsageError("config: " + where() + " must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, _] : node_.items()) {
      if (!used_.count(key)) throw UsageError("config: unknown field " + field(key));
    }
  }
  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  template <typename T>
  void get(const std::string& key, T& out) {
    used_.insert(key);
    if (!node_.contains(key)) return;
    try {
      out = node_.at(key).get<T>();
    } catch (const json::exception&) {
      throw UsageError("config: " + field(key) + " has the wrong type");
    }
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  Section child(const std::string& key) {
    used_.insert(key);
    return Section(node_.at(key), field(key));
  }

  template <typename F>
  void with(const std::string& key, F&& body) {
    used_.insert(key);
    if (!node_.contains(key)) return;
    Section s(node_.at(key), field(key));
    body(s);
  }

  template <typename E>
  void get_enum(const std::string& key, E& out,
                std::initializer_list<std::pair<const char*, E>> names) {
    used_.insert(key);
    if (!node_.contains(key)) return;
    const auto& v = node_.at(key);
    if (v.is_string()) {
      for (const auto& [name, value] : names) {
        if (v.get<std::string>() == name) {
          out = value;
          return;
        }
      }
    }
    std::string allowed;
    for (const auto& [name, _] : names) allowed += std::string(allowed.empty() ? "" : "|") + name;
    throw UsageError("config: " + field(key) + " must be one of {" + allowed + "}");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  std::string where() const { return path_.empty() ? "document" : path_; }

  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

void check(bool ok, const std::string& field, const std::string& why) {
  if (!ok) throw UsageError("config: " + field + " " + why);
}

}  // namespace

EvalMode parse_mode(const std::string& s) {
  if (s == "hardware") return EvalMode::kHardware;
  if (s == "fp32") return EvalMode::kFp32;
  if (s == "fxp8") return EvalMode::kFxp8;
  if (s == "cm") return EvalMode::kCommittee;
  throw UsageError("mode must be one of {hardware|fp32|fxp8|cm}, got '" + s + "'");
}

std::string to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::kHardware: return "hardware";
    case EvalMode::kFp32: return "fp32";
    case EvalMode::kFxp8: return "fxp8";
    case EvalMode::kCommittee: return "cm";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  auto wrap = [](const std::string& section, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      throw UsageError("config: " + section + ": " + e.what());
    }
  };
  wrap("encoder", [&] { encoder.validate(); });
  wrap("lif", [&] { lif.validate(); });
  wrap("train", [&] { train.validate(); });
  wrap("noise_model", [&] { noise.validate(); });
  wrap("mapping", [&] { mapping.validate(noise); });
  wrap("crossbar.adc", [&] { crossbar.adc.validate(); });
  wrap("sampler", [&] { sampler.validate(); });
  wrap("fxp8", [&] { fxp8.validate(); });
  wrap("area", [&] { area.validate(); });
  check(crossbar.l_noise_cols >= 1, "crossbar.l_noise_cols", "must be >= 1");
  check(fxp8.fxp8_noise != SamplerKind::kFxp8, "fxp8.noise", "must name a noise distribution");
  check(eval.k >= 1, "eval.k", "must be >= 1");
  check(eval.n_bins >= 1, "eval.n_bins", "must be >= 1");
  for (auto k : eval.ensemble_sizes) check(k >= 1, "eval.ensemble_sizes", "entries must be >= 1");
  for (auto l : eval.l_values) check(l >= 1, "eval.l_values", "entries must be >= 1");
  for (auto h : hidden) check(h >= 1, "topology.hidden", "entries must be >= 1");
  if (dataset.kind == DatasetKind::kWbcd) {
    check(!dataset.path.empty(), "dataset.path", "is required for wbcd");
    check(std::filesystem::exists(dataset.path), "dataset.path",
          "does not exist: " + dataset.path.string());
  }
  if (weights_path) {
    check(std::filesystem::exists(*weights_path), "weights", "does not exist");
  }
  if (frequentist_weights_path) {
    check(std::filesystem::exists(*frequentist_weights_path), "frequentist_weights",
          "does not exist");
  }
}

ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  cfg.source = doc;
  auto resolve = [&](const std::filesystem::path& p) {
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
  };

  {
    Section root(doc, "");
    root.get("seed", cfg.seed);
    std::string out_dir;
    root.get("output_dir", out_dir);
    if (!out_dir.empty()) cfg.output_dir = resolve(out_dir);
    if (root.has("weights")) {
      std::string w;
      root.get("weights", w);
      cfg.weights_path = resolve(w);
    } else {
      root.get("weights", cfg.weights_path);  // marks the key as known
    }
    if (root.has("frequentist_weights")) {
      std::string w;
      root.get("frequentist_weights", w);
      cfg.frequentist_weights_path = resolve(w);
    } else {
      root.get("frequentist_weights", cfg.frequentist_weights_path);
    }

    root.with("dataset", [&](Section& s) {
      s.get_enum("kind", cfg.dataset.kind,
                 {{"wbcd", DatasetKind::kWbcd}, {"two_moons", DatasetKind::kTwoMoons}});
      std::string path;
      s.get("path", path);
      if (!path.empty()) cfg.dataset.path = resolve(path);
      s.get("train_fraction", cfg.dataset.train_fraction);
      s.get("n_samples", cfg.dataset.two_moons.n_samples);
      s.get("noise_std", cfg.dataset.two_moons.noise_std);
      s.get("n_test", cfg.dataset.n_test);
      s.get("ood_margin", cfg.dataset.ood_margin);
      s.get("ood_points", cfg.dataset.ood_points);
      s.with("grid", [&](Section& g) {
        auto& grid = cfg.dataset.two_moons.grid;
        g.get("x_min", grid.x_min);
        g.get("x_max", grid.x_max);
        g.get("y_min", grid.y_min);
        g.get("y_max", grid.y_max);
        g.get("resolution", grid.resolution);
      });
    });

    root.with("encoder", [&](Section& s) {
      s.get_enum("scheme", cfg.encoder.scheme,
                 {{"rate", EncodingScheme::kRate}, {"population", EncodingScheme::kPopulation}});
      s.get("neurons_per_feature", cfg.encoder.neurons_per_feature);
      s.get("t_steps", cfg.encoder.t_steps);
      s.get("target_rate", cfg.encoder.target_rate);
      s.get("tuning_width", cfg.encoder.tuning_width);
    });

    root.with("topology", [&](Section& s) { s.get("hidden", cfg.hidden); });

    root.with("lif", [&](Section& s) {
      s.get("beta", cfg.lif.beta);
      s.get("theta", cfg.lif.theta);
      s.get_enum("reset", cfg.lif.reset,
                 {{"to-zero", ResetMode::kToZero}, {"subtract", ResetMode::kSubtract}});
      s.get("gain_scale", cfg.lif.gain_scale);
      s.get("syn_decay", cfg.lif.syn_decay);
    });

    root.with("train", [&](Section& s) {
      s.get("tau", cfg.train.tau);
      s.get("lr", cfg.train.lr);
      s.get("epochs", cfg.train.epochs);
      s.get("batch_size", cfg.train.batch_size);
      s.get("kl_weight", cfg.train.kl_weight);
      s.get("kl_warmup_epochs", cfg.train.kl_warmup_epochs);
      s.get("surrogate_slope", cfg.train.surrogate_slope);
      s.get("init_std", cfg.train.init_std);
      s.get("weight_clip", cfg.train.weight_clip);
      s.get("rate_epsilon", cfg.train.rate_epsilon);
      s.get("detach_reset", cfg.train.detach_reset);
    });

    root.with("mapping", [&](Section& s) {
      s.get("kappa", cfg.mapping.kappa);
      s.get("w_ceil", cfg.mapping.w_ceil);
      s.get("g_at_wmax", cfg.mapping.g_at_wmax);
      s.get("g_ceiled", cfg.mapping.g_ceiled);
      s.get("sigma_delta", cfg.mapping.sigma_delta);
      s.get_enum("encoding", cfg.mapping.encoding,
                 {{"one-sided", PairEncoding::kOneSided},
                  {"symmetric-split", PairEncoding::kSymmetricSplit}});
    });

    root.with("noise_model", [&](Section& s) {
      std::vector<double> coeffs;
      s.get("prog_coeffs", coeffs);
      if (!coeffs.empty()) {
        check(coeffs.size() == 3, s.field("prog_coeffs"), "must be [c2, c1, c0]");
        cfg.noise.c2 = coeffs[0];
        cfg.noise.c1 = coeffs[1];
        cfg.noise.c0 = coeffs[2];
      }
      s.get("read_rho", cfg.noise.read_rho);
      s.get("read_time_dependent", cfg.noise.read_time_dependent);
      s.get("g_min", cfg.noise.g_min);
      s.get("g_max", cfg.noise.g_max);
    });

    root.with("crossbar", [&](Section& s) {
      s.get("adc_bits", cfg.crossbar.adc.bits);
      s.get("adc_full_scale", cfg.crossbar.adc.full_scale);
      s.get("l_noise_cols", cfg.crossbar.l_noise_cols);
      s.get_enum("sample_mode", cfg.crossbar.sample_mode,
                 {{"reprogram-per-sample", SampleMode::kReprogramPerSample},
                  {"static-program", SampleMode::kStaticProgram}});
      s.get("weight_program_bound", cfg.crossbar.weight_program_bound);
      s.get("noise_program_bound", cfg.crossbar.noise_program_bound);
      s.get("max_iters", cfg.crossbar.max_iters);
    });

    auto sampler_kind = [](Section& s, const std::string& key, SamplerKind& out) {
      s.get_enum(key, out,
                 {{"logistic-exact", SamplerKind::kLogisticExact},
                  {"gaussian", SamplerKind::kGaussian},
                  {"gumbel-softmax", SamplerKind::kGumbelSoftmax},
                  {"fxp8", SamplerKind::kFxp8}});
    };
    root.with("sampler", [&](Section& s) {
      sampler_kind(s, "kind", cfg.sampler.kind);
      s.get("sigma_delta", cfg.sampler.sigma_delta);
      s.get("tau", cfg.sampler.tau);
      sampler_kind(s, "fxp8_noise", cfg.sampler.fxp8_noise);
    });
    root.with("fxp8", [&](Section& s) {
      sampler_kind(s, "noise", cfg.fxp8.fxp8_noise);
      s.get("sigma_delta", cfg.fxp8.sigma_delta);
    });

    root.with("eval", [&](Section& s) {
      std::string mode;
      s.get("mode", mode);
      if (!mode.empty()) {
        try {
          cfg.eval.mode = parse_mode(mode);
        } catch (const UsageError&) {
          throw UsageError("config: eval.mode must be one of {hardware|fp32|fxp8|cm}");
        }
      }
      s.get("k", cfg.eval.k);
      s.get("ensemble_sizes", cfg.eval.ensemble_sizes);
      s.get("l_values", cfg.eval.l_values);
      s.get("n_bins", cfg.eval.n_bins);
    });

    root.with("area", [&](Section& s) {
      auto& a = cfg.area;
      s.get("n_rows", a.n_rows);
      s.get("n_cols", a.n_cols);
      s.get("l_noise_cols", a.l_noise_cols);
      s.get("t_access", a.t_access);
      s.get("register_bits", a.register_bits);
      s.get("t_register_bit", a.t_register_bit);
      s.get("arbitration_prng_bits", a.arbitration_prng_bits);
      s.get("sram_bits_per_weight", a.sram_bits_per_weight);
      s.get("t_sram_bit", a.t_sram_bit);
      s.get_enum("prng_layout", a.prng_layout,
                 {{"shared-36bit", PrngLayout::kShared36Bit},
                  {"per-row-22bit", PrngLayout::kPerRow22Bit}});
      s.get("shared_prng_bits", a.shared_prng_bits);
      s.get("per_row_prng_bits", a.per_row_prng_bits);
      s.get("t_noise_shaper", a.t_noise_shaper);
      s.get("t_dff", a.t_dff);
      s.get("lfsr_xor_gates", a.lfsr_xor_gates);
      s.get("t_xor", a.t_xor);
      s.get("t_comparator", a.t_comparator);
      s.get("include_adc", a.include_adc);
      s.get("adc_units", a.adc_units);
      s.get("t_adc", a.t_adc);
    });
  }
  cfg.fxp8.kind = SamplerKind::kFxp8;
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config: " + path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

}  // namespace pcmsim
