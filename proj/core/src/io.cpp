#include "pcmsim/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "pcmsim/errors.hpp"

#ifndef PCMSIM_VERSION
#define PCMSIM_VERSION "v0.1.0"
#endif

namespace pcmsim {

using nlohmann::json;

const char* version_string() noexcept { return PCMSIM_VERSION; }

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json Provenance::to_json() const {
  return json{{"config_hash", config_hash}, {"seed", seed}, {"version", version}};
}

std::string Provenance::csv_header() const {
  return "# config_hash: " + config_hash + "\n# seed: " + std::to_string(seed) +
         "\n# version: " + version + "\n";
}

Provenance make_provenance(const json& config_doc, std::uint64_t seed) {
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_doc.dump())));
  return Provenance{hex, seed, version_string()};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw UsageError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw UsageError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_json_atomic(const std::filesystem::path& path, const json& doc) {
  write_file_atomic(path, doc.dump(2) + "\n");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

namespace {

json matrix_to_json(const Matrix<double>& m) {
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"values", m.values()}};
}

Matrix<double> matrix_from_json(const json& j, const std::string& what) {
  try {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    auto values = j.at("values").get<std::vector<double>>();
    if (values.size() != rows * cols) throw FormatError(what + ": value count mismatch");
    Matrix<double> m(rows, cols);
    std::copy(values.begin(), values.end(), m.flat().begin());
    return m;
  } catch (const json::exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

json pairs_to_json(const Matrix<ConductancePair>& m) {
  std::vector<double> plus, minus;
  plus.reserve(m.size());
  minus.reserve(m.size());
  for (const auto& p : m.flat()) {
    plus.push_back(p.plus);
    minus.push_back(p.minus);
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"g_plus", plus}, {"g_minus", minus}};
}

Matrix<ConductancePair> pairs_from_json(const json& j, const std::string& what) {
  try {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    const auto plus = j.at("g_plus").get<std::vector<double>>();
    const auto minus = j.at("g_minus").get<std::vector<double>>();
    if (plus.size() != rows * cols || minus.size() != rows * cols) {
      throw FormatError(what + ": value count mismatch");
    }
    Matrix<ConductancePair> m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.flat()[i] = ConductancePair{plus[i], minus[i]};
    return m;
  } catch (const json::exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

}  // namespace

json weights_to_json(const WeightFile& file, const Provenance& prov) {
  json layers = json::array();
  for (const auto& w : file.w_r) layers.push_back(matrix_to_json(w));
  json log = json::array();
  for (const auto& e : file.log) {
    log.push_back({{"loss", e.loss}, {"accuracy", e.accuracy}, {"weight_norm", e.weight_norm}});
  }
  return json{{"provenance", prov.to_json()},
              {"format", "pcmsim-weights"},
              {"kind", file.kind},
              {"layer_sizes", file.layer_sizes},
              {"layers", layers},
              {"training_log", log}};
}

WeightFile weights_from_json(const json& doc) {
  if (!doc.is_object() || doc.value("format", "") != "pcmsim-weights") {
    throw FormatError("not a weight file");
  }
  WeightFile f;
  try {
    f.kind = doc.at("kind").get<std::string>();
    f.layer_sizes = doc.at("layer_sizes").get<std::vector<std::size_t>>();
    for (const auto& l : doc.at("layers")) f.w_r.push_back(matrix_from_json(l, "weights"));
    for (const auto& e : doc.value("training_log", json::array())) {
      f.log.push_back({e.at("loss").get<double>(), e.at("accuracy").get<double>(),
                       e.at("weight_norm").get<double>()});
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("weights: ") + e.what());
  }
  if (f.layer_sizes.size() != f.w_r.size() + 1) throw FormatError("weights: layer count mismatch");
  for (std::size_t l = 0; l < f.w_r.size(); ++l) {
    if (f.w_r[l].rows() != f.layer_sizes[l] || f.w_r[l].cols() != f.layer_sizes[l + 1]) {
      throw FormatError("weights: layer " + std::to_string(l) + " shape mismatch");
    }
  }
  return f;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

WeightFile load_weights(const std::filesystem::path& path) {
  return weights_from_json(read_json_file(path));
}

std::vector<LayerSnapshot> snapshot_hardware(const HardwareSource& source,
                                             const RealWeightTensor& w_r) {
  std::vector<LayerSnapshot> out;
  for (std::size_t l = 0; l < source.cores().size(); ++l) {
    const auto& core = source.cores()[l];
    const auto& prog = source.programs()[l];
    LayerSnapshot s;
    s.w_r = w_r.at(l);
    s.l_noise_cols = core.noise_cols();
    s.noise_target = prog.noise_target;
    s.weight_targets = prog.weight_pairs;
    s.weight_realized = Matrix<ConductancePair>(core.rows(), core.cols());
    s.noise_realized = Matrix<ConductancePair>(core.rows(), core.noise_cols());
    for (std::size_t n = 0; n < core.rows(); ++n) {
      for (std::size_t m = 0; m < core.cols(); ++m) {
        const auto& c = core.weight_cell(n, m);
        s.weight_realized(n, m) = {c.plus.programmed_g(), c.minus.programmed_g()};
        s.unconverged += !c.plus.converged() + !c.minus.converged();
      }
      for (std::size_t j = 0; j < core.noise_cols(); ++j) {
        const auto& c = core.noise_cell(n, j);
        s.noise_realized(n, j) = {c.plus.programmed_g(), c.minus.programmed_g()};
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

json snapshot_to_json(const std::vector<LayerSnapshot>& layers,
                      const std::vector<std::size_t>& layer_sizes, const Provenance& prov) {
  json arr = json::array();
  for (const auto& s : layers) {
    arr.push_back({{"w_r", matrix_to_json(s.w_r)},
                   {"l_noise_cols", s.l_noise_cols},
                   {"noise_target", s.noise_target},
                   {"weight_targets", pairs_to_json(s.weight_targets)},
                   {"weight_realized", pairs_to_json(s.weight_realized)},
                   {"noise_realized", pairs_to_json(s.noise_realized)},
                   {"unconverged_weight_devices", s.unconverged}});
  }
  return json{{"provenance", prov.to_json()},
              {"format", "pcmsim-plane-snapshot"},
              {"layer_sizes", layer_sizes},
              {"layers", arr}};
}

bool is_snapshot(const json& doc) {
  return doc.is_object() && doc.value("format", "") == "pcmsim-plane-snapshot";
}

std::vector<LayerSnapshot> snapshot_from_json(const json& doc) {
  if (!is_snapshot(doc)) throw FormatError("not a plane snapshot");
  std::vector<LayerSnapshot> out;
  try {
    for (const auto& l : doc.at("layers")) {
      LayerSnapshot s;
      s.w_r = matrix_from_json(l.at("w_r"), "snapshot");
      s.l_noise_cols = l.at("l_noise_cols").get<std::size_t>();
      s.noise_target = l.at("noise_target").get<double>();
      s.weight_targets = pairs_from_json(l.at("weight_targets"), "snapshot");
      s.weight_realized = pairs_from_json(l.at("weight_realized"), "snapshot");
      if (l.contains("noise_realized")) {
        s.noise_realized = pairs_from_json(l.at("noise_realized"), "snapshot");
      }
      s.unconverged = l.value("unconverged_weight_devices", std::size_t{0});
      if (s.weight_realized.rows() != s.w_r.rows() || s.weight_realized.cols() != s.w_r.cols()) {
        throw FormatError("snapshot: weight plane shape mismatch");
      }
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("snapshot: ") + e.what());
  }
  return out;
}

json report_to_json(const EvalReport& report, const Provenance& prov) {
  json bins = json::array();
  for (const auto& b : report.bins) {
    bins.push_back({{"lo", b.lo},
                    {"hi", b.hi},
                    {"mean_confidence", b.mean_confidence},
                    {"accuracy", b.accuracy},
                    {"count", b.count}});
  }
  return json{{"provenance", prov.to_json()},
              {"mode", report.mode},
              {"n_ensemble", report.n_ensemble},
              {"accuracy", report.accuracy},
              {"ece", report.ece},
              {"n_samples", report.confidences.size()},
              {"bins", bins}};
}

std::string bins_to_csv(const EvalReport& report, const Provenance& prov) {
  std::ostringstream out;
  out << prov.csv_header() << "# mode: " << report.mode << "\n";
  out << "bin,lo,hi,mean_confidence,accuracy,count\n";
  for (std::size_t i = 0; i < report.bins.size(); ++i) {
    const auto& b = report.bins[i];
    out << i << ',' << format_double(b.lo) << ',' << format_double(b.hi) << ','
        << format_double(b.mean_confidence) << ',' << format_double(b.accuracy) << ','
        << b.count << '\n';
  }
  return out.str();
}

json area_to_json(const AreaEstimate& estimate, const AreaModelConfig& cfg,
                  const Provenance& prov) {
  json items = json::array();
  for (const auto& it : estimate.breakdown) {
    items.push_back(
        {{"core", it.core}, {"name", it.name}, {"count", it.count}, {"formula", it.formula}});
  }
  return json{{"provenance", prov.to_json()},
              {"prng_layout", cfg.prng_layout == PrngLayout::kShared36Bit ? "shared-36bit"
                                                                          : "per-row-22bit"},
              {"geometry", {{"n_rows", cfg.n_rows}, {"n_cols", cfg.n_cols},
                            {"l_noise_cols", cfg.l_noise_cols}}},
              {"include_adc", cfg.include_adc},
              {"pcm_count", estimate.pcm_count},
              {"cmos_count", estimate.cmos_count},
              {"ratio", estimate.ratio},
              {"breakdown", items},
              {"assumptions", estimate.assumptions}};
}

}  // namespace pcmsim
