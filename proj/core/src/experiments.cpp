#include "pcmsim/experiments.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "pcmsim/area.hpp"
#include "pcmsim/errors.hpp"
#include "pcmsim/io.hpp"

namespace pcmsim {

namespace {

constexpr std::size_t kNumClasses = 2;

std::uint64_t sid(Stream s) { return id(s); }

std::vector<SpikeTrain> encode_rows(const SpikeEncoder& enc, const Matrix<double>& x,
                                    std::uint64_t seed) {
  return enc.encode_all(x, seed);
}

std::vector<std::size_t> topology(std::size_t n_in, const std::vector<std::size_t>& hidden) {
  std::vector<std::size_t> sizes{n_in};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(kNumClasses);
  return sizes;
}

Provenance provenance(const ExperimentConfig& cfg) { return make_provenance(cfg.source, cfg.seed); }

EvalReport report_for(std::string mode, std::size_t k, std::vector<std::vector<double>> conf,
                      std::span<const int> labels, std::size_t n_bins) {
  return make_report(std::move(mode), k, std::move(conf), labels, n_bins);
}

}  // namespace

Dataset two_moons_heldout(const DatasetConfig& cfg, std::uint64_t seed) {
  TwoMoonsSpec spec = cfg.two_moons;
  spec.n_samples = cfg.n_test;
  spec.seed = derive_seed(seed, {sid(Stream::kData), 1});
  Dataset moons = gen_two_moons(spec);

  const auto& g = cfg.two_moons.grid;
  Rng rng = make_rng(seed, {sid(Stream::kData), 2});
  Rng label_rng = make_rng(seed, {sid(Stream::kLabels)});
  std::uniform_real_distribution<double> ux(g.x_min, g.x_max);
  std::uniform_real_distribution<double> uy(g.y_min, g.y_max);
  std::bernoulli_distribution coin(0.5);

  const std::size_t n = moons.size() + cfg.ood_points;
  Dataset out{Matrix<double>(n, 2), std::vector<int>(n, 0)};
  for (std::size_t i = 0; i < moons.size(); ++i) {
    out.features(i, 0) = moons.features(i, 0);
    out.features(i, 1) = moons.features(i, 1);
    out.labels[i] = moons.labels[i];
  }
  std::size_t attempts = 0;
  for (std::size_t i = moons.size(); i < n;) {
    if (++attempts > 1000 * (cfg.ood_points + 1)) {
      throw UsageError("config: dataset.ood_margin leaves no room for off-manifold points");
    }
    const double x = ux(rng);
    const double y = uy(rng);
    if (distance_to_moons(x, y) <= cfg.ood_margin) continue;
    out.features(i, 0) = x;
    out.features(i, 1) = y;
    out.labels[i] = coin(label_rng) ? 1 : 0;
    ++i;
  }
  return out;
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  Dataset train_set, test_set;
  MinMaxScaler scaler;
  std::size_t n_off = 0;
  if (cfg.dataset.kind == DatasetKind::kWbcd) {
    const Dataset all = to_dataset(load_wbcd(cfg.dataset.path));
    const Split split = train_test_split(all.size(), cfg.dataset.train_fraction,
                                         derive_seed(cfg.seed, {sid(Stream::kSplit)}));
    train_set = all.subset(split.train);
    test_set = all.subset(split.test);
    scaler.fit(train_set.features);
  } else {
    TwoMoonsSpec spec = cfg.dataset.two_moons;
    spec.seed = derive_seed(cfg.seed, {sid(Stream::kData), 0});
    train_set = gen_two_moons(spec);
    test_set = two_moons_heldout(cfg.dataset, cfg.seed);
    n_off = cfg.dataset.ood_points;
    const auto& g = spec.grid;
    scaler.fit_bounds({g.x_min, g.y_min}, {g.x_max, g.y_max});
  }
  const auto train_scaled = scaler.transform(train_set.features);
  const auto test_scaled = scaler.transform(test_set.features);

  SpikeEncoder encoder(cfg.encoder);
  encoder.fit(train_scaled);

  LifConfig lif = cfg.lif;
  lif.t_steps = cfg.encoder.t_steps;
  SpikingNetwork net(topology(encoder.num_neurons(train_scaled.cols()), cfg.hidden), lif);

  PreparedData data{std::move(net), encoder, scaler, {}, {}, {}, {}, n_off};
  data.train_x = encode_rows(encoder, train_scaled, derive_seed(cfg.seed, {sid(Stream::kEncoder), 0}));
  data.train_y = train_set.labels;
  data.test_x = encode_rows(encoder, test_scaled, derive_seed(cfg.seed, {sid(Stream::kEncoder), 1}));
  data.test_y = test_set.labels;
  return data;
}

HardwareConfig hardware_config(const ExperimentConfig& cfg, std::size_t l_noise_cols) {
  HardwareConfig hw{cfg.crossbar, cfg.noise, cfg.mapping, 0};
  hw.crossbar.l_noise_cols = l_noise_cols;
  return hw;
}

TrainResult train_weights(const ExperimentConfig& cfg, const PreparedData& data,
                          bool frequentist) {
  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, {sid(Stream::kTrain), frequentist ? 1u : 0u});
  return frequentist ? train_frequentist(data.train_x, data.train_y, data.net, tc)
                     : train(data.train_x, data.train_y, data.net, tc);
}

RealWeightTensor obtain_weights(const ExperimentConfig& cfg, const PreparedData& data,
                                bool frequentist) {
  const auto& path = frequentist ? cfg.frequentist_weights_path : cfg.weights_path;
  if (!path) return train_weights(cfg, data, frequentist).w_r;
  WeightFile f = load_weights(*path);
  if (f.layer_sizes != data.net.layer_sizes()) {
    throw UsageError("weights file " + path->string() + " does not match the configured topology");
  }
  return std::move(f.w_r);
}

std::uint64_t hardware_seed(const ExperimentConfig& cfg, std::size_t l_noise_cols) {
  return derive_seed(cfg.seed, {sid(Stream::kProgram), l_noise_cols});
}

std::vector<EvalReport> evaluate_mode(const ExperimentConfig& cfg, const SpikingNetwork& net,
                                      const RealWeightTensor& w, EvalMode mode,
                                      std::span<const std::size_t> ks, std::size_t l_noise_cols,
                                      std::span<const SpikeTrain> inputs,
                                      std::span<const int> labels) {
  std::unique_ptr<WeightSource> source;
  std::string tag;
  switch (mode) {
    case EvalMode::kHardware:
      source = std::make_unique<HardwareSource>(w, hardware_config(cfg, l_noise_cols),
                                                hardware_seed(cfg, l_noise_cols));
      tag = "hardware-L" + std::to_string(l_noise_cols);
      break;
    case EvalMode::kFp32:
      source = std::make_unique<SamplerSource>(cfg.sampler, w,
                                               derive_seed(cfg.seed, {sid(Stream::kSampler), 0}));
      tag = "fp32";
      break;
    case EvalMode::kFxp8:
      source = std::make_unique<SamplerSource>(cfg.fxp8, w,
                                               derive_seed(cfg.seed, {sid(Stream::kSampler), 1}));
      tag = "fxp8";
      break;
    case EvalMode::kCommittee:
      source = std::make_unique<CommitteeSource>(w, hardware_config(cfg, 1),
                                                 derive_seed(cfg.seed, {sid(Stream::kProgram), 0}));
      tag = "cm";
      break;
  }
  auto confs = ensemble_predict_sizes(*source, net, inputs, ks);
  std::vector<EvalReport> out;
  for (std::size_t j = 0; j < ks.size(); ++j) {
    std::string name = mode == EvalMode::kCommittee ? "cm-K" + std::to_string(ks[j]) : tag;
    out.push_back(report_for(std::move(name), ks[j], std::move(confs[j]), labels, cfg.eval.n_bins));
  }
  return out;
}

EvalReport evaluate_frequentist(const ExperimentConfig& cfg, const SpikingNetwork& net,
                                const RealWeightTensor& w_freq,
                                std::span<const SpikeTrain> inputs, std::span<const int> labels) {
  FixedSource source(binarize(w_freq));
  return report_for("frequentist", 1, ensemble_predict(source, net, inputs, 1), labels,
                    cfg.eval.n_bins);
}

SweepTable run_sweep(const ExperimentConfig& cfg, const PreparedData& data,
                     const RealWeightTensor& w_r, const RealWeightTensor& w_freq) {
  SweepTable table;
  const auto& ks = cfg.eval.ensemble_sizes;
  for (auto l : cfg.eval.l_values) {
    const auto reports =
        evaluate_mode(cfg, data.net, w_r, EvalMode::kHardware, ks, l, data.test_x, data.test_y);
    for (std::size_t j = 0; j < ks.size(); ++j) {
      table.hardware.push_back({"hardware", l, ks[j], reports[j].accuracy, reports[j].ece});
    }
  }
  const std::pair<EvalMode, const RealWeightTensor*> baselines[] = {
      {EvalMode::kFp32, &w_r}, {EvalMode::kFxp8, &w_r}, {EvalMode::kCommittee, &w_freq}};
  for (const auto& [mode, w] : baselines) {
    const auto reports = evaluate_mode(cfg, data.net, *w, mode, ks, 0, data.test_x, data.test_y);
    for (std::size_t j = 0; j < ks.size(); ++j) {
      table.baselines.push_back({to_string(mode), 0, ks[j], reports[j].accuracy, reports[j].ece});
    }
  }
  const auto single = evaluate_frequentist(cfg, data.net, w_freq, data.test_x, data.test_y);
  table.baselines.push_back({"frequentist", 0, 1, single.accuracy, single.ece});
  return table;
}

ConfidenceMap two_moons_confidence_map(const ExperimentConfig& cfg, const PreparedData& data,
                                       const RealWeightTensor& w_r,
                                       const RealWeightTensor& w_freq) {
  ConfidenceMap map;
  map.points = grid_points(cfg.dataset.two_moons.grid);
  map.ks = cfg.eval.ensemble_sizes;
  const auto inputs = data.encoder.encode_all(data.scaler.transform(map.points),
                                              derive_seed(cfg.seed, {sid(Stream::kEncoder), 2}));
  const std::vector<int> dummy(inputs.size(), 0);
  const EvalMode mode = cfg.eval.mode;
  const auto& w = mode == EvalMode::kCommittee ? w_freq : w_r;
  const auto reports = evaluate_mode(cfg, data.net, w, mode, map.ks,
                                     cfg.crossbar.l_noise_cols, inputs, dummy);
  for (const auto& r : reports) {
    std::vector<double> p1;
    p1.reserve(r.confidences.size());
    for (const auto& c : r.confidences) p1.push_back(c[1]);
    map.p1.push_back(std::move(p1));
  }
  const auto single = evaluate_frequentist(cfg, data.net, w_freq, inputs, dummy);
  for (const auto& c : single.confidences) map.frequentist_p1.push_back(c[1]);
  return map;
}

double fraction_in_band(std::span<const double> values, double lo, double hi) {
  if (values.empty()) return 0.0;
  const auto n = std::count_if(values.begin(), values.end(),
                               [&](double v) { return v >= lo && v <= hi; });
  return static_cast<double>(n) / static_cast<double>(values.size());
}

// ---------------------------------------------------------------------------
// Commands

std::vector<std::filesystem::path> cmd_train(const ExperimentConfig& cfg, EvalMode mode) {
  const bool frequentist = mode == EvalMode::kCommittee;
  const auto data = prepare_data(cfg);
  auto result = train_weights(cfg, data, frequentist);
  WeightFile f{frequentist ? "frequentist" : "bayesian", data.net.layer_sizes(),
               std::move(result.w_r), std::move(result.log)};
  const auto path = cfg.output_dir / (frequentist ? "weights_frequentist.json" : "weights.json");
  write_json_atomic(path, weights_to_json(f, provenance(cfg)));
  return {path};
}

std::vector<std::filesystem::path> cmd_map(const ExperimentConfig& cfg) {
  const auto data = prepare_data(cfg);
  const auto w_r = obtain_weights(cfg, data, false);
  const auto l = cfg.crossbar.l_noise_cols;
  HardwareSource source(w_r, hardware_config(cfg, l), hardware_seed(cfg, l));
  const auto path = cfg.output_dir / "plane_snapshot.json";
  write_json_atomic(path, snapshot_to_json(snapshot_hardware(source, w_r),
                                           data.net.layer_sizes(), provenance(cfg)));
  return {path};
}

std::vector<std::filesystem::path> cmd_infer(const ExperimentConfig& cfg, EvalMode mode,
                                             const std::optional<std::filesystem::path>& input) {
  const auto data = prepare_data(cfg);
  const std::size_t ks[] = {cfg.eval.k};
  EvalReport report;

  std::optional<nlohmann::json> doc;
  if (input) doc = read_json_file(*input);

  if (doc && is_snapshot(*doc)) {
    if (mode != EvalMode::kHardware) throw UsageError("a plane snapshot can only be inferred in hardware mode");
    const auto layers = snapshot_from_json(*doc);
    RealWeightTensor w_r;
    std::vector<Matrix<ConductancePair>> realized;
    for (const auto& s : layers) {
      w_r.push_back(s.w_r);
      realized.push_back(s.weight_realized);
    }
    data.net.check_weights(w_r);
    const std::size_t l = layers.empty() ? cfg.crossbar.l_noise_cols : layers.front().l_noise_cols;
    HardwareSource source(w_r, hardware_config(cfg, l), hardware_seed(cfg, l));
    source.restore_weight_planes(realized);
    report = report_for("hardware-L" + std::to_string(l), cfg.eval.k,
                        ensemble_predict(source, data.net, data.test_x, cfg.eval.k), data.test_y,
                        cfg.eval.n_bins);
  } else {
    const bool frequentist = mode == EvalMode::kCommittee;
    RealWeightTensor w;
    if (doc) {
      WeightFile f = weights_from_json(*doc);
      if (f.layer_sizes != data.net.layer_sizes()) {
        throw UsageError("weights file does not match the configured topology");
      }
      w = std::move(f.w_r);
    } else {
      w = obtain_weights(cfg, data, frequentist);
    }
    report = std::move(evaluate_mode(cfg, data.net, w, mode, ks, cfg.crossbar.l_noise_cols,
                                     data.test_x, data.test_y)
                           .front());
  }

  const auto prov = provenance(cfg);
  const auto json_path = cfg.output_dir / ("report_" + to_string(mode) + ".json");
  const auto csv_path = cfg.output_dir / ("reliability_" + to_string(mode) + ".csv");
  write_json_atomic(json_path, report_to_json(report, prov));
  write_file_atomic(csv_path, bins_to_csv(report, prov));
  return {json_path, csv_path};
}

std::vector<std::filesystem::path> cmd_sweep_l(const ExperimentConfig& cfg) {
  const auto data = prepare_data(cfg);
  const auto w_r = obtain_weights(cfg, data, false);
  const auto w_freq = obtain_weights(cfg, data, true);
  const auto table = run_sweep(cfg, data, w_r, w_freq);
  const auto prov = provenance(cfg);

  std::ostringstream hw;
  hw << prov.csv_header() << "L,K,accuracy,ece\n";
  for (const auto& r : table.hardware) {
    hw << r.l_noise_cols << ',' << r.k << ',' << format_double(r.accuracy) << ','
       << format_double(r.ece) << '\n';
  }
  std::ostringstream base;
  base << prov.csv_header() << "mode,K,accuracy,ece\n";
  for (const auto& r : table.baselines) {
    base << r.mode << ',' << r.k << ',' << format_double(r.accuracy) << ','
         << format_double(r.ece) << '\n';
  }
  const auto hw_path = cfg.output_dir / "sweep_l.csv";
  const auto base_path = cfg.output_dir / "sweep_baselines.csv";
  write_file_atomic(hw_path, hw.str());
  write_file_atomic(base_path, base.str());
  return {hw_path, base_path};
}

std::vector<std::filesystem::path> cmd_two_moons_map(const ExperimentConfig& cfg) {
  if (cfg.dataset.kind != DatasetKind::kTwoMoons) {
    throw UsageError("config: dataset.kind must be two_moons for two-moons-map");
  }
  const auto data = prepare_data(cfg);
  const auto w_r = obtain_weights(cfg, data, false);
  const auto w_freq = obtain_weights(cfg, data, true);
  const auto map = two_moons_confidence_map(cfg, data, w_r, w_freq);
  const auto prov = provenance(cfg);

  auto write_map = [&](const std::filesystem::path& path, const std::string& label,
                       const std::vector<double>& p1) {
    std::ostringstream out;
    out << prov.csv_header() << "# model: " << label << "\n";
    out << "x,y,confidence\n";
    for (std::size_t i = 0; i < p1.size(); ++i) {
      out << format_double(map.points(i, 0)) << ',' << format_double(map.points(i, 1)) << ','
          << format_double(p1[i]) << '\n';
    }
    write_file_atomic(path, out.str());
  };

  std::vector<std::filesystem::path> paths;
  for (std::size_t j = 0; j < map.ks.size(); ++j) {
    const auto k = std::to_string(map.ks[j]);
    paths.push_back(cfg.output_dir / ("two_moons_map_K" + k + ".csv"));
    write_map(paths.back(), to_string(cfg.eval.mode) + " K=" + k, map.p1[j]);
  }
  paths.push_back(cfg.output_dir / "two_moons_map_frequentist.csv");
  write_map(paths.back(), "frequentist K=1", map.frequentist_p1);
  return paths;
}

std::vector<std::filesystem::path> cmd_area(const ExperimentConfig& cfg) {
  const auto prov = provenance(cfg);
  std::vector<std::filesystem::path> paths;
  for (auto layout : {PrngLayout::kShared36Bit, PrngLayout::kPerRow22Bit}) {
    AreaModelConfig a = cfg.area;
    a.prng_layout = layout;
    const auto path = cfg.output_dir / (layout == PrngLayout::kShared36Bit
                                            ? "area_shared_36bit.json"
                                            : "area_per_row_22bit.json");
    write_json_atomic(path, area_to_json(estimate_area(a), a, prov));
    paths.push_back(path);
  }
  return paths;
}

}  // namespace pcmsim
