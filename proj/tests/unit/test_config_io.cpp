#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "pcmsim/config.hpp"
#include "pcmsim/errors.hpp"
#include "pcmsim/experiments.hpp"
#include "pcmsim/io.hpp"

using namespace pcmsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("pcmsim_cfg_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t n = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    ++n;
  }
  return n;
}

// A two-moons experiment small enough for unit tests.
json small_moons(const fs::path& out) {
  return json{
      {"seed", 4},
      {"output_dir", out.string()},
      {"dataset",
       {{"kind", "two_moons"},
        {"n_samples", 40},
        {"n_test", 20},
        {"ood_points", 10},
        {"grid", {{"resolution", 100}}}}},
      {"encoder",
       {{"scheme", "population"}, {"neurons_per_feature", 4}, {"t_steps", 20},
        {"target_rate", 0.1}}},
      {"topology", {{"hidden", {8}}}},
      {"lif", {{"gain_scale", 3.0}}},
      {"train", {{"epochs", 2}, {"batch_size", 8}}},
      {"crossbar", {{"l_noise_cols", 2}}},
      {"eval", {{"k", 2}, {"ensemble_sizes", {1, 2}}, {"l_values", {1, 2}}}},
  };
}

}  // namespace

TEST_SUITE("config_io") {
  TEST_CASE("defaults and overrides") {
    const auto cfg = parse_config(json{{"dataset", {{"kind", "two_moons"}}}, {"seed", 9}});
    CHECK(cfg.seed == 9);
    CHECK(cfg.dataset.kind == DatasetKind::kTwoMoons);
    CHECK(cfg.mapping.kappa == 8.0);
    CHECK(cfg.eval.k == 32);
    CHECK(cfg.encoder.target_rate == 0.04);
  }

  TEST_CASE("errors name the offending field") {
    auto message = [](const json& doc) -> std::string {
      try {
        parse_config(doc);
      } catch (const UsageError& e) {
        return e.what();
      }
      return "";
    };
    const json base{{"dataset", {{"kind", "two_moons"}}}};
    auto doc = base;
    doc["lif"] = {{"bogus", 1}};
    CHECK(message(doc).find("lif.bogus") != std::string::npos);
    doc = base;
    doc["mapping"] = {{"kappa", "eight"}};
    CHECK(message(doc).find("mapping.kappa") != std::string::npos);
    doc = base;
    doc["crossbar"] = {{"sample_mode", "sometimes"}};
    CHECK(message(doc).find("crossbar.sample_mode") != std::string::npos);
    doc = base;
    doc["eval"] = {{"k", 0}};
    CHECK(message(doc).find("eval.k") != std::string::npos);
    CHECK(message(json{{"dataset", {{"kind", "wbcd"}}}}).find("dataset.path") !=
          std::string::npos);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), UsageError);
    CHECK_THROWS_AS(parse_mode("gpu"), UsageError);
  }

  TEST_CASE("shipped configs load") {
    for (const char* name : {"wbcd.json", "two_moons.json"}) {
      const auto cfg = load_config(fs::path(PCMSIM_CONFIG_DIR) / name);
      CHECK(cfg.eval.l_values.size() == 2);
      if (cfg.dataset.kind == DatasetKind::kWbcd) CHECK(fs::exists(cfg.dataset.path));
    }
  }

  TEST_CASE("provenance") {
    const json doc{{"b", 1}, {"a", {1, 2}}};
    const auto p = make_provenance(doc, 17);
    CHECK(p.config_hash.size() == 16);
    CHECK(std::regex_match(p.config_hash, std::regex("[0-9a-f]{16}")));
    CHECK(p.seed == 17);
    CHECK(p.version == version_string());
    CHECK(std::string(version_string()).rfind("v0.1.0", 0) == 0);
    CHECK(make_provenance(doc, 17).config_hash == p.config_hash);
    CHECK(make_provenance(json{{"b", 2}}, 17).config_hash != p.config_hash);
    CHECK(p.csv_header().find("# config_hash: " + p.config_hash) != std::string::npos);
    CHECK(p.csv_header().find("# seed: 17") != std::string::npos);
    // FNV-1a reference values
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  }

  TEST_CASE("atomic writes replace whole files") {
    const auto dir = fresh_dir("atomic");
    const auto path = dir / "nested" / "file.txt";
    write_file_atomic(path, "first");
    write_file_atomic(path, "second");
    CHECK(slurp(path) == "second");
    for (const auto& entry : fs::directory_iterator(path.parent_path())) {
      CHECK(entry.path().filename() == "file.txt");
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0 / 3.0) == "0.333333333");
  }

  TEST_CASE("weights round trip") {
    WeightFile f;
    f.kind = "bayesian";
    f.layer_sizes = {2, 3, 2};
    f.w_r = {Matrix<double>(2, 3, std::vector<double>{0.1, -0.2, 0.3, 1.0 / 3.0, 4.0, -4.0}),
             Matrix<double>(3, 2, 0.25)};
    f.log = {{0.7, 0.5, 1.2}};
    const auto doc = weights_to_json(f, make_provenance(json::object(), 1));
    const auto back = weights_from_json(json::parse(doc.dump()));
    CHECK(back.kind == "bayesian");
    CHECK(back.layer_sizes == f.layer_sizes);
    CHECK(back.w_r == f.w_r);
    REQUIRE(back.log.size() == 1);
    CHECK(back.log[0].loss == 0.7);

    auto bad = doc;
    bad["format"] = "other";
    CHECK_THROWS_AS(weights_from_json(bad), FormatError);
    bad = doc;
    bad["layers"][0]["rows"] = 5;
    CHECK_THROWS_AS(weights_from_json(bad), FormatError);
  }

  TEST_CASE("plane snapshot round trip") {
    RealWeightTensor w_r{Matrix<double>(3, 2, std::vector<double>{0.5, -1.0, 2.5, 0.0, -0.1, 1.2})};
    HardwareConfig hw;
    hw.crossbar.l_noise_cols = 2;
    HardwareSource src(w_r, hw, 5);
    const auto layers = snapshot_hardware(src, w_r);
    REQUIRE(layers.size() == 1);
    CHECK(layers[0].l_noise_cols == 2);
    const auto doc = snapshot_to_json(layers, {3, 2}, make_provenance(json::object(), 5));
    CHECK(is_snapshot(doc));
    const auto back = snapshot_from_json(json::parse(doc.dump()));
    REQUIRE(back.size() == 1);
    CHECK(back[0].w_r == layers[0].w_r);
    CHECK(back[0].weight_realized == layers[0].weight_realized);
    CHECK(back[0].noise_realized == layers[0].noise_realized);
    CHECK(back[0].noise_target == layers[0].noise_target);
    CHECK_FALSE(is_snapshot(json{{"format", "pcmsim-weights"}}));
  }

  TEST_CASE("report serialization") {
    std::vector<std::vector<double>> conf{{0.8, 0.2}, {0.3, 0.7}};
    const std::vector<int> labels{0, 0};
    const auto r = make_report("fp32", 2, conf, labels, 4);
    const auto prov = make_provenance(json::object(), 3);
    const auto j = report_to_json(r, prov);
    CHECK(j["mode"] == "fp32");
    CHECK(j["accuracy"] == 0.5);
    CHECK(j["bins"].size() == 4);
    const auto csv = bins_to_csv(r, prov);
    CHECK(csv.find("bin,lo,hi,mean_confidence,accuracy,count") != std::string::npos);
    CHECK(data_rows(csv) == 4);
  }

  TEST_CASE("commands on a small two-moons experiment") {
    const auto dir = fresh_dir("moons");
    auto cfg = parse_config(small_moons(dir));

    SUBCASE("sweep table has |L| x |K| hardware rows") {
      cmd_sweep_l(cfg);
      CHECK(data_rows(slurp(dir / "sweep_l.csv")) == 4);
      // fp32, fxp8, cm per K plus the frequentist single model
      CHECK(data_rows(slurp(dir / "sweep_baselines.csv")) == 7);
      CHECK(slurp(dir / "sweep_l.csv").rfind("# config_hash: ", 0) == 0);
    }

    SUBCASE("confidence map covers the 100 x 100 grid") {
      cfg.eval.ensemble_sizes = {2, 10};
      const auto paths = cmd_two_moons_map(cfg);
      CHECK(paths.size() == 3);
      for (const auto& p : paths) CHECK(data_rows(slurp(p)) == 10000);
      CHECK(slurp(dir / "two_moons_map_K10.csv").find("x,y,confidence") != std::string::npos);
    }

    SUBCASE("train, map and infer from a snapshot") {
      const auto trained = cmd_train(cfg, EvalMode::kHardware);
      REQUIRE(trained.size() == 1);
      cfg.weights_path = trained.front();
      const auto snap = cmd_map(cfg);
      REQUIRE(snap.size() == 1);
      const auto from_snapshot = cmd_infer(cfg, EvalMode::kHardware, snap.front());
      const auto report = read_json_file(from_snapshot.front());
      CHECK(report["mode"] == "hardware-L2");
      CHECK(report.contains("provenance"));
      const auto from_weights = cmd_infer(cfg, EvalMode::kHardware, trained.front());
      CHECK(read_json_file(from_weights.front())["accuracy"] == report["accuracy"]);
      CHECK_THROWS_AS(cmd_infer(cfg, EvalMode::kFp32, snap.front()), UsageError);
    }

    SUBCASE("zero-noise committee with K = 1 equals the deterministic model") {
      const auto trained = cmd_train(cfg, EvalMode::kCommittee);
      REQUIRE(trained.front().filename() == "weights_frequentist.json");
      cfg.noise = NoiseModelConfig::noiseless();
      cfg.eval.k = 1;
      const auto out = cmd_infer(cfg, EvalMode::kCommittee, trained.front());
      const auto report = read_json_file(out.front());
      const auto data = prepare_data(cfg);
      const auto w = load_weights(trained.front()).w_r;
      const auto single = evaluate_frequentist(cfg, data.net, w, data.test_x, data.test_y);
      CHECK(report["accuracy"].get<double>() == single.accuracy);
    }

    SUBCASE("area writes both layouts") {
      const auto paths = cmd_area(cfg);
      CHECK(paths.size() == 2);
      for (const auto& p : paths) CHECK(read_json_file(p).contains("ratio"));
    }

    SUBCASE("the map needs a two-moons dataset") {
      const auto path = (fs::path(PCMSIM_DATA_DIR) / "wdbc.data").string();
      auto wbcd = parse_config(json{{"dataset", {{"kind", "wbcd"}, {"path", path}}}});
      CHECK_THROWS_AS(cmd_two_moons_map(wbcd), UsageError);
    }
  }

  TEST_CASE("held-out two-moons set appends off-manifold points") {
    DatasetConfig d;
    d.kind = DatasetKind::kTwoMoons;
    d.n_test = 30;
    d.ood_points = 25;
    const auto set = two_moons_heldout(d, 3);
    CHECK(set.size() == 55);
    for (std::size_t i = 30; i < 55; ++i) {
      CHECK(distance_to_moons(set.features(i, 0), set.features(i, 1)) > d.ood_margin);
      CHECK(set.features(i, 0) >= d.two_moons.grid.x_min);
      CHECK(set.features(i, 1) <= d.two_moons.grid.y_max);
    }
    CHECK(fraction_in_band(std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.9}, 0.3, 0.7) ==
          doctest::Approx(0.6));
  }
}
