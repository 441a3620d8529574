#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "pcmsim/data.hpp"
#include "pcmsim/errors.hpp"

using namespace pcmsim;

namespace {

const std::filesystem::path kWbcd = std::filesystem::path(PCMSIM_DATA_DIR) / "wdbc.data";

std::filesystem::path scratch_file(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / ("pcmsim_test_" + name);
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_SUITE("data") {
  TEST_CASE("noiseless moons lie on the arcs") {
    TwoMoonsSpec spec;
    spec.noise_std = 0.0;
    spec.n_samples = 301;
    const auto d = gen_two_moons(spec);
    CHECK(d.size() == 301);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double x = d.features(i, 0), y = d.features(i, 1);
      // independent arc distance for the labelled arc
      const double cx = d.labels[i] == 0 ? 0.0 : 1.0;
      const double cy = d.labels[i] == 0 ? 0.0 : 0.5;
      CHECK(std::abs(std::hypot(x - cx, y - cy) - 1.0) < 1e-12);
      CHECK(distance_to_moons(x, y) < 1e-12);
    }
  }

  TEST_CASE("moons are class balanced and seeded") {
    for (std::size_t n : {2, 7, 400}) {
      TwoMoonsSpec spec;
      spec.n_samples = n;
      spec.seed = 3;
      const auto d = gen_two_moons(spec);
      const auto ones = std::count(d.labels.begin(), d.labels.end(), 1);
      CHECK(std::abs(static_cast<long>(n) - 2 * ones) <= 1);
      const auto again = gen_two_moons(spec);
      CHECK(d.features == again.features);
      CHECK(d.labels == again.labels);
    }
    TwoMoonsSpec bad;
    bad.n_samples = 1;
    CHECK_THROWS_AS(gen_two_moons(bad), ArgumentError);
  }

  TEST_CASE("grid lattice shape and ordering") {
    GridSpec g;
    g.resolution = 3;
    const auto pts = grid_points(g);
    CHECK(pts.rows() == 9);
    CHECK(pts(0, 0) == g.x_min);
    CHECK(pts(1, 0) == doctest::Approx(0.5 * (g.x_min + g.x_max)));
    CHECK(pts(1, 1) == g.y_min);
    CHECK(pts(8, 0) == g.x_max);
    CHECK(pts(8, 1) == g.y_max);
  }

  TEST_CASE("canonical WDBC file") {
    const auto records = load_wbcd(kWbcd);
    // independent count straight from the text
    std::ifstream in(kWbcd);
    std::string line;
    std::size_t lines = 0, benign = 0;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ++lines;
      benign += line.find(",B,") != std::string::npos;
    }
    CHECK(records.size() == lines);
    CHECK(records.size() == 569);
    const auto b = std::count_if(records.begin(), records.end(),
                                 [](const auto& r) { return r.label == Diagnosis::kBenign; });
    CHECK(static_cast<std::size_t>(b) == benign);
    CHECK(b == 357);
    CHECK(records.size() - b == 212);
  }

  TEST_CASE("malformed WDBC input") {
    CHECK_THROWS_AS(load_wbcd(scratch_file("empty.csv", "")), FormatError);
    CHECK_THROWS_AS(load_wbcd(scratch_file("short.csv", "1,M,2,3\n")), FormatError);
    std::string row = "1,M";
    for (int k = 0; k < 30; ++k) row += ",1.0";
    CHECK_NOTHROW(load_wbcd(scratch_file("one.csv", row + "\n")));
    std::string bad = "1,X";
    for (int k = 0; k < 30; ++k) bad += ",1.0";
    try {
      load_wbcd(scratch_file("badlabel.csv", row + "\n" + bad + "\n"));
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
    std::string nan = "1,B,abc";
    for (int k = 0; k < 29; ++k) nan += ",1.0";
    CHECK_THROWS_AS(load_wbcd(scratch_file("badnum.csv", nan + "\n")), ParseError);
    CHECK_THROWS_AS(load_wbcd("/nonexistent/wdbc.data"), FormatError);
  }

  TEST_CASE("split is disjoint, complete and seeded") {
    const auto s = train_test_split(569, 0.8, 11);
    CHECK(s.train.size() == 455);
    CHECK(s.train.size() + s.test.size() == 569);
    std::set<std::size_t> all(s.train.begin(), s.train.end());
    for (auto i : s.test) CHECK(all.insert(i).second);
    CHECK(all.size() == 569);
    const auto again = train_test_split(569, 0.8, 11);
    CHECK(again.train == s.train);
    CHECK_FALSE(train_test_split(569, 0.8, 12).train == s.train);
    CHECK_THROWS_AS(train_test_split(10, 1.0, 1), ArgumentError);
  }

  TEST_CASE("min-max scaling on the training split") {
    const auto d = to_dataset(load_wbcd(kWbcd));
    const auto s = train_test_split(d.size(), 0.8, 1);
    const auto train = d.subset(s.train);
    MinMaxScaler scaler;
    scaler.fit(train.features);
    const auto t = scaler.transform(train.features);
    for (std::size_t f = 0; f < t.cols(); ++f) {
      double lo = 1e9, hi = -1e9;
      for (std::size_t i = 0; i < t.rows(); ++i) {
        lo = std::min(lo, t(i, f));
        hi = std::max(hi, t(i, f));
      }
      CHECK(lo == 0.0);
      CHECK(hi == 1.0);
    }
    const auto test = scaler.transform(d.subset(s.test).features);
    for (double v : test.flat()) CHECK((v >= 0.0 && v <= 1.0));
  }

  TEST_CASE("rate coding: zero feature never spikes, higher features spike more") {
    EncoderConfig cfg;
    cfg.target_rate = 0.1;
    SpikeEncoder enc(cfg);
    Matrix<double> fit(2, 2, std::vector<double>{0.2, 0.4, 0.6, 0.8});
    enc.fit(fit);
    Rng rng(1);
    const std::vector<double> x{0.0, 0.9};
    std::size_t c0 = 0, c1 = 0;
    for (int k = 0; k < 200; ++k) {
      const auto s = enc.encode(x, rng);
      for (std::size_t t = 0; t < s.rows(); ++t) {
        c0 += s(t, 0);
        c1 += s(t, 1);
      }
    }
    CHECK(c0 == 0);
    CHECK(c1 > 0);
    const auto p_lo = enc.probabilities(std::vector<double>{0.3});
    const auto p_hi = enc.probabilities(std::vector<double>{0.7});
    CHECK(p_hi[0] > p_lo[0]);
  }

  TEST_CASE("WBCD training split encodes at 0.04 spikes per neuron per step") {
    const auto d = to_dataset(load_wbcd(kWbcd));
    const auto s = train_test_split(d.size(), 0.8, 1);
    MinMaxScaler scaler;
    const auto train = d.subset(s.train);
    scaler.fit(train.features);
    const auto x = scaler.transform(train.features);
    EncoderConfig cfg;
    cfg.t_steps = 100;
    SpikeEncoder enc(cfg);
    enc.fit(x);
    const auto trains = enc.encode_all(x, 5);
    CHECK(trains.front().cols() == 30);
    CHECK(std::abs(average_rate(trains) - 0.04) <= 0.002);
    CHECK(enc.encode_all(x, 5) == trains);
  }

  TEST_CASE("population coding hits its target too") {
    TwoMoonsSpec spec;
    const auto d = gen_two_moons(spec);
    MinMaxScaler scaler;
    scaler.fit_bounds({spec.grid.x_min, spec.grid.y_min}, {spec.grid.x_max, spec.grid.y_max});
    const auto x = scaler.transform(d.features);
    EncoderConfig cfg;
    cfg.scheme = EncodingScheme::kPopulation;
    cfg.neurons_per_feature = 10;
    SpikeEncoder enc(cfg);
    CHECK(enc.num_neurons(2) == 20);
    enc.fit(x);
    CHECK(std::abs(average_rate(enc.encode_all(x, 1)) - 0.04) <= 0.002);
  }

  TEST_CASE("encoder validation") {
    EncoderConfig cfg;
    cfg.target_rate = 0.0;
    CHECK_THROWS_AS(SpikeEncoder{cfg}, ArgumentError);
    cfg = EncoderConfig{};
    cfg.t_steps = 0;
    CHECK_THROWS_AS(SpikeEncoder{cfg}, ArgumentError);
    SpikeEncoder enc{EncoderConfig{}};
    CHECK_THROWS_AS(enc.fit(Matrix<double>(3, 2, 0.0)), ArgumentError);
  }
}
