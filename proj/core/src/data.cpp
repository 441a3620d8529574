#include "pcmsim/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "pcmsim/errors.hpp"

namespace pcmsim {

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  Dataset out;
  out.features = Matrix<double>(indices.size(), features.cols());
  out.labels.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto src = features.row(indices[k]);
    std::copy(src.begin(), src.end(), out.features.row(k).begin());
    out.labels.push_back(labels[indices[k]]);
  }
  return out;
}

Dataset gen_two_moons(const TwoMoonsSpec& spec) {
  if (spec.n_samples < 2) throw ArgumentError("two moons: n_samples must be >= 2");
  if (!(spec.noise_std >= 0.0)) throw ArgumentError("two moons: noise_std must be >= 0");
  Rng rng = make_rng(spec.seed, {id(Stream::kData)});
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::normal_distribution<double> jitter(0.0, spec.noise_std > 0.0 ? spec.noise_std : 1.0);

  const std::size_t n0 = spec.n_samples / 2;
  Dataset data;
  data.features = Matrix<double>(spec.n_samples, 2);
  data.labels.resize(spec.n_samples);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    const double t = angle(rng);
    const int label = i < n0 ? 0 : 1;
    double x = label == 0 ? std::cos(t) : 1.0 - std::cos(t);
    double y = label == 0 ? std::sin(t) : 0.5 - std::sin(t);
    if (spec.noise_std > 0.0) {
      x += jitter(rng);
      y += jitter(rng);
    }
    data.features(i, 0) = x;
    data.features(i, 1) = y;
    data.labels[i] = label;
  }
  std::vector<std::size_t> order(spec.n_samples);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return data.subset(order);
}

Matrix<double> grid_points(const GridSpec& grid) {
  if (grid.resolution < 2) throw ArgumentError("grid: resolution must be >= 2");
  const std::size_t r = grid.resolution;
  Matrix<double> pts(r * r, 2);
  for (std::size_t iy = 0; iy < r; ++iy) {
    for (std::size_t ix = 0; ix < r; ++ix) {
      const double fx = static_cast<double>(ix) / static_cast<double>(r - 1);
      const double fy = static_cast<double>(iy) / static_cast<double>(r - 1);
      pts(iy * r + ix, 0) = grid.x_min + fx * (grid.x_max - grid.x_min);
      pts(iy * r + ix, 1) = grid.y_min + fy * (grid.y_max - grid.y_min);
    }
  }
  return pts;
}

double distance_to_moons(double x, double y) {
  auto arc = [](double px, double py, double cx, double cy, bool upper) {
    const double dx = px - cx, dy = py - cy;
    const bool on_side = upper ? dy >= 0.0 : dy <= 0.0;
    if (on_side) return std::abs(std::hypot(dx, dy) - 1.0);
    // Nearest point is one of the arc end points.
    return std::min(std::hypot(px - (cx + 1.0), py - cy), std::hypot(px - (cx - 1.0), py - cy));
  };
  return std::min(arc(x, y, 0.0, 0.0, true), arc(x, y, 1.0, 0.5, false));
}

namespace {

double parse_double(std::string_view field, std::size_t line) {
  double v = 0.0;
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.remove_suffix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw ParseError("wbcd: cannot parse '" + std::string(field) + "' as a number", line);
  }
  return v;
}

}  // namespace

std::vector<WbcdRecord> load_wbcd(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("wbcd: cannot open " + path.string());
  std::vector<WbcdRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 32) {
      throw FormatError("wbcd: expected 32 columns, found " + std::to_string(fields.size()) +
                        " (line " + std::to_string(line_no) + ")");
    }
    WbcdRecord rec;
    rec.id = std::string(fields[0]);
    if (fields[1] == "M") {
      rec.label = Diagnosis::kMalignant;
    } else if (fields[1] == "B") {
      rec.label = Diagnosis::kBenign;
    } else {
      throw ParseError("wbcd: diagnosis must be M or B", line_no);
    }
    for (std::size_t k = 0; k < 30; ++k) rec.features[k] = parse_double(fields[k + 2], line_no);
    records.push_back(rec);
  }
  if (records.empty()) throw FormatError("wbcd: no records in " + path.string());
  return records;
}

Dataset to_dataset(const std::vector<WbcdRecord>& records) {
  Dataset data;
  data.features = Matrix<double>(records.size(), 30);
  data.labels.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::copy(records[i].features.begin(), records[i].features.end(),
              data.features.row(i).begin());
    data.labels.push_back(static_cast<int>(records[i].label));
  }
  return data;
}

Split train_test_split(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ArgumentError("split: train_fraction must be in (0, 1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(seed, {id(Stream::kSplit)});
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::round(train_fraction * static_cast<double>(n)));
  Split split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return split;
}

void MinMaxScaler::fit(const Matrix<double>& features) {
  if (features.rows() == 0) throw ArgumentError("scaler: empty feature set");
  lo_.assign(features.cols(), std::numeric_limits<double>::infinity());
  hi_.assign(features.cols(), -std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t k = 0; k < features.cols(); ++k) {
      lo_[k] = std::min(lo_[k], features(i, k));
      hi_[k] = std::max(hi_[k], features(i, k));
    }
  }
}

void MinMaxScaler::fit_bounds(std::vector<double> lo, std::vector<double> hi) {
  if (lo.size() != hi.size()) throw ArgumentError("scaler: bound size mismatch");
  lo_ = std::move(lo);
  hi_ = std::move(hi);
}

Matrix<double> MinMaxScaler::transform(const Matrix<double>& features) const {
  if (features.cols() != lo_.size()) throw ArgumentError("scaler: feature count mismatch");
  Matrix<double> out(features.rows(), features.cols());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    for (std::size_t k = 0; k < features.cols(); ++k) {
      const double range = hi_[k] - lo_[k];
      out(i, k) = range > 0.0 ? std::clamp((features(i, k) - lo_[k]) / range, 0.0, 1.0) : 0.0;
    }
  }
  return out;
}

void EncoderConfig::validate() const {
  if (!(target_rate > 0.0 && target_rate <= 1.0)) {
    throw ArgumentError("encoder: target_rate must be in (0, 1]");
  }
  if (t_steps == 0) throw ArgumentError("encoder: t_steps must be >= 1");
  if (scheme == EncodingScheme::kPopulation && neurons_per_feature == 0) {
    throw ArgumentError("encoder: neurons_per_feature must be >= 1");
  }
  if (!(tuning_width > 0.0)) throw ArgumentError("encoder: tuning_width must be > 0");
}

SpikeEncoder::SpikeEncoder(EncoderConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::size_t SpikeEncoder::num_neurons(std::size_t num_features) const {
  return cfg_.scheme == EncodingScheme::kRate ? num_features
                                              : num_features * cfg_.neurons_per_feature;
}

std::vector<double> SpikeEncoder::raw_rates(std::span<const double> features) const {
  if (cfg_.scheme == EncodingScheme::kRate) {
    return {features.begin(), features.end()};
  }
  const std::size_t per = cfg_.neurons_per_feature;
  std::vector<double> rates;
  rates.reserve(features.size() * per);
  const double inv_two_w2 = 1.0 / (2.0 * cfg_.tuning_width * cfg_.tuning_width);
  for (double x : features) {
    for (std::size_t k = 0; k < per; ++k) {
      const double center = per == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(per - 1);
      const double d = x - center;
      rates.push_back(std::exp(-d * d * inv_two_w2));
    }
  }
  return rates;
}

void SpikeEncoder::fit(const Matrix<double>& features) {
  std::vector<double> raw;
  for (std::size_t i = 0; i < features.rows(); ++i) {
    auto r = raw_rates(features.row(i));
    raw.insert(raw.end(), r.begin(), r.end());
  }
  auto mean_at = [&](double s) {
    double acc = 0.0;
    for (double r : raw) acc += std::min(1.0, s * r);
    return acc / static_cast<double>(raw.size());
  };
  const double raw_mean = raw.empty() ? 0.0 : mean_at(1.0);
  if (!(raw_mean > 0.0)) throw ArgumentError("encoder: fitted set produces no activity");
  // mean_at is monotone in the scale; bisect for clipping at rate 1.
  double lo = 0.0;
  double hi = cfg_.target_rate / raw_mean;
  while (mean_at(hi) < cfg_.target_rate) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw ArgumentError("encoder: target_rate not reachable");
  }
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_at(mid) < cfg_.target_rate ? lo : hi) = mid;
  }
  scale_ = hi;
}

std::vector<double> SpikeEncoder::probabilities(std::span<const double> features) const {
  auto rates = raw_rates(features);
  for (auto& r : rates) r = std::clamp(scale_ * r, 0.0, 1.0);
  return rates;
}

SpikeTrain SpikeEncoder::encode(std::span<const double> features, Rng& rng) const {
  const auto p = probabilities(features);
  SpikeTrain train(cfg_.t_steps, p.size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t t = 0; t < cfg_.t_steps; ++t) {
    auto row = train.row(t);
    for (std::size_t j = 0; j < p.size(); ++j) row[j] = u(rng) < p[j] ? 1 : 0;
  }
  return train;
}

std::vector<SpikeTrain> SpikeEncoder::encode_all(const Matrix<double>& features,
                                                 std::uint64_t seed) const {
  std::vector<SpikeTrain> out;
  out.reserve(features.rows());
  for (std::size_t i = 0; i < features.rows(); ++i) {
    Rng rng = make_rng(seed, {id(Stream::kEncoder), i});
    out.push_back(encode(features.row(i), rng));
  }
  return out;
}

double average_rate(const std::vector<SpikeTrain>& trains) {
  double spikes = 0.0, slots = 0.0;
  for (const auto& t : trains) {
    for (auto s : t.flat()) spikes += s;
    slots += static_cast<double>(t.size());
  }
  return slots > 0.0 ? spikes / slots : 0.0;
}

}  // namespace pcmsim
