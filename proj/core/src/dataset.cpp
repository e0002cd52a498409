#include "greenshield/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "greenshield/error.hpp"
#include "greenshield/random.hpp"

namespace greenshield {
namespace {

constexpr std::array<std::string_view, kNumericColumns + 1> kHeader = {
    "day", "mon", "yr", "temp", "rh", "ws", "rain", "oxy",
    "ffmc", "dmc", "dc", "isi", "bui", "fwi", "class"};

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::optional<int> parse_label(std::string_view cell) {
  std::string squashed;
  for (unsigned char c : cell) {
    if (!std::isspace(c)) squashed.push_back(static_cast<char>(std::tolower(c)));
  }
  if (squashed == "fire") return 1;
  if (squashed == "notfire") return 0;
  return std::nullopt;
}

std::string number_text(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

void check_bounds(double value, FeatureBounds bounds, std::string_view name) {
  if (!(value >= bounds.lo && value <= bounds.hi)) {
    throw Error(ErrorCode::OutOfRange,
                std::string(name) + " = " + number_text(value) + " outside [" + number_text(bounds.lo) + ", " +
                    number_text(bounds.hi) + "]",
                std::string(name));
  }
}

void validate_record(const RawRecord& r, std::size_t row) {
  auto fail = [row](std::string_view name) {
    throw Error(ErrorCode::OutOfRange,
                "row " + std::to_string(row) + ": " + std::string(name) + " out of range",
                std::string(name));
  };
  auto outside = [](double v, double lo, double hi) { return !is_missing(v) && (v < lo || v > hi); };
  if (outside(r.temp, kTempBounds.lo, kTempBounds.hi)) fail("temp");
  if (outside(r.rh, kPercentBounds.lo, kPercentBounds.hi)) fail("rh");
  if (outside(r.oxy, kPercentBounds.lo, kPercentBounds.hi)) fail("oxy");
  if (!is_missing(r.rain) && r.rain < 0.0) fail("rain");
  if (!is_missing(r.ws) && r.ws < 0.0) fail("ws");
}

std::string format_real(double value) { return is_missing(value) ? std::string() : number_text(value); }

}  // namespace

std::string_view column_name(Column column) { return kHeader[static_cast<std::size_t>(column)]; }

std::span<const std::string_view> canonical_header() { return kHeader; }

double& RawRecord::at(Column column) {
  switch (column) {
    case Column::Day: return day;
    case Column::Mon: return mon;
    case Column::Yr: return yr;
    case Column::Temp: return temp;
    case Column::Rh: return rh;
    case Column::Ws: return ws;
    case Column::Rain: return rain;
    case Column::Oxy: return oxy;
    case Column::Ffmc: return ffmc;
    case Column::Dmc: return dmc;
    case Column::Dc: return dc;
    case Column::Isi: return isi;
    case Column::Bui: return bui;
    case Column::Fwi: return fwi;
  }
  return fwi;
}

double RawRecord::at(Column column) const { return const_cast<RawRecord&>(*this).at(column); }

bool operator==(const RawRecord& a, const RawRecord& b) {
  for (std::size_t c = 0; c < kNumericColumns; ++c) {
    const double x = a.at(static_cast<Column>(c));
    const double y = b.at(static_cast<Column>(c));
    if (is_missing(x) != is_missing(y)) return false;
    if (!is_missing(x) && x != y) return false;
  }
  return a.label == b.label;
}

void validate_features(const FeatureVector& v) {
  check_bounds(v.temp, kTempBounds, "temp");
  check_bounds(v.rh, kPercentBounds, "rh");
  check_bounds(v.oxy, kPercentBounds, "oxy");
}

std::vector<RawRecord> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::MissingColumn, "empty file: header row missing", "day");
  }
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_line(line);
  // position of each canonical column within the file
  std::array<std::size_t, kHeader.size()> position{};
  for (std::size_t c = 0; c < kHeader.size(); ++c) {
    auto it = std::find_if(header.begin(), header.end(),
                           [&](const std::string& h) { return lower(trim(h)) == kHeader[c]; });
    if (it == header.end()) {
      throw Error(ErrorCode::MissingColumn, "missing column: " + std::string(kHeader[c]),
                  std::string(kHeader[c]));
    }
    position[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<RawRecord> records;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);
    auto cell_at = [&](std::size_t c) -> std::string {
      return position[c] < cells.size() ? trim(cells[position[c]]) : std::string();
    };

    RawRecord record;
    for (std::size_t c = 0; c < kNumericColumns; ++c) {
      const std::string text = cell_at(c);
      if (text.empty()) continue;
      double value = 0.0;
      auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value)) {
        throw Error(ErrorCode::UnparsableCell,
                    "row " + std::to_string(row) + ", column " + std::string(kHeader[c]) +
                        ": cannot parse '" + text + "'",
                    std::string(kHeader[c]));
      }
      record.at(static_cast<Column>(c)) = value;
    }
    const auto label = parse_label(cell_at(kNumericColumns));
    if (!label) {
      throw Error(ErrorCode::UnknownClassLabel,
                  "row " + std::to_string(row) + ": unknown class label '" +
                      cell_at(kNumericColumns) + "'",
                  "class");
    }
    record.label = *label;
    validate_record(record, row);
    records.push_back(record);
  }
  return records;
}

std::vector<RawRecord> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return parse_csv(in);
}

void write_csv(std::ostream& out, std::span<const RawRecord> records) {
  for (std::size_t c = 0; c < kHeader.size(); ++c) {
    out << (c ? "," : "") << kHeader[c];
  }
  out << '\n';
  for (const auto& r : records) {
    for (std::size_t c = 0; c < kNumericColumns; ++c) {
      out << format_real(r.at(static_cast<Column>(c))) << ',';
    }
    out << (r.label == 1 ? "fire" : "not fire") << '\n';
  }
}

void save_csv(const std::filesystem::path& path, std::span<const RawRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  write_csv(out, records);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "quantile of empty set");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

std::vector<RawRecord> impute_missing(std::span<const RawRecord> records) {
  std::vector<RawRecord> out(records.begin(), records.end());
  if (out.empty()) return out;
  for (std::size_t c = 0; c < kNumericColumns; ++c) {
    const auto column = static_cast<Column>(c);
    std::vector<double> present;
    bool any_missing = false;
    for (const auto& r : records) {
      if (is_missing(r.at(column))) {
        any_missing = true;
      } else {
        present.push_back(r.at(column));
      }
    }
    if (present.empty()) {
      throw Error(ErrorCode::AllMissing, "column " + std::string(column_name(column)) + " has no values",
                  std::string(column_name(column)));
    }
    if (!any_missing) continue;
    const double fill = median(std::move(present));
    for (auto& r : out) {
      if (is_missing(r.at(column))) r.at(column) = fill;
    }
  }
  return out;
}

std::vector<RawRecord> remove_outliers(std::span<const RawRecord> records) {
  if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records to filter");

  std::array<FeatureBounds, kSelectedColumns.size()> fences{};
  for (std::size_t i = 0; i < kSelectedColumns.size(); ++i) {
    std::vector<double> values;
    for (const auto& r : records) {
      if (!is_missing(r.at(kSelectedColumns[i]))) values.push_back(r.at(kSelectedColumns[i]));
    }
    if (values.empty()) {
      fences[i] = {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
      continue;
    }
    const double q1 = quantile(values, 0.25);
    const double q3 = quantile(values, 0.75);
    const double iqr = q3 - q1;
    fences[i] = {q1 - 1.5 * iqr, q3 + 1.5 * iqr};
  }

  std::vector<RawRecord> kept;
  for (const auto& r : records) {
    bool inside = true;
    for (std::size_t i = 0; i < kSelectedColumns.size(); ++i) {
      const double v = r.at(kSelectedColumns[i]);
      if (v < fences[i].lo || v > fences[i].hi) inside = false;
    }
    if (inside) kept.push_back(r);
  }
  if (kept.empty()) throw Error(ErrorCode::EmptyAfterFiltering, "all records were outliers");
  return kept;
}

ScalingParams fit_scaler(std::span<const LabeledSample> train) {
  if (train.empty()) throw Error(ErrorCode::EmptyInput, "cannot fit scaler on empty training set");
  ScalingParams params;
  const double n = static_cast<double>(train.size());
  for (const auto& s : train) {
    const auto v = s.features.values();
    for (std::size_t j = 0; j < kNumFeatures; ++j) params.mean[j] += v[j];
  }
  for (auto& m : params.mean) m /= n;
  for (const auto& s : train) {
    const auto v = s.features.values();
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      const double d = v[j] - params.mean[j];
      params.stddev[j] += d * d;
    }
  }
  for (auto& sd : params.stddev) sd = std::sqrt(sd / n);
  return params;
}

std::array<double, kNumFeatures> apply_scaler(const ScalingParams& params, const FeatureVector& v) {
  auto out = v.values();
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    out[j] = params.stddev[j] > 0.0 ? (out[j] - params.mean[j]) / params.stddev[j] : 0.0;
  }
  return out;
}

LabeledSample select_features(const RawRecord& record) {
  return {{record.temp, record.rh, record.oxy}, record.label};
}

std::vector<LabeledSample> select_features(std::span<const RawRecord> records) {
  std::vector<LabeledSample> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(select_features(r));
  return out;
}

SplitResult split(std::span<const LabeledSample> samples, std::uint64_t seed) {
  if (samples.size() < 5) {
    throw Error(ErrorCode::TooFewSamples,
                "need at least 5 samples to split, got " + std::to_string(samples.size()));
  }
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  const std::size_t n_train = samples.size() * 8 / 10;
  SplitResult result;
  result.seed = seed;
  result.train_index.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  result.test_index.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  for (auto i : result.train_index) result.train.push_back(samples[i]);
  for (auto i : result.test_index) result.test.push_back(samples[i]);
  return result;
}

}  // namespace greenshield
