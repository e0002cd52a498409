#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace greenshield {

inline constexpr std::size_t kNumFeatures = 3;

/// Numeric columns of the raw dataset, in canonical file order. The class
/// label is the trailing fifteenth column and is kept separately.
enum class Column {
  Day,
  Mon,
  Yr,
  Temp,
  Rh,
  Ws,
  Rain,
  Oxy,
  Ffmc,
  Dmc,
  Dc,
  Isi,
  Bui,
  Fwi,
};

inline constexpr std::size_t kNumericColumns = 14;
inline constexpr std::array<Column, 3> kSelectedColumns = {Column::Temp, Column::Rh, Column::Oxy};

std::string_view column_name(Column column);
std::span<const std::string_view> canonical_header();

/// Sentinel for an empty CSV cell.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double value) { return std::isnan(value); }

struct RawRecord {
  double day = kMissing;
  double mon = kMissing;
  double yr = kMissing;
  double temp = kMissing;
  double rh = kMissing;
  double ws = kMissing;
  double rain = kMissing;
  double oxy = kMissing;
  double ffmc = kMissing;
  double dmc = kMissing;
  double dc = kMissing;
  double isi = kMissing;
  double bui = kMissing;
  double fwi = kMissing;
  int label = 0;  // fire = 1, not fire = 0

  double& at(Column column);
  double at(Column column) const;

  friend bool operator==(const RawRecord& a, const RawRecord& b);
};

struct FeatureVector {
  double temp = 0.0;
  double rh = 0.0;
  double oxy = 0.0;

  std::array<double, kNumFeatures> values() const { return {temp, rh, oxy}; }
  static FeatureVector from(const std::array<double, kNumFeatures>& v) { return {v[0], v[1], v[2]}; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct LabeledSample {
  FeatureVector features;
  int label = 0;

  friend bool operator==(const LabeledSample&, const LabeledSample&) = default;
};

struct ScalingParams {
  std::array<double, kNumFeatures> mean{};
  std::array<double, kNumFeatures> stddev{};
};

struct SplitResult {
  std::vector<LabeledSample> train;
  std::vector<LabeledSample> test;
  std::vector<std::size_t> train_index;  // positions in the input collection
  std::vector<std::size_t> test_index;
  std::uint64_t seed = 0;
};

/// Closed bounds shared by dataset validation and the prediction API.
struct FeatureBounds {
  double lo;
  double hi;
};
inline constexpr FeatureBounds kTempBounds{-50.0, 60.0};
inline constexpr FeatureBounds kPercentBounds{0.0, 100.0};

/// Throws OutOfRange naming the first offending field (temp, rh or oxy).
void validate_features(const FeatureVector& v);

// Throws MissingColumn, UnparsableCell, UnknownClassLabel, OutOfRange or Io.
std::vector<RawRecord> load_csv(const std::filesystem::path& path);
std::vector<RawRecord> parse_csv(std::istream& in);

/// Writes the canonical header followed by one row per record. Reals use the
/// shortest representation that parses back to the same double.
void write_csv(std::ostream& out, std::span<const RawRecord> records);
void save_csv(const std::filesystem::path& path, std::span<const RawRecord> records);

/// Replaces missing cells by the column median over non-missing values.
std::vector<RawRecord> impute_missing(std::span<const RawRecord> records);

/// Drops records whose temp, rh or oxy falls outside the 1.5 IQR fences.
/// Quartiles use linear interpolation between order statistics.
std::vector<RawRecord> remove_outliers(std::span<const RawRecord> records);

ScalingParams fit_scaler(std::span<const LabeledSample> train);
std::array<double, kNumFeatures> apply_scaler(const ScalingParams& params, const FeatureVector& v);

LabeledSample select_features(const RawRecord& record);
std::vector<LabeledSample> select_features(std::span<const RawRecord> records);

SplitResult split(std::span<const LabeledSample> samples, std::uint64_t seed);

// Shared helpers; exposed for the preprocessing tests.
double median(std::vector<double> values);
double quantile(std::vector<double> values, double q);

}  // namespace greenshield
