#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "greenshield/dataset.hpp"
#include "greenshield/metrics.hpp"
#include "greenshield/models.hpp"

namespace greenshield {

// Synthetic benchmark generator. Each class draws temp, rh and oxy from
// independent Gaussians with a shared per-feature sd; the class means sit
// 1.9 sd apart on every feature, so the Mahalanobis distance between the
// classes is 1.9 * sqrt(3) ~= 3.29 and the Bayes-optimal accuracy is
// Phi(3.29 / 2) ~= 0.95 (the two densities overlap on ~10% of their mass).
struct GaussianFeature {
  double mean;
  double sd;
};
struct ClassCluster {
  GaussianFeature temp;
  GaussianFeature rh;
  GaussianFeature oxy;
};
inline constexpr ClassCluster kFireCluster{{34.6, 4.0}, {41.0, 10.0}, {24.8, 2.0}};
inline constexpr ClassCluster kNotFireCluster{{27.0, 4.0}, {60.0, 10.0}, {21.0, 2.0}};
inline constexpr std::size_t kMinGeneratedRows = 50;

/// Balanced, seeded dataset in the full 15-column schema. Feature values are
/// rounded to 0.1 and clipped to their valid ranges. Throws InvalidN for n < 50.
std::vector<RawRecord> generate_dataset(std::size_t n, std::uint64_t seed);

/// impute -> remove outliers -> select features -> split.
SplitResult prepare_dataset(std::span<const RawRecord> raw, std::uint64_t seed);

struct TrainedModels {
  LogisticModel logreg;
  ForestModel forest;
  SvmModel svm;
  std::array<EvalReport, 3> reports;  // logreg, forest, svm
  ModelKind selected = ModelKind::Svm;

  FireModel model(ModelKind kind) const;
};

/// Trains all three classifiers on split.train and evaluates them on split.test.
TrainedModels train_all(const SplitResult& split, const TrainConfig& cfg);

/// Writes logreg.json, forest.json, svm.json and selected.json into `dir`.
/// selected.json records the winning kind, its file, version hash, training
/// timestamp and every evaluation report.
void write_training_outputs(const TrainedModels& trained, const std::filesystem::path& dir,
                            const std::string& trained_at);

}  // namespace greenshield
