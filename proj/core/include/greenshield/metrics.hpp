#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "greenshield/models.hpp"

namespace greenshield {

/// Binary contingency counts with fire as the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth);

// Zero denominators yield 0 rather than an error.
double accuracy(const ConfusionMatrix& c);
double precision(const ConfusionMatrix& c);
double recall(const ConfusionMatrix& c);
double f1(const ConfusionMatrix& c);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  /// Scores >= threshold are called positive. The (0, 0) anchor uses +inf.
  double threshold = std::numeric_limits<double>::infinity();
};

struct RocCurve {
  std::vector<RocPoint> points;
};

/// One vertex per distinct score, swept in descending order; tied scores
/// move together. Throws SingleClassTruth or LengthMismatch.
RocCurve roc_curve(std::span<const double> scores, std::span<const int> truth);

/// Trapezoidal area under the curve.
double auc(const RocCurve& curve);

struct EvalReport {
  ModelKind kind = ModelKind::LogisticRegression;
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> auc;  // absent when the test set holds a single class
  RocCurve roc;
};

/// Labels come from each model's own decision rule, scores from
/// predict_probability. Throws EmptyTestSet.
EvalReport evaluate(const FireModel& model, std::span<const LabeledSample> test);

/// Highest accuracy, then highest F1, then Svm > RandomForest > LogisticRegression.
ModelKind select_model(std::span<const EvalReport> reports);

std::string report_to_json(const EvalReport& report, int indent = -1);
/// Throws MalformedDocument when the document does not match the report schema.
EvalReport report_from_json(const std::string& text);

/// Aligned text table: Model, Accuracy (%), Precision, Recall, F1 Score, AUC.
std::string render_table(std::span<const EvalReport> reports);

}  // namespace greenshield
