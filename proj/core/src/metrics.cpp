#include "greenshield/metrics.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "greenshield/error.hpp"
#include "json_io.hpp"

namespace greenshield {

ConfusionMatrix confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) {
    throw Error(ErrorCode::LengthMismatch, "prediction and truth lengths differ");
  }
  if (predicted.empty()) throw Error(ErrorCode::EmptyInput, "no predictions to score");
  ConfusionMatrix c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] == kFire;
    const bool t = truth[i] == kFire;
    if (p && t) ++c.tp;
    else if (!p && !t) ++c.tn;
    else if (p) ++c.fp;
    else ++c.fn;
  }
  return c;
}

double accuracy(const ConfusionMatrix& c) {
  const auto total = c.total();
  return total == 0 ? 0.0 : static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
}

double precision(const ConfusionMatrix& c) {
  return c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
}

double recall(const ConfusionMatrix& c) {
  return c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

double f1(const ConfusionMatrix& c) {
  const double p = precision(c);
  const double r = recall(c);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

RocCurve roc_curve(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "score and truth lengths differ");
  const auto positives = static_cast<std::size_t>(std::count(truth.begin(), truth.end(), kFire));
  const std::size_t negatives = truth.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw Error(ErrorCode::SingleClassTruth, "ROC needs both classes in the ground truth");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double threshold = scores[order[k]];
    while (k < order.size() && scores[order[k]] == threshold) {
      (truth[order[k]] == kFire ? tp : fp) += 1;
      ++k;
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives), threshold});
  }
  return curve;
}

double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& a = curve.points[k - 1];
    const auto& b = curve.points[k];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return area;
}

EvalReport evaluate(const FireModel& model, std::span<const LabeledSample> test) {
  if (test.empty()) throw Error(ErrorCode::EmptyTestSet, "test set is empty");
  std::vector<int> predicted;
  std::vector<int> truth;
  std::vector<double> scores;
  for (const auto& s : test) {
    predicted.push_back(predict_label(model, s.features));
    scores.push_back(predict_probability(model, s.features));
    truth.push_back(s.label);
  }

  EvalReport report;
  report.kind = kind_of(model);
  report.confusion = confusion(predicted, truth);
  report.accuracy = accuracy(report.confusion);
  report.precision = precision(report.confusion);
  report.recall = recall(report.confusion);
  report.f1 = f1(report.confusion);
  const bool both = std::count(truth.begin(), truth.end(), kFire) > 0 &&
                    std::count(truth.begin(), truth.end(), kNotFire) > 0;
  if (both) {
    report.roc = roc_curve(scores, truth);
    report.auc = auc(report.roc);
  }
  return report;
}

ModelKind select_model(std::span<const EvalReport> reports) {
  if (reports.empty()) throw Error(ErrorCode::EmptyInput, "no reports to select from");
  auto preference = [](ModelKind kind) {
    switch (kind) {
      case ModelKind::Svm: return 2;
      case ModelKind::RandomForest: return 1;
      case ModelKind::LogisticRegression: return 0;
    }
    return -1;
  };
  auto better = [&](const EvalReport& a, const EvalReport& b) {
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    if (a.f1 != b.f1) return a.f1 > b.f1;
    return preference(a.kind) > preference(b.kind);
  };
  const EvalReport* best = &reports.front();
  for (const auto& r : reports) {
    if (better(r, *best)) best = &r;
  }
  return best->kind;
}

std::string report_to_json(const EvalReport& report, int indent) {
  return detail::dump_canonical(detail::report_json(report), indent);
}

EvalReport report_from_json(const std::string& text) { return detail::report_from(detail::parse_document(text)); }

std::string render_table(std::span<const EvalReport> reports) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-20s %10s %10s %10s %10s %10s\n", "Model", "Accuracy", "Precision", "Recall",
                "F1 Score", "AUC");
  out << line;
  for (const auto& r : reports) {
    char auc_text[32] = "n/a";
    if (r.auc) std::snprintf(auc_text, sizeof(auc_text), "%.4f", *r.auc);
    std::snprintf(line, sizeof(line), "%-20s %10.2f %10.4f %10.4f %10.4f %10s\n",
                  std::string(model_kind_display(r.kind)).c_str(), r.accuracy * 100.0, r.precision, r.recall, r.f1,
                  auc_text);
    out << line;
  }
  return out.str();
}

}  // namespace greenshield
