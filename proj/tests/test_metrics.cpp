#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <json.hpp>
#include <vector>

#include "greenshield/error.hpp"
#include "greenshield/metrics.hpp"
#include "oracles.hpp"

using namespace greenshield;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::Io;
}

EvalReport report(ModelKind kind, double acc, double f) {
  EvalReport r;
  r.kind = kind;
  r.accuracy = acc;
  r.f1 = f;
  return r;
}

}  // namespace

TEST_CASE("confusion counts") {
  const std::vector<int> pred{1, 1, 0, 0, 1, 0};
  const std::vector<int> truth{1, 0, 0, 1, 1, 0};
  const auto c = confusion(pred, truth);
  CHECK(c == ConfusionMatrix{2, 2, 1, 1});
  CHECK(c.total() == 6);

  const std::vector<int> shorter{1};
  CHECK(code_of([&] { confusion(shorter, truth); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([] { confusion({}, {}); }) == ErrorCode::EmptyInput);
}

TEST_CASE("metric reference values") {
  // 45 tp, 45 tn, 5 fp, 5 fn
  const ConfusionMatrix c{45, 45, 5, 5};
  CHECK(accuracy(c) == 0.9);
  CHECK(precision(c) == 0.9);
  CHECK(recall(c) == 0.9);

  const ConfusionMatrix d{3, 0, 1, 3};
  CHECK(precision(d) == 0.75);
  CHECK(recall(d) == 0.5);
  CHECK(f1(d) == doctest::Approx(0.6).epsilon(1e-15));

  const ConfusionMatrix e{2, 0, 2, 0};
  CHECK(f1(e) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  const ConfusionMatrix nothing_predicted{0, 5, 0, 5};
  CHECK(precision(nothing_predicted) == 0.0);
  CHECK(f1(nothing_predicted) == 0.0);
  CHECK(recall(ConfusionMatrix{0, 5, 5, 0}) == 0.0);
}

TEST_CASE("metrics agree with a direct recount on random label vectors") {
  Rng rng(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.index(50);
    std::vector<int> pred(n), truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = static_cast<int>(rng.index(2));
      truth[i] = static_cast<int>(rng.index(2));
    }
    const auto c = confusion(pred, truth);
    const auto r = oracle::brute_force_metrics(pred, truth);
    CHECK(c.total() == n);
    CHECK(accuracy(c) == r.accuracy);
    CHECK(precision(c) == r.precision);
    CHECK(recall(c) == r.recall);
    CHECK(f1(c) == r.f1);
  }
}

TEST_CASE("roc curve vertices") {
  const std::vector<double> scores{0.9, 0.8, 0.7, 0.6};
  const std::vector<int> truth{1, 0, 1, 0};
  const auto curve = roc_curve(scores, truth);
  REQUIRE(curve.points.size() == 5);
  CHECK(curve.points[0].fpr == 0.0);
  CHECK(curve.points[0].tpr == 0.0);
  CHECK(std::isinf(curve.points[0].threshold));
  CHECK(curve.points[1].tpr == 0.5);
  CHECK(curve.points[1].threshold == 0.9);
  CHECK(curve.points[2].fpr == 0.5);
  CHECK(curve.points[4].fpr == 1.0);
  CHECK(curve.points[4].tpr == 1.0);
  CHECK(auc(curve) == 0.75);

  const std::vector<int> perfect{1, 1, 0, 0};
  CHECK(auc(roc_curve(scores, perfect)) == 1.0);
  const std::vector<int> inverted{0, 0, 1, 1};
  CHECK(auc(roc_curve(scores, inverted)) == 0.0);
}

TEST_CASE("tied scores move as one block") {
  const std::vector<double> scores{0.5, 0.5, 0.5, 0.5};
  const std::vector<int> truth{1, 0, 1, 0};
  const auto curve = roc_curve(scores, truth);
  REQUIRE(curve.points.size() == 2);
  CHECK(auc(curve) == 0.5);
}

TEST_CASE("roc error paths") {
  const std::vector<double> scores{0.1, 0.2};
  const std::vector<int> same{1, 1};
  CHECK(code_of([&] { roc_curve(scores, same); }) == ErrorCode::SingleClassTruth);
  const std::vector<int> longer{1, 0, 1};
  CHECK(code_of([&] { roc_curve(scores, longer); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("auc equals the Mann-Whitney statistic") {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(80);
    std::vector<double> scores(n);
    std::vector<int> truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse grid so that ties are common.
      scores[i] = static_cast<double>(rng.index(20)) / 20.0;
      truth[i] = static_cast<int>(rng.index(2));
    }
    truth[0] = 1;
    truth[1] = 0;
    CHECK(std::abs(auc(roc_curve(scores, truth)) - oracle::mann_whitney(scores, truth)) <= 1e-12);
  }
}

TEST_CASE("auc is invariant under strictly increasing transforms") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 40;
    std::vector<double> scores(n), cubed(n), affine(n);
    std::vector<int> truth(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.index(100)) / 100.0;
      cubed[i] = scores[i] * scores[i] * scores[i];
      affine[i] = 2.0 * scores[i] + 7.0;
      truth[i] = static_cast<int>(i % 2);
    }
    const double base = auc(roc_curve(scores, truth));
    CHECK(auc(roc_curve(cubed, truth)) == base);
    CHECK(auc(roc_curve(affine, truth)) == base);
  }
}

TEST_CASE("select_model ranks by accuracy, then F1, then a fixed order") {
  std::vector<EvalReport> table{report(ModelKind::LogisticRegression, 0.89, 0.88),
                                report(ModelKind::RandomForest, 0.93, 0.89),
                                report(ModelKind::Svm, 0.93, 0.93)};
  CHECK(select_model(table) == ModelKind::Svm);
  std::reverse(table.begin(), table.end());
  CHECK(select_model(table) == ModelKind::Svm);
  std::swap(table[0], table[1]);
  CHECK(select_model(table) == ModelKind::Svm);

  const std::vector<EvalReport> tie{report(ModelKind::LogisticRegression, 0.9, 0.9),
                                    report(ModelKind::RandomForest, 0.9, 0.9)};
  CHECK(select_model(tie) == ModelKind::RandomForest);
  const std::vector<EvalReport> all_tied{report(ModelKind::RandomForest, 0.9, 0.9),
                                         report(ModelKind::Svm, 0.9, 0.9),
                                         report(ModelKind::LogisticRegression, 0.9, 0.9)};
  CHECK(select_model(all_tied) == ModelKind::Svm);
  const std::vector<EvalReport> accuracy_first{report(ModelKind::Svm, 0.91, 0.99),
                                               report(ModelKind::LogisticRegression, 0.92, 0.5)};
  CHECK(select_model(accuracy_first) == ModelKind::LogisticRegression);
}

TEST_CASE("a constant fire predictor on a balanced test set") {
  LogisticModel constant;
  constant.scaler.stddev = {1, 1, 1};
  std::vector<LabeledSample> test;
  for (int i = 0; i < 20; ++i) test.push_back({{20.0 + i, 50, 21}, i % 2});
  const auto r = evaluate(constant, test);
  CHECK(r.accuracy == 0.5);
  CHECK(r.recall == 1.0);
  CHECK(r.precision == 0.5);
  REQUIRE(r.auc.has_value());
  CHECK(*r.auc == 0.5);
}

TEST_CASE("evaluate without both classes omits auc") {
  LogisticModel constant;
  constant.scaler.stddev = {1, 1, 1};
  std::vector<LabeledSample> test{{{20, 50, 21}, 1}, {{22, 50, 21}, 1}};
  const auto r = evaluate(constant, test);
  CHECK(r.accuracy == 1.0);
  CHECK_FALSE(r.auc.has_value());
  CHECK(code_of([&] { evaluate(constant, std::span<const LabeledSample>{}); }) == ErrorCode::EmptyTestSet);
}

TEST_CASE("report json schema and round trip") {
  LogisticModel constant;
  constant.scaler.stddev = {1, 1, 1};
  std::vector<LabeledSample> test;
  for (int i = 0; i < 6; ++i) test.push_back({{20.0 + i, 50, 21}, i % 2});
  const auto r = evaluate(constant, test);
  const auto text = report_to_json(r);
  const auto doc = nlohmann::json::parse(text);
  for (const char* key : {"kind", "confusion", "accuracy", "precision", "recall", "f1", "auc", "roc"}) {
    CHECK(doc.contains(key));
  }
  CHECK(doc["kind"] == "logreg");
  CHECK(doc["roc"][0]["threshold"].is_null());

  const auto back = report_from_json(text);
  CHECK(back.confusion == r.confusion);
  CHECK(back.accuracy == r.accuracy);
  CHECK(back.auc == r.auc);
  CHECK(back.roc.points.size() == r.roc.points.size());
  CHECK(report_to_json(back) == text);

  auto broken = doc;
  broken["accuracy"] = 1.5;
  CHECK(code_of([&] { report_from_json(broken.dump()); }) == ErrorCode::MalformedDocument);
  broken = doc;
  broken.erase("confusion");
  CHECK(code_of([&] { report_from_json(broken.dump()); }) == ErrorCode::MalformedDocument);
}

TEST_CASE("render_table layout") {
  std::vector<EvalReport> rows{report(ModelKind::LogisticRegression, 0.89, 0.88),
                               report(ModelKind::Svm, 0.93, 0.93)};
  rows[1].auc = 0.98765;
  const auto table = render_table(rows);
  CHECK(table.find("Model") != std::string::npos);
  CHECK(table.find("F1 Score") != std::string::npos);
  CHECK(table.find("Logistic Regression") != std::string::npos);
  CHECK(table.find("89.00") != std::string::npos);
  CHECK(table.find("0.9877") != std::string::npos);
}
