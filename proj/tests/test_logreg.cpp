#include <doctest.h>

#include <cmath>
#include <vector>

#include "greenshield/error.hpp"
#include "greenshield/models.hpp"
#include "greenshield/pipeline.hpp"
#include "oracles.hpp"

using namespace greenshield;

namespace {

LogisticModel identity_scaled(double intercept, std::array<double, 3> coef) {
  LogisticModel m;
  m.intercept = intercept;
  m.coefficients = coef;
  m.scaler.mean = {0, 0, 0};
  m.scaler.stddev = {1, 1, 1};
  return m;
}

std::vector<LabeledSample> one_dimensional_toy() {
  std::vector<LabeledSample> s;
  for (int i = 0; i < 50; ++i) {
    s.push_back({{-1.0, 0.0, 0.0}, 0});
    s.push_back({{1.0, 0.0, 0.0}, 1});
  }
  return s;
}

}  // namespace

TEST_CASE("logreg_predict_proba reference values") {
  CHECK(logreg_predict_proba(identity_scaled(0, {0, 0, 0}), FeatureVector{12, 34, 56}) == 0.5);
  CHECK(logreg_predict_proba(identity_scaled(2, {0, 0, 0}), FeatureVector{1, 2, 3}) ==
        doctest::Approx(0.880797077977882444).epsilon(1e-15));
  const double saturated = logreg_predict_proba(identity_scaled(30, {0, 0, 0}), FeatureVector{0, 0, 0});
  CHECK(saturated > 1.0 - 1e-12);
  CHECK(saturated <= 1.0);
}

TEST_CASE("logreg_predict_proba is monotone in the linear term") {
  const auto m = identity_scaled(0.3, {1.0, -0.5, 0.25});
  double previous = 0.0;
  for (double t = -40.0; t <= 40.0; t += 0.5) {
    const double p = logreg_predict_proba(m, FeatureVector{t, 0, 0});
    CHECK(p >= previous);
    previous = p;
  }
}

TEST_CASE("logreg_predict_proba rejects wrong dimensions") {
  const auto m = identity_scaled(0, {0, 0, 0});
  const std::vector<double> two{1.0, 2.0};
  CHECK_THROWS_AS(logreg_predict_proba(m, std::span<const double>(two)), Error);
  const std::vector<double> three{1.0, 2.0, 3.0};
  CHECK(logreg_predict_proba(m, std::span<const double>(three)) == 0.5);
}

TEST_CASE("loss on the 1-D toy set is minimized only by positive slopes") {
  // Grid search over the slope, intercept fixed at its symmetric optimum 0.
  std::vector<Point> x;
  std::vector<int> y;
  for (const auto& s : one_dimensional_toy()) {
    x.push_back(s.features.values());
    y.push_back(s.label);
  }
  double best_slope = 0.0;
  double best_loss = 1e300;
  for (double b1 = -5.0; b1 <= 5.0; b1 += 0.25) {
    const double loss = logreg_loss({0.0, b1, 0.0, 0.0}, x, y);
    if (loss < best_loss) {
      best_loss = loss;
      best_slope = b1;
    }
  }
  CHECK(best_slope > 0.0);

  TrainConfig cfg;
  const auto model = logreg_train(one_dimensional_toy(), cfg);
  CHECK(model.coefficients[0] > 0.0);
}

TEST_CASE("flipping every label negates the learned parameters") {
  const auto data = select_features(generate_dataset(200, 5));
  auto flipped = data;
  for (auto& s : flipped) s.label = 1 - s.label;
  TrainConfig cfg;
  const auto a = logreg_train(data, cfg);
  const auto b = logreg_train(flipped, cfg);
  CHECK(a.intercept == doctest::Approx(-b.intercept).epsilon(1e-4));
  for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(a.coefficients[j] + b.coefficients[j]) < 1e-4);
}

TEST_CASE("analytic gradient matches central finite differences") {
  const auto data = select_features(generate_dataset(120, 11));
  const auto scaler = fit_scaler(data);
  std::vector<Point> x;
  std::vector<int> y;
  for (const auto& s : data) {
    x.push_back(apply_scaler(scaler, s.features));
    y.push_back(s.label);
  }
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    LogisticParams theta{};
    for (auto& t : theta) t = rng.normal(0.0, 2.0);
    const auto analytic = logreg_gradient(theta, x, y);
    const auto numeric =
        oracle::finite_difference([&](const LogisticParams& t) { return logreg_loss(t, x, y); }, theta, 1e-5);
    double diff = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      diff += (analytic[k] - numeric[k]) * (analytic[k] - numeric[k]);
      scale += numeric[k] * numeric[k];
    }
    CHECK(std::sqrt(diff) / std::max(std::sqrt(scale), 1e-12) < 1e-5);
  }
}

TEST_CASE("gradient descent never increases the loss at rates up to 0.1") {
  for (double rate : {0.01, 0.05, 0.1}) {
    const auto data = select_features(generate_dataset(300, 21));
    const auto scaler = fit_scaler(data);
    std::vector<Point> x;
    std::vector<int> y;
    for (const auto& s : data) {
      x.push_back(apply_scaler(scaler, s.features));
      y.push_back(s.label);
    }
    LogisticConfig cfg;
    cfg.learning_rate = rate;
    cfg.max_iters = 2000;
    const auto fit = logreg_fit(x, y, cfg);
    REQUIRE(fit.losses.size() > 2);
    for (std::size_t i = 1; i < fit.losses.size(); ++i) CHECK(fit.losses[i] <= fit.losses[i - 1]);
  }
}

TEST_CASE("logreg_train error paths") {
  TrainConfig cfg;
  std::vector<LabeledSample> one_class{{{20, 50, 21}, 1}, {{21, 50, 21}, 1}, {{22, 40, 20}, 1}};
  CHECK_THROWS_WITH_AS(logreg_train(one_class, cfg), doctest::Contains("both"), Error);

  auto data = select_features(generate_dataset(100, 2));
  cfg.logreg.learning_rate = 1e308;
  try {
    logreg_train(data, cfg);
    FAIL("expected NonFiniteLoss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteLoss);
  }
}

TEST_CASE("training is deterministic") {
  const auto data = select_features(generate_dataset(150, 9));
  TrainConfig cfg;
  const auto a = logreg_train(data, cfg);
  const auto b = logreg_train(data, cfg);
  CHECK(a.intercept == b.intercept);
  CHECK(a.coefficients == b.coefficients);
}
