#include <cmath>

#include "greenshield/error.hpp"
#include "greenshield/models.hpp"

namespace greenshield {
namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double linear_term(const LogisticParams& theta, const Point& x) {
  double z = theta[0];
  for (std::size_t j = 0; j < kNumFeatures; ++j) z += theta[j + 1] * x[j];
  return z;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logreg_predict_proba(const LogisticModel& m, const FeatureVector& x) {
  const Point scaled = apply_scaler(m.scaler, x);
  LogisticParams theta{m.intercept, m.coefficients[0], m.coefficients[1], m.coefficients[2]};
  return sigmoid(linear_term(theta, scaled));
}

double logreg_predict_proba(const LogisticModel& m, std::span<const double> x) {
  if (x.size() != kNumFeatures) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(kNumFeatures) +
                                                  " features, got " + std::to_string(x.size()));
  }
  return logreg_predict_proba(m, FeatureVector{x[0], x[1], x[2]});
}

double logreg_loss(const LogisticParams& theta, std::span<const Point> x, std::span<const int> y) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = linear_term(theta, x[i]);
    total += softplus(z) - static_cast<double>(y[i]) * z;
  }
  return total / static_cast<double>(x.size());
}

LogisticParams logreg_gradient(const LogisticParams& theta, std::span<const Point> x,
                               std::span<const int> y) {
  LogisticParams grad{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double residual = sigmoid(linear_term(theta, x[i])) - static_cast<double>(y[i]);
    grad[0] += residual;
    for (std::size_t j = 0; j < kNumFeatures; ++j) grad[j + 1] += residual * x[i][j];
  }
  for (auto& g : grad) g /= static_cast<double>(x.size());
  return grad;
}

LogisticFit logreg_fit(std::span<const Point> x, std::span<const int> y, const LogisticConfig& cfg) {
  LogisticFit fit;
  double loss = logreg_loss(fit.theta, x, y);
  fit.losses.push_back(loss);
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const auto grad = logreg_gradient(fit.theta, x, y);
    for (std::size_t k = 0; k < grad.size(); ++k) fit.theta[k] -= cfg.learning_rate * grad[k];
    const double next = logreg_loss(fit.theta, x, y);
    if (!std::isfinite(next)) {
      throw Error(ErrorCode::NonFiniteLoss, "loss became non-finite at iteration " + std::to_string(iter));
    }
    fit.losses.push_back(next);
    const double decrease = loss - next;
    loss = next;
    if (decrease < cfg.tol) break;
  }
  return fit;
}

LogisticModel logreg_train(std::span<const LabeledSample> train, const TrainConfig& cfg) {
  if (train.size() < 2) throw Error(ErrorCode::TooFewSamples, "logistic regression needs at least 2 samples");
  require_both_classes(train);

  LogisticModel model;
  model.scaler = fit_scaler(train);
  std::vector<Point> x;
  std::vector<int> y;
  x.reserve(train.size());
  y.reserve(train.size());
  for (const auto& s : train) {
    x.push_back(apply_scaler(model.scaler, s.features));
    y.push_back(s.label);
  }
  const auto fit = logreg_fit(x, y, cfg.logreg);
  model.intercept = fit.theta[0];
  for (std::size_t j = 0; j < kNumFeatures; ++j) model.coefficients[j] = fit.theta[j + 1];
  return model;
}

}  // namespace greenshield
