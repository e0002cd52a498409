#include <algorithm>
#include <cmath>
#include <numeric>

#include "greenshield/error.hpp"
#include "greenshield/models.hpp"

namespace greenshield {
namespace {

double dot(const std::array<double, kNumFeatures>& a, const Point& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < kNumFeatures; ++j) s += a[j] * b[j];
  return s;
}

// Pegasos-style steps with eta_t = 1 / (lambda t), lambda = 1 / (C n). The
// bias is shrunk together with w, as if it were the weight of a constant
// feature; left unshrunk it keeps the huge first steps forever.
void train_linear(SvmModel& model, std::span<const Point> x, std::span<const int> y, const SvmConfig& cfg,
                  Rng& rng) {
  const std::size_t n = x.size();
  const double lambda = 1.0 / (cfg.C * static_cast<double>(n));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  auto& w = model.weights;
  double& b = model.bias;
  w.fill(0.0);
  b = 0.0;
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (auto i : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double yi = y[i];
      const bool violates = yi * (dot(w, x[i]) + b) < 1.0;
      for (auto& wj : w) wj *= 1.0 - eta * lambda;
      b *= 1.0 - eta * lambda;
      if (violates) {
        for (std::size_t j = 0; j < kNumFeatures; ++j) w[j] += eta * yi * x[i][j];
        b += eta * yi;
      }
    }
  }
}

// Simplified SMO: i sweeps the training set, j is drawn at random.
void train_rbf(SvmModel& model, std::span<const Point> x, std::span<const int> y, const SvmConfig& cfg,
               Rng& rng) {
  const std::size_t n = x.size();
  std::vector<double> kernel(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      kernel[i * n + j] = kernel[j * n + i] = rbf_kernel(x[i], x[j], model.gamma);
    }
  }
  auto k = [&](std::size_t i, std::size_t j) { return kernel[i * n + j]; };

  std::vector<double> alpha(n, 0.0);
  std::vector<double> f(n, 0.0);  // sum_k alpha_k y_k K(k, i), bias excluded
  double b = 0.0;
  const double C = cfg.C;

  int passes = 0;
  int sweeps = 0;
  while (passes < cfg.max_passes) {
    if (sweeps++ >= cfg.max_sweeps) {
      model.converged = false;
      break;
    }
    int changed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double yi = y[i];
      const double ei = f[i] + b - yi;
      if (!((yi * ei < -cfg.tol && alpha[i] < C) || (yi * ei > cfg.tol && alpha[i] > 0.0))) continue;

      std::size_t j = rng.index(n - 1);
      if (j >= i) ++j;
      const double yj = y[j];
      const double ej = f[j] + b - yj;
      const double ai_old = alpha[i];
      const double aj_old = alpha[j];

      double lo = 0.0;
      double hi = 0.0;
      if (yi != yj) {
        lo = std::max(0.0, aj_old - ai_old);
        hi = std::min(C, C + aj_old - ai_old);
      } else {
        lo = std::max(0.0, ai_old + aj_old - C);
        hi = std::min(C, ai_old + aj_old);
      }
      if (lo >= hi) continue;
      const double eta = 2.0 * k(i, j) - k(i, i) - k(j, j);
      if (eta >= 0.0) continue;

      double aj = std::clamp(aj_old - yj * (ei - ej) / eta, lo, hi);
      if (std::abs(aj - aj_old) < 1e-5) continue;
      double ai = ai_old + yi * yj * (aj_old - aj);
      ai = std::clamp(ai, 0.0, C);

      const double di = (ai - ai_old) * yi;
      const double dj = (aj - aj_old) * yj;
      const double b1 = b - ei - di * k(i, i) - dj * k(i, j);
      const double b2 = b - ej - di * k(i, j) - dj * k(j, j);
      if (ai > 0.0 && ai < C) {
        b = b1;
      } else if (aj > 0.0 && aj < C) {
        b = b2;
      } else {
        b = (b1 + b2) / 2.0;
      }
      alpha[i] = ai;
      alpha[j] = aj;
      for (std::size_t m = 0; m < n; ++m) f[m] += di * k(i, m) + dj * k(j, m);
      ++changed;
    }
    passes = changed == 0 ? passes + 1 : 0;
  }

  model.bias = b;
  for (std::size_t i = 0; i < n; ++i) {
    if (alpha[i] > 0.0) {
      model.support_vectors.push_back(x[i]);
      model.dual_coef.push_back(alpha[i] * y[i]);
    }
  }
}

}  // namespace

double rbf_kernel(const Point& u, const Point& v, double gamma) {
  double sq = 0.0;
  for (std::size_t j = 0; j < kNumFeatures; ++j) {
    const double d = u[j] - v[j];
    sq += d * d;
  }
  return std::exp(-gamma * sq);
}

double svm_decision_standardized(const SvmModel& m, const Point& x) {
  if (m.kernel == KernelType::Linear) return dot(m.weights, x) + m.bias;
  double d = m.bias;
  for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
    d += m.dual_coef[i] * rbf_kernel(m.support_vectors[i], x, m.gamma);
  }
  return d;
}

double svm_decision(const SvmModel& m, const FeatureVector& x) {
  return svm_decision_standardized(m, apply_scaler(m.scaler, x));
}

double svm_decision(const SvmModel& m, std::span<const double> x) {
  if (x.size() != kNumFeatures) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(kNumFeatures) +
                                                  " features, got " + std::to_string(x.size()));
  }
  return svm_decision(m, FeatureVector{x[0], x[1], x[2]});
}

int svm_label(double decision) { return decision >= 0.0 ? kFire : kNotFire; }

double svm_margin(const SvmModel& m) {
  if (m.kernel != KernelType::Linear) {
    throw Error(ErrorCode::NotLinearKernel, "margin is defined for the linear kernel only");
  }
  double sq = 0.0;
  for (double w : m.weights) sq += w * w;
  if (sq == 0.0) throw Error(ErrorCode::ZeroWeightVector, "weight vector is zero");
  return 2.0 / std::sqrt(sq);
}

double hinge_loss(int y, double d) {
  if (y != 1 && y != -1) throw Error(ErrorCode::InvalidLabel, "hinge loss label must be -1 or +1");
  return std::max(0.0, 1.0 - static_cast<double>(y) * d);
}

double fit_platt_slope(std::span<const double> decisions, std::span<const int> labels) {
  double n_pos = 0.0;
  for (int label : labels) n_pos += label == kFire ? 1.0 : 0.0;
  const double n_neg = static_cast<double>(labels.size()) - n_pos;
  const double hi_target = (n_pos + 1.0) / (n_pos + 2.0);
  const double lo_target = 1.0 / (n_neg + 2.0);

  // negative log-likelihood of p = 1 / (1 + exp(A d)) against the smoothed targets
  auto objective = [&](double a) {
    double total = 0.0;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
      const double t = labels[i] == kFire ? hi_target : lo_target;
      const double z = a * decisions[i];
      const double sp_pos = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      total += t * sp_pos + (1.0 - t) * (sp_pos - z);
    }
    return total;
  };

  double a = 0.0;
  double value = objective(a);
  for (int iter = 0; iter < 100; ++iter) {
    double grad = 0.0;
    double hess = 0.0;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
      const double t = labels[i] == kFire ? hi_target : lo_target;
      const double s = sigmoid(a * decisions[i]);
      grad += decisions[i] * (s - 1.0 + t);
      hess += decisions[i] * decisions[i] * s * (1.0 - s);
    }
    if (std::abs(grad) < 1e-10 || hess <= 0.0) break;
    double step = grad / (hess + 1e-12);
    double candidate = a - step;
    double candidate_value = objective(candidate);
    while (candidate_value > value && std::abs(step) > 1e-14) {
      step /= 2.0;
      candidate = a - step;
      candidate_value = objective(candidate);
    }
    if (candidate_value > value) break;
    const bool settled = std::abs(candidate - a) < 1e-12 * (1.0 + std::abs(a));
    a = candidate;
    value = candidate_value;
    if (settled) break;
  }
  // A must stay negative for p >= 0.5 to coincide with d >= 0.
  constexpr double kMaxSlope = -1e-6;
  return std::min(a, kMaxSlope);
}

double platt_probability(const SvmModel& m, double decision) {
  return sigmoid(-(m.platt_a * decision + m.platt_b));
}

SvmModel svm_train(std::span<const LabeledSample> train, const TrainConfig& cfg) {
  require_both_classes(train);
  if (cfg.svm.kernel == KernelType::Polynomial) {
    throw Error(ErrorCode::NotImplemented, "polynomial kernel is not implemented");
  }
  if (!(cfg.svm.C > 0.0)) throw Error(ErrorCode::InvalidArgument, "C must be positive");

  SvmModel model;
  model.kernel = cfg.svm.kernel;
  model.C = cfg.svm.C;
  model.gamma = cfg.svm.gamma > 0.0 ? cfg.svm.gamma : 1.0 / static_cast<double>(kNumFeatures);
  model.scaler = fit_scaler(train);

  std::vector<Point> x;
  std::vector<int> y;
  std::vector<int> labels;
  for (const auto& s : train) {
    x.push_back(apply_scaler(model.scaler, s.features));
    y.push_back(s.label == kFire ? 1 : -1);
    labels.push_back(s.label);
  }

  Rng rng(cfg.seed);
  if (model.kernel == KernelType::Linear) {
    train_linear(model, x, y, cfg.svm, rng);
  } else {
    train_rbf(model, x, y, cfg.svm, rng);
  }

  std::vector<double> decisions;
  decisions.reserve(x.size());
  for (const auto& p : x) decisions.push_back(svm_decision_standardized(model, p));
  model.platt_a = fit_platt_slope(decisions, labels);
  model.platt_b = 0.0;
  return model;
}

}  // namespace greenshield
