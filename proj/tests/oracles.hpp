#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "greenshield/dataset.hpp"
#include "greenshield/models.hpp"
#include "greenshield/pipeline.hpp"
#include "greenshield/random.hpp"

namespace oracle {

/// Pairwise ranking statistic: P(score_pos > score_neg) + 0.5 P(tie).
inline double mann_whitney(std::span<const double> scores, std::span<const int> truth) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (truth[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (truth[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

struct Recount {
  double accuracy, precision, recall, f1;
};

/// Metrics straight from (pred, truth) pairs without a confusion matrix.
inline Recount brute_force_metrics(std::span<const int> pred, std::span<const int> truth) {
  double correct = 0, predicted_pos = 0, actual_pos = 0, true_pos = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == truth[i]) correct += 1;
    if (pred[i] == 1) predicted_pos += 1;
    if (truth[i] == 1) actual_pos += 1;
    if (pred[i] == 1 && truth[i] == 1) true_pos += 1;
  }
  Recount r{};
  r.accuracy = correct / static_cast<double>(pred.size());
  r.precision = predicted_pos == 0 ? 0.0 : true_pos / predicted_pos;
  r.recall = actual_pos == 0 ? 0.0 : true_pos / actual_pos;
  r.f1 = r.precision + r.recall == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

/// Two-pass population mean and variance.
inline std::pair<double, double> two_pass(std::span<const double> xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, ss / static_cast<double>(xs.size())};
}

/// Central finite-difference gradient of `f` at `theta`.
template <class F, std::size_t N>
std::array<double, N> finite_difference(F f, std::array<double, N> theta, double h) {
  std::array<double, N> grad{};
  for (std::size_t k = 0; k < N; ++k) {
    auto plus = theta;
    auto minus = theta;
    plus[k] += h;
    minus[k] -= h;
    grad[k] = (f(plus) - f(minus)) / (2.0 * h);
  }
  return grad;
}

inline double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// Classifies with the generator's true class-conditional densities.
inline int bayes_label(const greenshield::FeatureVector& x) {
  auto log_density = [&](const greenshield::ClassCluster& c) {
    return normal_log_pdf(x.temp, c.temp.mean, c.temp.sd) + normal_log_pdf(x.rh, c.rh.mean, c.rh.sd) +
           normal_log_pdf(x.oxy, c.oxy.mean, c.oxy.sd);
  };
  return log_density(greenshield::kFireCluster) >= log_density(greenshield::kNotFireCluster) ? 1 : 0;
}

/// Two tight clusters around +/-(2,2,2) (uniform in a ball of radius 0.5),
/// offset into valid sensor ranges. Linearly separable by construction.
inline std::vector<greenshield::LabeledSample> separable_clusters(std::size_t n, std::uint64_t seed) {
  greenshield::Rng rng(seed);
  std::vector<greenshield::LabeledSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = i % 2 == 0 ? 1 : 0;
    const double sign = label == 1 ? 1.0 : -1.0;
    std::array<double, 3> p{};
    double norm = 0.0;
    do {
      for (auto& c : p) c = 2.0 * rng.uniform() - 1.0;
      norm = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    } while (norm > 1.0);
    for (auto& c : p) c = 2.0 * sign + 0.5 * c;
    out.push_back({{30.0 + p[0], 50.0 + p[1], 21.0 + p[2]}, label});
  }
  return out;
}

/// Four clusters on the corners of a square in (temp, rh): fire where the
/// corner signs agree. Not linearly separable.
inline std::vector<greenshield::LabeledSample> xor_clusters(std::size_t n, std::uint64_t seed) {
  greenshield::Rng rng(seed);
  std::vector<greenshield::LabeledSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = (i % 2 == 0) ? 1.0 : -1.0;
    const double b = (i / 2 % 2 == 0) ? 1.0 : -1.0;
    const int label = a * b > 0 ? 1 : 0;
    out.push_back({{30.0 + 5.0 * a + rng.normal(0.0, 0.8), 50.0 + 10.0 * b + rng.normal(0.0, 1.6), 21.0}, label});
  }
  return out;
}

}  // namespace oracle
