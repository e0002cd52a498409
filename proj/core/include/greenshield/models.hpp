#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "greenshield/dataset.hpp"
#include "greenshield/random.hpp"

namespace greenshield {

/// A standardized feature vector (output of apply_scaler).
using Point = std::array<double, kNumFeatures>;

inline constexpr int kFire = 1;
inline constexpr int kNotFire = 0;

enum class ModelKind { LogisticRegression, RandomForest, Svm };

/// Machine identifier: "logreg", "forest" or "svm".
std::string_view model_kind_id(ModelKind kind);
/// Human-readable row label used in evaluation tables.
std::string_view model_kind_display(ModelKind kind);
ModelKind parse_model_kind(std::string_view id);

enum class KernelType { Linear, Rbf, Polynomial };

std::string_view kernel_name(KernelType kernel);
KernelType parse_kernel(std::string_view name);

struct LogisticConfig {
  double learning_rate = 0.1;
  int max_iters = 5000;
  double tol = 1e-6;
};

struct ForestConfig {
  int n_trees = 100;
  int max_depth = 12;
  int min_samples_split = 2;
  int feature_subset_size = 0;  // 0 selects ceil(sqrt(n_features))
  bool bootstrap = true;        // false trains every tree on the full set
};

struct SvmConfig {
  double C = 1.0;
  KernelType kernel = KernelType::Rbf;
  double gamma = 0.0;    // 0 selects 1 / n_features
  int max_passes = 10;   // SMO: violation-free sweeps before stopping
  double tol = 1e-3;     // SMO: KKT tolerance
  int max_sweeps = 5000; // SMO: total sweep budget
  int epochs = 200;      // linear: passes over the shuffled training set
};

struct TrainConfig {
  std::uint64_t seed = 42;
  LogisticConfig logreg;
  ForestConfig forest;
  SvmConfig svm;
};

// ---------------------------------------------------------------------------
// Logistic regression

/// intercept followed by one coefficient per feature
using LogisticParams = std::array<double, kNumFeatures + 1>;

struct LogisticModel {
  double intercept = 0.0;
  std::array<double, kNumFeatures> coefficients{};
  ScalingParams scaler;
};

double sigmoid(double z);

double logreg_predict_proba(const LogisticModel& m, const FeatureVector& x);
/// Throws DimensionMismatch unless `x` has exactly kNumFeatures entries.
double logreg_predict_proba(const LogisticModel& m, std::span<const double> x);

/// Mean negative log-likelihood over standardized inputs.
double logreg_loss(const LogisticParams& theta, std::span<const Point> x, std::span<const int> y);
LogisticParams logreg_gradient(const LogisticParams& theta, std::span<const Point> x,
                               std::span<const int> y);

struct LogisticFit {
  LogisticParams theta{};
  std::vector<double> losses;  // loss before each step, plus the final loss
};

/// Full-batch gradient descent from theta = 0. Stops after max_iters steps or
/// once the loss decrease drops below tol.
LogisticFit logreg_fit(std::span<const Point> x, std::span<const int> y, const LogisticConfig& cfg);

/// Throws SingleClassInput, TooFewSamples or NonFiniteLoss.
LogisticModel logreg_train(std::span<const LabeledSample> train, const TrainConfig& cfg);

// ---------------------------------------------------------------------------
// Random forest

struct TreeLeaf {
  std::array<std::uint32_t, 2> class_counts{};  // [not fire, fire]
  friend bool operator==(const TreeLeaf&, const TreeLeaf&) = default;
};

/// Samples with x[feature] <= threshold go left.
struct TreeSplit {
  std::size_t feature = 0;
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  friend bool operator==(const TreeSplit&, const TreeSplit&) = default;
};

using TreeNode = std::variant<TreeLeaf, TreeSplit>;

/// Flat node array; the root is nodes[0].
struct DecisionTree {
  std::vector<TreeNode> nodes;

  const TreeLeaf& leaf_for(const Point& x) const;
  /// Majority class of the reached leaf; an even leaf votes fire.
  int vote(const Point& x) const;
  std::size_t depth() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

double gini(std::uint32_t not_fire, std::uint32_t fire);

/// Greedy CART on the rows listed in `rows` (duplicates allowed). Each node
/// searches a fresh random subset of features drawn from `rng`; candidate
/// thresholds are midpoints of consecutive distinct values. Ties keep the
/// lowest feature index, then the lowest threshold.
DecisionTree tree_build(std::span<const Point> x, std::span<const int> y,
                        std::span<const std::size_t> rows, const ForestConfig& cfg, Rng& rng);

struct ForestModel {
  std::vector<DecisionTree> trees;
  int n_trees = 0;
  int feature_subset_size = 0;
  std::uint64_t seed = 0;
  ScalingParams scaler;
};

struct ForestVote {
  int label = kNotFire;
  double probability = 0.0;
  std::size_t fire_votes = 0;
};

int resolve_feature_subset_size(const ForestConfig& cfg);

/// Draws `n` indices uniformly with replacement from [0, n).
std::vector<std::size_t> bootstrap_rows(std::size_t n, Rng& rng);

/// A single-class training set still trains; the forest then predicts that class.
ForestModel forest_train(std::span<const LabeledSample> train, const TrainConfig& cfg);

/// Majority vote with exact ties going to fire.
ForestVote aggregate_votes(std::span<const int> votes);
ForestVote forest_predict(const ForestModel& m, const FeatureVector& x);

// ---------------------------------------------------------------------------
// Support vector machine

struct SvmModel {
  KernelType kernel = KernelType::Linear;
  double gamma = 0.0;
  double C = 1.0;
  std::array<double, kNumFeatures> weights{};  // linear kernel
  std::vector<Point> support_vectors;           // rbf kernel
  std::vector<double> dual_coef;                // alpha_i * y_i per support vector
  double bias = 0.0;
  double platt_a = -1.0;
  double platt_b = 0.0;
  bool converged = true;
  ScalingParams scaler;
};

double rbf_kernel(const Point& u, const Point& v, double gamma);

double svm_decision_standardized(const SvmModel& m, const Point& x);
double svm_decision(const SvmModel& m, const FeatureVector& x);
double svm_decision(const SvmModel& m, std::span<const double> x);
/// fire iff d >= 0
int svm_label(double decision);

/// 2 / |w|. Throws NotLinearKernel or ZeroWeightVector.
double svm_margin(const SvmModel& m);

/// max(0, 1 - y d) with y in {-1, +1}; throws InvalidLabel otherwise.
double hinge_loss(int y, double d);

/// Fits the slope A of p = 1 / (1 + exp(A d + B)) with B pinned to 0, so that
/// p >= 0.5 exactly when d >= 0. Uses Platt's smoothed targets. The result is
/// always negative.
double fit_platt_slope(std::span<const double> decisions, std::span<const int> labels);

double platt_probability(const SvmModel& m, double decision);

/// Linear: stochastic subgradient descent on the primal hinge objective.
/// Rbf: simplified SMO on the dual. Throws SingleClassInput, NotImplemented.
SvmModel svm_train(std::span<const LabeledSample> train, const TrainConfig& cfg);

// ---------------------------------------------------------------------------

using FireModel = std::variant<LogisticModel, ForestModel, SvmModel>;

ModelKind kind_of(const FireModel& m);
const ScalingParams& scaler_of(const FireModel& m);

/// Probability of fire in [0, 1] for raw (unscaled) input.
double predict_probability(const FireModel& m, const FeatureVector& x);
/// The model's own decision rule: p >= 0.5, vote majority or sign(d).
int predict_label(const FireModel& m, const FeatureVector& x);

/// Throws SingleClassInput when `samples` lacks either class.
void require_both_classes(std::span<const LabeledSample> samples);

}  // namespace greenshield
