#include <algorithm>
#include <cmath>
#include <numeric>

#include "greenshield/error.hpp"
#include "greenshield/models.hpp"

namespace greenshield {
namespace {

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;
};

TreeLeaf count_leaf(std::span<const int> y, std::span<const std::size_t> rows) {
  TreeLeaf leaf;
  for (auto r : rows) ++leaf.class_counts[y[r] == kFire ? 1 : 0];
  return leaf;
}

std::vector<std::size_t> draw_feature_subset(std::size_t size, Rng& rng) {
  std::vector<std::size_t> features(kNumFeatures);
  std::iota(features.begin(), features.end(), std::size_t{0});
  for (std::size_t i = 0; i < size; ++i) {
    std::swap(features[i], features[i + rng.index(kNumFeatures - i)]);
  }
  features.resize(size);
  std::sort(features.begin(), features.end());
  return features;
}

SplitChoice best_split(std::span<const Point> x, std::span<const int> y, std::vector<std::size_t> rows,
                       std::span<const std::size_t> features, const TreeLeaf& totals) {
  SplitChoice best;
  const double n = static_cast<double>(rows.size());
  for (auto f : features) {
    std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) { return x[a][f] < x[b][f]; });
    std::array<std::uint32_t, 2> left{};
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      ++left[y[rows[i]] == kFire ? 1 : 0];
      const double here = x[rows[i]][f];
      const double next = x[rows[i + 1]][f];
      if (!(here < next)) continue;
      const std::array<std::uint32_t, 2> right{totals.class_counts[0] - left[0],
                                               totals.class_counts[1] - left[1]};
      const double n_left = static_cast<double>(i + 1);
      const double impurity =
          (n_left * gini(left[0], left[1]) + (n - n_left) * gini(right[0], right[1])) / n;
      if (!best.found || impurity < best.impurity) {
        double threshold = here + (next - here) / 2.0;
        if (!(threshold < next)) threshold = here;
        best = {true, f, threshold, impurity};
      }
    }
  }
  return best;
}

class TreeBuilder {
 public:
  TreeBuilder(std::span<const Point> x, std::span<const int> y, const ForestConfig& cfg, Rng& rng)
      : x_(x), y_(y), cfg_(cfg), rng_(rng), subset_size_(static_cast<std::size_t>(resolve_feature_subset_size(cfg))) {}

  DecisionTree build(std::span<const std::size_t> rows) {
    grow(std::vector<std::size_t>(rows.begin(), rows.end()), 0);
    return std::move(tree_);
  }

 private:
  std::uint32_t grow(std::vector<std::size_t> rows, int depth) {
    const auto index = static_cast<std::uint32_t>(tree_.nodes.size());
    const TreeLeaf leaf = count_leaf(y_, rows);
    tree_.nodes.emplace_back(leaf);

    const bool pure = leaf.class_counts[0] == 0 || leaf.class_counts[1] == 0;
    if (pure || depth >= cfg_.max_depth || rows.size() < static_cast<std::size_t>(cfg_.min_samples_split)) {
      return index;
    }
    const auto features = draw_feature_subset(subset_size_, rng_);
    const SplitChoice choice = best_split(x_, y_, rows, features, leaf);
    if (!choice.found) return index;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (auto r : rows) {
      (x_[r][choice.feature] <= choice.threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const auto left = grow(std::move(left_rows), depth + 1);
    const auto right = grow(std::move(right_rows), depth + 1);
    tree_.nodes[index] = TreeSplit{choice.feature, choice.threshold, left, right};
    return index;
  }

  std::span<const Point> x_;
  std::span<const int> y_;
  const ForestConfig& cfg_;
  Rng& rng_;
  std::size_t subset_size_;
  DecisionTree tree_;
};

}  // namespace

double gini(std::uint32_t not_fire, std::uint32_t fire) {
  const double n = static_cast<double>(not_fire) + static_cast<double>(fire);
  if (n == 0.0) return 0.0;
  const double p0 = not_fire / n;
  const double p1 = fire / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

const TreeLeaf& DecisionTree::leaf_for(const Point& x) const {
  std::size_t at = 0;
  while (const auto* split = std::get_if<TreeSplit>(&nodes[at])) {
    at = x[split->feature] <= split->threshold ? split->left : split->right;
  }
  return std::get<TreeLeaf>(nodes[at]);
}

int DecisionTree::vote(const Point& x) const {
  const auto& counts = leaf_for(x).class_counts;
  return counts[1] >= counts[0] ? kFire : kNotFire;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  std::size_t deepest = 0;
  while (!stack.empty()) {
    auto [at, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (const auto* split = std::get_if<TreeSplit>(&nodes[at])) {
      stack.emplace_back(split->left, d + 1);
      stack.emplace_back(split->right, d + 1);
    }
  }
  return deepest;
}

int resolve_feature_subset_size(const ForestConfig& cfg) {
  if (cfg.feature_subset_size > 0) {
    return std::min(cfg.feature_subset_size, static_cast<int>(kNumFeatures));
  }
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(kNumFeatures))));
}

DecisionTree tree_build(std::span<const Point> x, std::span<const int> y,
                        std::span<const std::size_t> rows, const ForestConfig& cfg, Rng& rng) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "cannot build a tree from zero samples");
  return TreeBuilder(x, y, cfg, rng).build(rows);
}

std::vector<std::size_t> bootstrap_rows(std::size_t n, Rng& rng) {
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = rng.index(n);
  return rows;
}

ForestModel forest_train(std::span<const LabeledSample> train, const TrainConfig& cfg) {
  if (train.empty()) throw Error(ErrorCode::EmptyInput, "cannot train a forest on zero samples");
  if (cfg.forest.n_trees < 1) throw Error(ErrorCode::InvalidArgument, "n_trees must be >= 1");

  ForestModel model;
  model.n_trees = cfg.forest.n_trees;
  model.feature_subset_size = resolve_feature_subset_size(cfg.forest);
  model.seed = cfg.seed;
  model.scaler = fit_scaler(train);

  std::vector<Point> x;
  std::vector<int> y;
  for (const auto& s : train) {
    x.push_back(apply_scaler(model.scaler, s.features));
    y.push_back(s.label);
  }
  std::vector<std::size_t> all(train.size());
  std::iota(all.begin(), all.end(), std::size_t{0});

  Rng rng(cfg.seed);
  model.trees.reserve(static_cast<std::size_t>(cfg.forest.n_trees));
  for (int t = 0; t < cfg.forest.n_trees; ++t) {
    const auto rows = cfg.forest.bootstrap ? bootstrap_rows(train.size(), rng) : all;
    model.trees.push_back(tree_build(x, y, rows, cfg.forest, rng));
  }
  return model;
}

ForestVote aggregate_votes(std::span<const int> votes) {
  ForestVote result;
  if (votes.empty()) return result;
  result.fire_votes = static_cast<std::size_t>(std::count(votes.begin(), votes.end(), kFire));
  result.probability = static_cast<double>(result.fire_votes) / static_cast<double>(votes.size());
  result.label = 2 * result.fire_votes >= votes.size() ? kFire : kNotFire;
  return result;
}

ForestVote forest_predict(const ForestModel& m, const FeatureVector& x) {
  const Point scaled = apply_scaler(m.scaler, x);
  std::vector<int> votes;
  votes.reserve(m.trees.size());
  for (const auto& tree : m.trees) votes.push_back(tree.vote(scaled));
  return aggregate_votes(votes);
}

}  // namespace greenshield
