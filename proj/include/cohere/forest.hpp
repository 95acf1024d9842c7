#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cohere/errors.hpp"
#include "cohere/rng.hpp"

namespace cohere {

// Axis-aligned decision tree with Gini splits; leaves keep class counts.
struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> class_counts;
};

class DecisionTree {
 public:
  void train(const std::vector<std::vector<double>>& X, const std::vector<int>& y, int n_classes,
             const std::vector<int>& sample, Rng& rng) {
    n_classes_ = n_classes;
    nodes_.clear();
    std::vector<int> indices = sample;
    grow(X, y, indices, rng);
  }

  const std::vector<double>& predict_counts(const std::vector<double>& x) const {
    int at = 0;
    while (nodes_[at].feature >= 0)
      at = x[nodes_[at].feature] <= nodes_[at].threshold ? nodes_[at].left : nodes_[at].right;
    return nodes_[at].class_counts;
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& mutable_nodes() { return nodes_; }
  void set_n_classes(int n) { n_classes_ = n; }

 private:
  int grow(const std::vector<std::vector<double>>& X, const std::vector<int>& y, std::vector<int>& idx,
           Rng& rng) {
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{});
    std::vector<double> counts(n_classes_, 0.0);
    for (int i : idx) counts[y[i]] += 1.0;
    nodes_[node_id].class_counts = counts;

    const int n = static_cast<int>(idx.size());
    int present = 0;
    for (double c : counts)
      if (c > 0) ++present;
    if (n < 2 || present < 2) return node_id;

    const int d = static_cast<int>(X[0].size());
    const int n_candidates = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d)))));

    // sample candidate features without replacement
    std::vector<int> features(d);
    std::iota(features.begin(), features.end(), 0);
    for (int i = 0; i < n_candidates && i < d; ++i) {
      const int j = i + static_cast<int>(rng.next_below(d - i));
      std::swap(features[i], features[j]);
    }

    const double parent_gini = gini(counts, n);
    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;

    std::vector<std::pair<double, int>> vals(n);
    for (int f = 0; f < n_candidates && f < d; ++f) {
      const int feat = features[f];
      for (int i = 0; i < n; ++i) vals[i] = {X[idx[i]][feat], y[idx[i]]};
      std::sort(vals.begin(), vals.end());
      std::vector<double> left(n_classes_, 0.0), right = nodes_[node_id].class_counts;
      int n_left = 0;
      for (int i = 0; i + 1 < n; ++i) {
        left[vals[i].second] += 1.0;
        right[vals[i].second] -= 1.0;
        ++n_left;
        if (vals[i].first == vals[i + 1].first) continue;
        const double threshold = 0.5 * (vals[i].first + vals[i + 1].first);
        const int n_right = n - n_left;
        const double g = (n_left * gini(left, n_left) + n_right * gini(right, n_right)) / n;
        const double gain = parent_gini - g;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = feat;
          best_threshold = threshold;
        }
      }
    }
    if (best_feature < 0) return node_id;

    std::vector<int> left_idx, right_idx;
    for (int i : idx)
      (X[i][best_feature] <= best_threshold ? left_idx : right_idx).push_back(i);
    if (left_idx.empty() || right_idx.empty()) return node_id;

    idx.clear();
    idx.shrink_to_fit();
    nodes_[node_id].feature = best_feature;
    nodes_[node_id].threshold = best_threshold;
    const int left_id = grow(X, y, left_idx, rng);
    nodes_[node_id].left = left_id;
    const int right_id = grow(X, y, right_idx, rng);
    nodes_[node_id].right = right_id;
    return node_id;
  }

  static double gini(const std::vector<double>& counts, int n) {
    if (n == 0) return 0.0;
    double g = 1.0;
    for (double c : counts) {
      const double p = c / n;
      g -= p * p;
    }
    return g;
  }

  int n_classes_ = 2;
  std::vector<TreeNode> nodes_;
};

// Seeded random forest: bootstrap per tree, sqrt(d) candidate features per
// split, unlimited depth, min-leaf 1. Prediction averages per-leaf class
// distributions; argmax ties break toward the smaller class index.
class RandomForest {
 public:
  void train(const std::vector<std::vector<double>>& X, const std::vector<int>& y, int n_classes,
             int n_trees, std::uint64_t seed) {
    if (X.empty() || X.size() != y.size()) throw DomainError("rf_train: empty or misaligned data");
    for (const auto& row : X)
      if (row.size() != X[0].size()) throw DomainError("rf_train: inconsistent dimensionality");
    n_classes_ = n_classes;
    n_features_ = static_cast<int>(X[0].size());
    seed_ = seed;
    trees_.assign(n_trees, DecisionTree{});
    const Rng master(seed);
    const int n = static_cast<int>(X.size());
    for (int t = 0; t < n_trees; ++t) {
      Rng tree_rng = master.child(static_cast<std::uint64_t>(t));
      std::vector<int> sample(n);
      for (int i = 0; i < n; ++i) sample[i] = static_cast<int>(tree_rng.next_below(n));
      trees_[t].train(X, y, n_classes, sample, tree_rng);
    }
  }

  std::vector<double> predict_dist(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != n_features_) throw DomainError("rf_predict: dimension mismatch");
    std::vector<double> dist(n_classes_, 0.0);
    for (const auto& tree : trees_) {
      const auto& counts = tree.predict_counts(x);
      double total = 0.0;
      for (double c : counts) total += c;
      for (int c = 0; c < n_classes_; ++c) dist[c] += counts[c] / total;
    }
    for (auto& p : dist) p /= static_cast<double>(trees_.size());
    return dist;
  }

  int predict(const std::vector<double>& x) const {
    const auto dist = predict_dist(x);
    int best = 0;
    for (int c = 1; c < n_classes_; ++c)
      if (dist[c] > dist[best]) best = c;
    return best;
  }

  int n_classes() const { return n_classes_; }
  int n_features() const { return n_features_; }
  std::size_t n_trees() const { return trees_.size(); }

  // Text dump sufficient for bit-identical reload (%.17g round-trips doubles).
  void save(std::ostream& out) const {
    out << "cohere-rf v1\n";
    out << n_classes_ << ' ' << n_features_ << ' ' << trees_.size() << ' ' << seed_ << '\n';
    out << std::setprecision(17);
    for (const auto& tree : trees_) {
      out << tree.nodes().size() << '\n';
      for (const auto& node : tree.nodes()) {
        out << node.feature << ' ' << node.threshold << ' ' << node.left << ' ' << node.right;
        out << ' ' << node.class_counts.size();
        for (double c : node.class_counts) out << ' ' << c;
        out << '\n';
      }
    }
  }

  void load(std::istream& in) {
    std::string magic, version;
    in >> magic >> version;
    if (magic != "cohere-rf" || version != "v1") throw ParseError("rf: bad checkpoint header");
    std::size_t n_trees = 0;
    in >> n_classes_ >> n_features_ >> n_trees >> seed_;
    trees_.assign(n_trees, DecisionTree{});
    for (auto& tree : trees_) {
      std::size_t n_nodes = 0;
      in >> n_nodes;
      tree.set_n_classes(n_classes_);
      auto& nodes = tree.mutable_nodes();
      nodes.resize(n_nodes);
      for (auto& node : nodes) {
        std::size_t nc = 0;
        in >> node.feature >> node.threshold >> node.left >> node.right >> nc;
        node.class_counts.resize(nc);
        for (auto& c : node.class_counts) in >> c;
      }
    }
    if (!in) throw ParseError("rf: truncated checkpoint");
  }

 private:
  int n_classes_ = 2;
  int n_features_ = 0;
  std::uint64_t seed_ = 0;
  std::vector<DecisionTree> trees_;
};

}  // namespace cohere
