#pragma once

// Least-squares regression tree, the weak learner under the boosting loop.
// Greedy top-down construction; exhaustive split search per node with a
// fixed tie-break so a dataset always yields the same tree.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace sectorcast {

struct TooFewSamples : std::runtime_error {
  TooFewSamples(std::size_t n, int min_leaf)
      : std::runtime_error("tree needs at least " + std::to_string(min_leaf) +
                           " samples, got " + std::to_string(n)) {}
};

struct TreeParams {
  int max_depth = 4;
  int min_leaf = 5;
};

// Internal nodes carry (feature, threshold); x[feature] <= threshold goes
// left. Leaves have feature -1 and a value.
struct TreeNode {
  int feature = -1;
  double threshold = 0;
  int left = -1;
  int right = -1;
  double value = 0;

  bool is_leaf() const { return feature < 0; }
};

class RegressionTree {
 public:
  double predict(const std::vector<double>& x) const {
    int i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
      const TreeNode& n = nodes_[static_cast<std::size_t>(i)];
      i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(i)].value;
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int depth() const { return depth_of(0); }

  // Reassembles a tree from a flattened node list (deserialization).
  static RegressionTree from_nodes(std::vector<TreeNode> nodes) {
    if (nodes.empty()) throw std::invalid_argument("tree needs at least one node");
    for (const TreeNode& n : nodes) {
      if (n.is_leaf()) continue;
      auto in_range = [&](int i) { return i >= 0 && i < static_cast<int>(nodes.size()); };
      if (!in_range(n.left) || !in_range(n.right))
        throw std::invalid_argument("tree node child out of range");
    }
    RegressionTree t;
    t.nodes_ = std::move(nodes);
    return t;
  }

  static RegressionTree fit(const std::vector<std::vector<double>>& features,
                            const std::vector<double>& targets, TreeParams params = {}) {
    if (features.size() != targets.size())
      throw std::invalid_argument("feature and target counts differ");
    if (params.min_leaf < 1) throw std::invalid_argument("min_leaf must be >= 1");
    if (targets.size() < static_cast<std::size_t>(params.min_leaf))
      throw TooFewSamples(targets.size(), params.min_leaf);

    // Sort once per feature; child nodes inherit order by stable partition,
    // so no further sorting happens during the build.
    const std::size_t dim = features.front().size();
    Orders orders(dim);
    for (std::size_t f = 0; f < dim; ++f) {
      auto& o = orders[f];
      o.resize(targets.size());
      std::iota(o.begin(), o.end(), 0u);
      std::sort(o.begin(), o.end(),
                [&](std::size_t a, std::size_t b) { return features[a][f] < features[b][f]; });
    }

    RegressionTree t;
    t.build(features, targets, std::move(orders), 0, params);
    return t;
  }

 private:
  // orders[f] lists this node's sample indices sorted by feature f.
  using Orders = std::vector<std::vector<std::size_t>>;

  struct Split {
    bool found = false;
    int feature = 0;
    double threshold = 0;
    // sum of per-child (sum y)^2 / n; larger means lower residual SSE
    double score = -std::numeric_limits<double>::infinity();
  };

  int depth_of(int i) const {
    const TreeNode& n = nodes_[static_cast<std::size_t>(i)];
    if (n.is_leaf()) return 0;
    return 1 + std::max(depth_of(n.left), depth_of(n.right));
  }

  int add_leaf(double value) {
    TreeNode n;
    n.value = value;
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  // Returns the index of the subtree root built over the samples in
  // `orders` (same sample set in every per-feature order).
  int build(const std::vector<std::vector<double>>& features, const std::vector<double>& targets,
            Orders orders, int depth, const TreeParams& params) {
    const std::size_t count = orders.front().size();
    const double n = static_cast<double>(count);
    double sum = 0;
    for (std::size_t i : orders.front()) sum += targets[i];
    const double mean = sum / n;

    if (depth >= params.max_depth || count < 2 * static_cast<std::size_t>(params.min_leaf))
      return add_leaf(mean);

    Split best = find_split(features, targets, orders, sum, params);
    // Splitting must strictly beat keeping the node whole; equality means
    // the children explain nothing extra.
    if (!best.found || best.score <= sum * sum / n) return add_leaf(mean);

    const std::size_t bf = static_cast<std::size_t>(best.feature);
    Orders left_orders(orders.size()), right_orders(orders.size());
    for (std::size_t f = 0; f < orders.size(); ++f) {
      for (std::size_t i : orders[f])
        (features[i][bf] <= best.threshold ? left_orders[f] : right_orders[f]).push_back(i);
      orders[f].clear();
      orders[f].shrink_to_fit();
    }

    int node = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[static_cast<std::size_t>(node)].feature = best.feature;
    nodes_[static_cast<std::size_t>(node)].threshold = best.threshold;
    int left = build(features, targets, std::move(left_orders), depth + 1, params);
    int right = build(features, targets, std::move(right_orders), depth + 1, params);
    nodes_[static_cast<std::size_t>(node)].left = left;
    nodes_[static_cast<std::size_t>(node)].right = right;
    return node;
  }

  Split find_split(const std::vector<std::vector<double>>& features,
                   const std::vector<double>& targets, const Orders& orders, double total,
                   const TreeParams& params) const {
    Split best;
    const std::size_t n = orders.front().size();

    for (std::size_t f = 0; f < orders.size(); ++f) {
      const auto& order = orders[f];
      double left_sum = 0;
      for (std::size_t cut = 1; cut < n; ++cut) {
        left_sum += targets[order[cut - 1]];
        double lo = features[order[cut - 1]][f];
        double hi = features[order[cut]][f];
        if (lo == hi) continue;  // not a boundary between distinct values
        if (cut < static_cast<std::size_t>(params.min_leaf) ||
            n - cut < static_cast<std::size_t>(params.min_leaf))
          continue;
        double right_sum = total - left_sum;
        double score = left_sum * left_sum / static_cast<double>(cut) +
                       right_sum * right_sum / static_cast<double>(n - cut);
        // Strict improvement keeps the first (lowest feature, lowest
        // threshold) candidate among score ties.
        if (score > best.score) {
          best.found = true;
          best.feature = static_cast<int>(f);
          best.threshold = lo + (hi - lo) / 2;
          best.score = score;
        }
      }
    }
    return best;
  }

  std::vector<TreeNode> nodes_;
};

}  // namespace sectorcast
