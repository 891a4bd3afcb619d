#ifndef WELDOPT_TREE_HPP
#define WELDOPT_TREE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "weldopt/dataset.hpp"
#include "weldopt/error.hpp"
#include "weldopt/rng.hpp"

namespace weldopt::cart {

struct TreeConfig {
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_leaf = 1;
  double min_impurity_decrease = 0.0;  // variance units, node-local
};

/// Growth knobs used by the ensembles on top of TreeConfig.
struct GrowOptions {
  std::size_t features_per_split = 0;  // 0 = all features
  std::uint64_t seed = 0;              // drives feature subsampling
  double leaf_l2 = 0.0;                // leaf value = sum / (count + leaf_l2)
};

/// A node of a fitted tree. Children are indices into RegressionTree::nodes(); samples with
/// x[feature] <= threshold go left.
struct TreeNode {
  bool leaf = true;
  double value = 0.0;   // leaf prediction; for internal nodes the node's own leaf value
  std::size_t samples = 0;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity_decrease = 0.0;  // parent variance - weighted child variance
  std::size_t left = 0;
  std::size_t right = 0;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Row-major feature matrix plus response, borrowed.
struct SampleView {
  std::span<const double> x;
  std::span<const double> y;
  std::size_t cols = 0;

  std::size_t rows() const { return y.size(); }
  double feature(std::size_t row, std::size_t col) const { return x[row * cols + col]; }
};

class RegressionTree {
 public:
  RegressionTree() = default;
  RegressionTree(std::vector<TreeNode> nodes, std::size_t arity)
      : nodes_(std::move(nodes)), arity_(arity) {}

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t arity() const noexcept { return arity_; }

  double predict(std::span<const double> x) const {
    if (x.size() != arity_) {
      throw argument_error("predict: expected " + std::to_string(arity_) + " features, got " +
                           std::to_string(x.size()));
    }
    std::size_t i = 0;
    while (!nodes_[i].leaf) {
      const TreeNode& n = nodes_[i];
      i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes_[i].value;
  }

  std::size_t leaf_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.leaf; }));
  }
  std::size_t internal_count() const { return nodes_.size() - leaf_count(); }

  std::size_t depth() const { return depth_below(0); }

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  std::size_t depth_below(std::size_t i) const {
    const TreeNode& n = nodes_[i];
    if (n.leaf) return 0;
    return 1 + std::max(depth_below(n.left), depth_below(n.right));
  }

  std::vector<TreeNode> nodes_;
  std::size_t arity_ = 0;
};

/// Best variance-reduction split of one node.
struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double child_sse = 0.0;  // SSE(left) + SSE(right)
  std::size_t left_count = 0;
};

/// Two candidate splits whose child SSE differ by less than this fraction of the parent SSE are
/// tied; the earlier one (lower feature, then lower threshold) wins.
inline constexpr double kSplitTieTolerance = 1e-10;
/// A split must remove more than this fraction of the parent SSE.
inline constexpr double kMinRelativeDecrease = 1e-12;

namespace detail {

inline double node_sse(const SampleView& s, std::span<const std::size_t> idx, double mean) {
  double sse = 0.0;
  for (std::size_t i : idx) sse += (s.y[i] - mean) * (s.y[i] - mean);
  return sse;
}

inline double node_mean(const SampleView& s, std::span<const std::size_t> idx) {
  double sum = 0.0;
  for (std::size_t i : idx) sum += s.y[i];
  return sum / static_cast<double>(idx.size());
}

inline double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

}  // namespace detail

/// Exhaustive search over `features` (ascending) and midpoints between consecutive distinct
/// values. Each child must keep at least `min_leaf` samples.
inline std::optional<Split> best_split(const SampleView& s, std::span<const std::size_t> idx,
                                       std::span<const std::size_t> features,
                                       std::size_t min_leaf, double parent_mean,
                                       double parent_sse) {
  const std::size_t n = idx.size();
  std::optional<Split> best;
  std::vector<std::pair<double, double>> sorted(n);  // (feature value, centred response)
  for (std::size_t f : features) {
    for (std::size_t k = 0; k < n; ++k) {
      sorted[k] = {s.feature(idx[k], f), s.y[idx[k]] - parent_mean};
    }
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    double total_sum = 0.0, total_sq = 0.0;
    for (const auto& [xv, c] : sorted) {
      total_sum += c;
      total_sq += c * c;
    }
    double left_sum = 0.0, left_sq = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      left_sum += sorted[k].second;
      left_sq += sorted[k].second * sorted[k].second;
      if (sorted[k].first == sorted[k + 1].first) continue;
      const std::size_t nl = k + 1;
      const std::size_t nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      const double right_sum = total_sum - left_sum;
      const double right_sq = total_sq - left_sq;
      const double sse_l = std::max(0.0, left_sq - left_sum * left_sum / static_cast<double>(nl));
      const double sse_r = std::max(0.0, right_sq - right_sum * right_sum / static_cast<double>(nr));
      const double child = sse_l + sse_r;
      if (!best || child < best->child_sse - kSplitTieTolerance * parent_sse) {
        best = Split{f, detail::midpoint(sorted[k].first, sorted[k + 1].first), child, nl};
      }
    }
  }
  return best;
}

namespace detail {

class TreeGrower {
 public:
  TreeGrower(const SampleView& s, const TreeConfig& cfg, const GrowOptions& opt)
      : s_(s), cfg_(cfg), opt_(opt), rng_(opt.seed) {
    const std::size_t m = opt.features_per_split;
    if (m > s.cols) throw argument_error("features_per_split exceeds feature count");
    if (cfg.min_samples_leaf == 0) throw argument_error("min_samples_leaf must be >= 1");
    if (cfg.min_impurity_decrease < 0.0) throw argument_error("min_impurity_decrease must be >= 0");
    if (opt.leaf_l2 < 0.0) throw argument_error("leaf L2 penalty must be >= 0");
  }

  std::vector<TreeNode> grow(std::vector<std::size_t> idx) {
    grow_node(std::move(idx), 0);
    return std::move(nodes_);
  }

 private:
  std::size_t grow_node(std::vector<std::size_t> idx, std::size_t depth) {
    const std::size_t id = nodes_.size();
    nodes_.emplace_back();
    const std::size_t n = idx.size();
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i : idx) {
      sum += s_.y[i];
      sum_sq += s_.y[i] * s_.y[i];
    }
    const double mean = sum / static_cast<double>(n);
    const double sse = node_sse(s_, idx, mean);
    nodes_[id].samples = n;
    nodes_[id].value = sum / (static_cast<double>(n) + opt_.leaf_l2);

    const bool depth_ok = cfg_.max_depth == 0 || depth < cfg_.max_depth;
    const bool size_ok = n >= 2 * cfg_.min_samples_leaf;
    const bool spread_ok = sse > 1e-20 * sum_sq;
    if (!(depth_ok && size_ok && spread_ok)) return id;

    const auto features = candidate_features();
    const auto split = best_split(s_, idx, features, cfg_.min_samples_leaf, mean, sse);
    if (!split) return id;
    const double decrease = sse - split->child_sse;
    if (!(decrease > kMinRelativeDecrease * sse)) return id;
    const double variance_decrease = decrease / static_cast<double>(n);
    if (variance_decrease < cfg_.min_impurity_decrease) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) {
      (s_.feature(i, split->feature) <= split->threshold ? left : right).push_back(i);
    }
    idx = {};
    nodes_[id].leaf = false;
    nodes_[id].feature = split->feature;
    nodes_[id].threshold = split->threshold;
    nodes_[id].impurity_decrease = variance_decrease;
    const std::size_t l = grow_node(std::move(left), depth + 1);
    const std::size_t r = grow_node(std::move(right), depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  // Partial Fisher-Yates draw of m features, searched in ascending order.
  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> all(s_.cols);
    std::iota(all.begin(), all.end(), std::size_t{0});
    const std::size_t m = opt_.features_per_split;
    if (m == 0 || m >= s_.cols) return all;
    for (std::size_t i = 0; i < m; ++i) {
      std::swap(all[i], all[i + rng_.below(s_.cols - i)]);
    }
    all.resize(m);
    std::sort(all.begin(), all.end());
    return all;
  }

  const SampleView& s_;
  TreeConfig cfg_;
  GrowOptions opt_;
  Rng rng_;
  std::vector<TreeNode> nodes_;
};

}  // namespace detail

/// CART regression tree grown on the rows listed in `indices` (duplicates allowed, as produced
/// by bootstrap resampling). Deterministic for fixed inputs.
inline RegressionTree fit_regression_tree(const SampleView& s, std::vector<std::size_t> indices,
                                          const TreeConfig& cfg = {},
                                          const GrowOptions& opt = {}) {
  if (indices.empty()) throw argument_error("fit_regression_tree: no samples");
  if (s.cols == 0 || s.x.size() != s.rows() * s.cols) {
    throw argument_error("fit_regression_tree: feature matrix shape mismatch");
  }
  for (std::size_t i : indices) {
    if (i >= s.rows()) throw argument_error("fit_regression_tree: sample index out of range");
  }
  detail::TreeGrower grower(s, cfg, opt);
  return RegressionTree(grower.grow(std::move(indices)), s.cols);
}

inline RegressionTree fit_regression_tree(const SampleView& s, const TreeConfig& cfg = {},
                                          const GrowOptions& opt = {}) {
  std::vector<std::size_t> all(s.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return fit_regression_tree(s, std::move(all), cfg, opt);
}

inline RegressionTree fit_regression_tree(const Dataset& d, const TreeConfig& cfg = {}) {
  const auto x = d.feature_matrix();
  const auto y = d.responses();
  return fit_regression_tree(SampleView{x, y, d.arity()}, cfg);
}

inline double predict_tree(const RegressionTree& t, std::span<const double> x) {
  return t.predict(x);
}

// ---------------------------------------------------------------------------------------------
// Export

enum class ExportFormat { text, graph };

namespace detail {

inline std::string fmt_number(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline std::string feature_label(const std::vector<std::string>& names, std::size_t f) {
  return f < names.size() ? names[f] : "x" + std::to_string(f);
}

inline void export_text_node(const RegressionTree& t, std::size_t i,
                             const std::vector<std::string>& names, std::size_t indent,
                             std::string& out) {
  const TreeNode& n = t.nodes()[i];
  out.append(2 * indent, ' ');
  if (n.leaf) {
    out += "value = " + fmt_number(n.value) + " (n=" + std::to_string(n.samples) + ")\n";
    return;
  }
  out += "if " + feature_label(names, n.feature) + " <= " + fmt_number(n.threshold) +
         " (n=" + std::to_string(n.samples) + ", decrease=" + fmt_number(n.impurity_decrease) +
         ")\n";
  export_text_node(t, n.left, names, indent + 1, out);
  export_text_node(t, n.right, names, indent + 1, out);
}

}  // namespace detail

/// text: one line per node, children indented under their rule, left (<=) child first.
/// graph: Graphviz DOT digraph, nodes numbered in depth-first order.
inline std::string export_tree(const RegressionTree& t, ExportFormat format,
                               const std::vector<std::string>& feature_names = {}) {
  std::string out;
  if (format == ExportFormat::text) {
    detail::export_text_node(t, 0, feature_names, 0, out);
    return out;
  }
  out += "digraph tree {\n";
  for (std::size_t i = 0; i < t.nodes().size(); ++i) {
    const TreeNode& n = t.nodes()[i];
    out += "  n" + std::to_string(i) + " [label=\"";
    if (n.leaf) {
      out += "value = " + detail::fmt_number(n.value) + "\\nn = " + std::to_string(n.samples) +
             "\", shape=box];\n";
    } else {
      out += detail::feature_label(feature_names, n.feature) + " <= " +
             detail::fmt_number(n.threshold) + "\\nn = " + std::to_string(n.samples) + "\"];\n";
    }
  }
  for (std::size_t i = 0; i < t.nodes().size(); ++i) {
    const TreeNode& n = t.nodes()[i];
    if (n.leaf) continue;
    out += "  n" + std::to_string(i) + " -> n" + std::to_string(n.left) + " [label=\"yes\"];\n";
    out += "  n" + std::to_string(i) + " -> n" + std::to_string(n.right) + " [label=\"no\"];\n";
  }
  out += "}\n";
  return out;
}

}  // namespace weldopt::cart

#endif  // WELDOPT_TREE_HPP
