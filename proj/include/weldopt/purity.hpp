#ifndef WELDOPT_PURITY_HPP
#define WELDOPT_PURITY_HPP

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "weldopt/error.hpp"

// Class-purity measures used to score candidate splits: entropy, information gain, gain ratio
// and Gini impurity. The regression tree itself splits on variance reduction; these are the
// classification-side criteria.

namespace weldopt::cart {

/// Per-class sample counts.
class ClassDistribution {
 public:
  ClassDistribution() = default;
  explicit ClassDistribution(std::vector<std::size_t> counts) : counts_(std::move(counts)) {
    for (std::size_t c : counts_) total_ += c;
  }

  /// Counts of each distinct label, ordered by label value.
  static ClassDistribution from_labels(std::span<const int> labels) {
    std::map<int, std::size_t> tally;
    for (int l : labels) ++tally[l];
    std::vector<std::size_t> counts;
    for (const auto& [label, count] : tally) counts.push_back(count);
    return ClassDistribution(std::move(counts));
  }

  const std::vector<std::size_t>& counts() const noexcept { return counts_; }
  std::size_t total() const noexcept { return total_; }
  std::size_t classes() const noexcept { return counts_.size(); }

  std::vector<double> frequencies() const {
    std::vector<double> p;
    p.reserve(counts_.size());
    for (std::size_t c : counts_) {
      p.push_back(total_ == 0 ? 0.0 : static_cast<double>(c) / static_cast<double>(total_));
    }
    return p;
  }

 private:
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

/// -sum p_i log2 p_i, with 0 log2 0 = 0. Bits.
inline double entropy(const ClassDistribution& dist) {
  double h = 0.0;
  for (double p : dist.frequencies()) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

/// 1 - sum p_i^2.
inline double gini_impurity(const ClassDistribution& dist) {
  double sum_sq = 0.0;
  for (double p : dist.frequencies()) sum_sq += p * p;
  return dist.total() == 0 ? 0.0 : 1.0 - sum_sq;
}

/// A parent set split into K children. The parent is the class-wise sum of the children, so
/// child totals always add up to the parent total.
class SplitPartition {
 public:
  explicit SplitPartition(std::vector<ClassDistribution> children)
      : children_(std::move(children)) {
    std::size_t classes = 0;
    for (const auto& c : children_) classes = std::max(classes, c.classes());
    std::vector<std::size_t> parent(classes, 0);
    for (const auto& c : children_) {
      for (std::size_t k = 0; k < c.classes(); ++k) parent[k] += c.counts()[k];
    }
    parent_ = ClassDistribution(std::move(parent));
    if (parent_.total() == 0) throw argument_error("split partition has no samples");
  }

  /// Partition of `labels` by `child_of[i]` (child index of sample i).
  static SplitPartition from_labels(std::span<const int> labels,
                                    std::span<const std::size_t> child_of) {
    if (labels.size() != child_of.size()) {
      throw argument_error("labels and child assignments differ in length");
    }
    std::map<int, std::size_t> class_index;
    for (int l : labels) class_index.emplace(l, 0);
    std::size_t next = 0;
    for (auto& [label, idx] : class_index) idx = next++;
    std::size_t k = 0;
    for (std::size_t c : child_of) k = std::max(k, c + 1);
    std::vector<std::vector<std::size_t>> counts(k, std::vector<std::size_t>(next, 0));
    for (std::size_t i = 0; i < labels.size(); ++i) ++counts[child_of[i]][class_index[labels[i]]];
    std::vector<ClassDistribution> children;
    for (auto& c : counts) children.emplace_back(std::move(c));
    return SplitPartition(std::move(children));
  }

  const ClassDistribution& parent() const noexcept { return parent_; }
  const std::vector<ClassDistribution>& children() const noexcept { return children_; }

  /// w_j = |child j| / |parent|.
  std::vector<double> weights() const {
    std::vector<double> w;
    for (const auto& c : children_) {
      w.push_back(static_cast<double>(c.total()) / static_cast<double>(parent_.total()));
    }
    return w;
  }

 private:
  ClassDistribution parent_;
  std::vector<ClassDistribution> children_;
};

/// entropy(parent) - sum_j w_j entropy(child_j).
inline double information_gain(const SplitPartition& split) {
  const auto w = split.weights();
  double after = 0.0;
  for (std::size_t j = 0; j < w.size(); ++j) after += w[j] * entropy(split.children()[j]);
  return entropy(split.parent()) - after;
}

/// -sum_j w_j log2 w_j over non-empty children.
inline double split_info(const SplitPartition& split) {
  double s = 0.0;
  for (double w : split.weights()) {
    if (w > 0.0) s -= w * std::log2(w);
  }
  return s;
}

/// information_gain / split_info. Needs at least two non-empty children.
inline double gain_ratio(const SplitPartition& split) {
  std::size_t non_empty = 0;
  for (const auto& c : split.children()) non_empty += c.total() > 0 ? 1 : 0;
  if (non_empty < 2) {
    throw numerical_error("gain ratio undefined: split has fewer than two non-empty children");
  }
  return information_gain(split) / split_info(split);
}

}  // namespace weldopt::cart

#endif  // WELDOPT_PURITY_HPP
