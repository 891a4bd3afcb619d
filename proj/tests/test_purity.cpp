#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "weldopt/purity.hpp"
#include "weldopt/rng.hpp"

using namespace weldopt;
using namespace weldopt::cart;

namespace {

using Labels = std::vector<int>;

// Entropy straight from a label list: count each label by rescanning the list.
double brute_entropy(const Labels& labels) {
  double h = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    bool first = true;
    for (std::size_t j = 0; j < i; ++j) first &= labels[j] != labels[i];
    if (!first) continue;
    double count = 0.0;
    for (int l : labels) count += l == labels[i] ? 1.0 : 0.0;
    const double p = count / static_cast<double>(labels.size());
    h -= p * std::log2(p);
  }
  return h;
}

SplitPartition make_split(const std::vector<Labels>& groups) {
  Labels labels;
  std::vector<std::size_t> child;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (int l : groups[g]) {
      labels.push_back(l);
      child.push_back(g);
    }
  }
  return SplitPartition::from_labels(labels, child);
}

}  // namespace

TEST(Entropy, Examples) {
  EXPECT_DOUBLE_EQ(entropy(ClassDistribution({1, 1})), 1.0);
  EXPECT_DOUBLE_EQ(entropy(ClassDistribution({5})), 0.0);
  EXPECT_DOUBLE_EQ(entropy(ClassDistribution({2, 2, 2, 2})), 2.0);
  EXPECT_DOUBLE_EQ(entropy(ClassDistribution({3, 0, 3})), 1.0);
}

TEST(Gini, Examples) {
  EXPECT_DOUBLE_EQ(gini_impurity(ClassDistribution({4})), 0.0);
  EXPECT_DOUBLE_EQ(gini_impurity(ClassDistribution({1, 1})), 0.5);
  EXPECT_NEAR(gini_impurity(ClassDistribution({1, 1, 1})), 2.0 / 3.0, 1e-12);
}

TEST(InformationGain, Examples) {
  EXPECT_DOUBLE_EQ(information_gain(make_split({{0, 0}, {1, 1}})), 1.0);
  EXPECT_NEAR(information_gain(make_split({{0, 0, 1, 1, 1}})), 0.0, 1e-15);
  EXPECT_NEAR(information_gain(make_split({{0, 0}, {0, 1}})), 0.3113, 1e-4);
  EXPECT_NEAR(information_gain(make_split({{0, 0}, {0, 1}})),
              (2.0 - 0.75 * std::log2(3.0)) - 0.5, 1e-12);
}

TEST(GainRatio, Examples) {
  EXPECT_DOUBLE_EQ(gain_ratio(make_split({{0, 0}, {1, 1}})), 1.0);
  EXPECT_DOUBLE_EQ(gain_ratio(make_split({{0}, {1}, {2}, {3}})), 1.0);
  EXPECT_NEAR(gain_ratio(make_split({{0, 1}, {0, 1}})), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(split_info(make_split({{0, 0}, {1, 1}})), 1.0);
  EXPECT_GT(split_info(make_split({{0}, {1, 1, 1}})), 0.0);
}

TEST(GainRatio, SingleChildIsUndefined) {
  EXPECT_THROW(gain_ratio(make_split({{0, 1, 1}})), numerical_error);
  EXPECT_THROW(gain_ratio(SplitPartition({ClassDistribution({2, 1}), ClassDistribution({0, 0})})),
               numerical_error);
}

TEST(Partition, RejectsEmptyAndMismatched) {
  EXPECT_THROW(SplitPartition({ClassDistribution({0, 0})}), argument_error);
  const Labels labels{0, 1};
  const std::vector<std::size_t> child{0};
  EXPECT_THROW(SplitPartition::from_labels(labels, child), argument_error);
}

TEST(Properties, RandomPartitionsAgainstBruteForce) {
  Rng gen(99);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::size_t n = 1 + gen.below(12);
    const std::size_t classes = 1 + gen.below(4);
    const std::size_t k = 1 + gen.below(4);
    Labels labels(n);
    std::vector<std::size_t> child(n);
    std::vector<Labels> groups(k);
    for (std::size_t i = 0; i < n; ++i) {
      labels[i] = static_cast<int>(gen.below(classes));
      child[i] = gen.below(k);
      groups[child[i]].push_back(labels[i]);
    }
    const auto split = SplitPartition::from_labels(labels, child);

    double after = 0.0;
    for (const auto& g : groups) {
      if (!g.empty()) after += static_cast<double>(g.size()) / n * brute_entropy(g);
    }
    const double expected = brute_entropy(labels) - after;
    const double gain = information_gain(split);
    EXPECT_NEAR(gain, expected, 1e-12);
    EXPECT_GE(gain, -1e-12);
    EXPECT_LE(gain, entropy(split.parent()) + 1e-12);

    EXPECT_NEAR(entropy(split.parent()), brute_entropy(labels), 1e-12);
    EXPECT_LE(entropy(split.parent()), std::log2(static_cast<double>(split.parent().classes())) + 1e-12);
    const double g = gini_impurity(split.parent());
    EXPECT_GE(g, 0.0);
    EXPECT_LT(g, 1.0);

    std::size_t non_empty = 0;
    for (const auto& grp : groups) non_empty += grp.empty() ? 0 : 1;
    if (non_empty >= 2) {
      const double si = split_info(split);
      EXPECT_GT(si, 0.0);
      EXPECT_NEAR(gain_ratio(split), gain / si, 1e-12);
      EXPECT_GE(gain_ratio(split), -1e-12);
    }
  }
}
