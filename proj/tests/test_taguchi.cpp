#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "weldopt/taguchi.hpp"

using namespace weldopt;
using namespace weldopt::taguchi;

namespace {

double sn1(double y) { return sn_larger_is_better(std::vector<double>{y}); }

Dataset with_responses(const Dataset& d, const std::vector<double>& y) {
  std::vector<weldopt::Run> runs = d.runs();
  for (std::size_t i = 0; i < runs.size(); ++i) runs[i].response = y[i];
  return Dataset(d.factor_names(), d.response_name(), runs);
}

// Textbook L9(3^4) array, first three columns, levels 1..3.
Dataset l9(const std::vector<double>& y) {
  const int cols[9][3] = {{1, 1, 1}, {1, 2, 2}, {1, 3, 3}, {2, 1, 2}, {2, 2, 3},
                          {2, 3, 1}, {3, 1, 3}, {3, 2, 1}, {3, 3, 2}};
  std::vector<weldopt::Run> runs;
  for (int i = 0; i < 9; ++i) {
    runs.push_back({{double(cols[i][0]), double(cols[i][1]), double(cols[i][2])}, y[i]});
  }
  return Dataset({"A", "B", "C"}, "y", runs);
}

}  // namespace

TEST(SignalToNoise, LargerIsBetter) {
  EXPECT_NEAR(sn1(65.8), 36.3646, 1e-3);
  EXPECT_NEAR(sn1(65.8), 36.36451787227911, 1e-9);
  EXPECT_DOUBLE_EQ(sn1(1.0), 0.0);
  EXPECT_DOUBLE_EQ(sn1(10.0), 20.0);
  // Replicates: -10 log10(mean 1/y^2).
  const std::vector<double> reps{2.0, 4.0};
  EXPECT_NEAR(sn_larger_is_better(reps), -10.0 * std::log10((0.25 + 0.0625) / 2.0), 1e-12);
}

TEST(SignalToNoise, DomainErrors) {
  EXPECT_THROW(sn1(0.0), domain_error);
  EXPECT_THROW(sn1(-3.0), domain_error);
  EXPECT_THROW(sn_larger_is_better(std::vector<double>{}), argument_error);
  EXPECT_THROW(sn_nominal_is_best(std::vector<double>{5.0}), domain_error);
}

TEST(SignalToNoise, OtherCriteria) {
  EXPECT_NEAR(sn_smaller_is_better(std::vector<double>{10.0}), -20.0, 1e-12);
  // mean 5, sample variance 2 -> 10 log10(12.5).
  EXPECT_NEAR(sn_nominal_is_best(std::vector<double>{4.0, 6.0}), 10.0 * std::log10(12.5), 1e-12);
}

TEST(SignalToNoise, StrictlyIncreasing) {
  Rng gen(1);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> y{1.0 + gen.below(1000) / 10.0, 1.0 + gen.below(1000) / 10.0};
    const double base = sn_larger_is_better(y);
    y[gen.below(2)] += 0.5;
    EXPECT_GT(sn_larger_is_better(y), base);
  }
}

TEST(ResponseTable, BuiltinLevelMeans) {
  const auto t = response_table(builtin_aa6262());
  ASSERT_EQ(t.factors.size(), 3u);
  const double expected[3][3] = {{66.3267, 69.4667, 61.1333},
                                 {62.8, 65.3933, 68.7333},
                                 {68.2, 63.5267, 65.2}};
  for (int f = 0; f < 3; ++f) {
    for (int l = 0; l < 3; ++l) EXPECT_NEAR(t.factors[f].raw_means[l], expected[f][l], 1e-3);
    EXPECT_EQ(t.factors[f].counts, (std::vector<std::size_t>{3, 3, 3}));
  }
  EXPECT_NEAR(t.factors[0].raw_means[1], (64.3 + 69.9 + 74.2) / 3.0, 1e-12);
  EXPECT_NEAR(t.factors[0].raw_delta, 8.3333, 1e-3);
  EXPECT_NEAR(t.factors[1].raw_delta, 5.9333, 1e-3);
  EXPECT_NEAR(t.factors[2].raw_delta, 4.6733, 1e-3);
  EXPECT_EQ(t.factors[0].raw_rank, 1u);
  EXPECT_EQ(t.factors[1].raw_rank, 2u);
  EXPECT_EQ(t.factors[2].raw_rank, 3u);
  // S/N means: average of 20 log10(y) per level (independently evaluated).
  EXPECT_NEAR(t.factors[0].sn_means[0], 36.433198, 1e-5);
  EXPECT_NEAR(t.factors[0].sn_means[1], 36.820614, 1e-5);
  EXPECT_NEAR(t.factors[0].sn_delta, 1.1029040, 1e-6);
}

TEST(ResponseTable, ConstantResponse) {
  const Dataset d = with_responses(builtin_aa6262(), std::vector<double>(9, 61.1));
  const auto t = response_table(d);
  for (const auto& fe : t.factors) {
    for (double m : fe.raw_means) EXPECT_NEAR(m, 61.1, 1e-12);
    EXPECT_NEAR(fe.raw_delta, 0.0, 1e-12);
  }
  for (const auto& c : optimal_combination(t, Basis::raw)) EXPECT_EQ(c.level_number, 1u);
  for (const auto& c : optimal_combination(t, Basis::s_n)) EXPECT_EQ(c.level_number, 1u);
}

TEST(ResponseTable, SingleLevelFactorIsDegenerate) {
  const Dataset d({"a", "b"}, "y", {{{1, 5}, 3}, {{2, 5}, 4}});
  EXPECT_THROW(response_table(d), argument_error);
}

TEST(ResponseTable, WeightedLevelMeansEqualGrandMean) {
  Rng gen(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<weldopt::Run> runs;
    const std::size_t n = 4 + gen.below(12);
    for (std::size_t i = 0; i < n; ++i) {
      runs.push_back({{double(1 + i % 2), double(1 + gen.below(3)), double(1 + i % 3)},
                      1.0 + gen.below(10000) / 100.0});
    }
    const Dataset d({"a", "b", "c"}, "y", runs);
    const auto y = d.responses();
    const double grand = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    bool degenerate = false;
    for (std::size_t j = 0; j < 3; ++j) degenerate |= factor_levels(d, j).levels.size() < 2;
    if (degenerate) continue;
    for (const auto& fe : response_table(d).factors) {
      double acc = 0.0;
      for (std::size_t l = 0; l < fe.counts.size(); ++l) acc += fe.raw_means[l] * fe.counts[l];
      EXPECT_NEAR(acc / static_cast<double>(n), grand, 1e-9);
    }
  }
}

TEST(Optimum, BuiltinRawBasis) {
  const auto t = response_table(builtin_aa6262());
  const auto best = optimal_combination(t, Basis::raw);
  ASSERT_EQ(best.size(), 3u);
  EXPECT_EQ(best[0].level_number, 2u);
  EXPECT_EQ(best[1].level_number, 3u);
  EXPECT_EQ(best[2].level_number, 1u);
  EXPECT_EQ(best[0].setting, 1000.0);
  EXPECT_EQ(best[1].setting, 60.0);
  EXPECT_EQ(best[2].setting, 0.1);
  const auto sn = optimal_combination(t, Basis::s_n);
  EXPECT_EQ(sn[0].level_number, 2u);
  EXPECT_EQ(sn[1].level_number, 3u);
  EXPECT_EQ(sn[2].level_number, 1u);
}

TEST(Optimum, DominantLevel) {
  // Level 3 of A, level 1 of B, level 2 of C add a large bonus.
  std::vector<double> y;
  const int cols[9][3] = {{1, 1, 1}, {1, 2, 2}, {1, 3, 3}, {2, 1, 2}, {2, 2, 3},
                          {2, 3, 1}, {3, 1, 3}, {3, 2, 1}, {3, 3, 2}};
  for (const auto& r : cols) y.push_back(10.0 + 5 * (r[0] == 3) + 3 * (r[1] == 1) + 2 * (r[2] == 2));
  const auto best = optimal_combination(response_table(l9(y)), Basis::raw);
  EXPECT_EQ(best[0].level_number, 3u);
  EXPECT_EQ(best[1].level_number, 1u);
  EXPECT_EQ(best[2].level_number, 2u);
}

TEST(Optimum, InvariantUnderScalingAndAffineMaps) {
  Rng gen(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> y(9);
    for (double& v : y) v = 1.0 + gen.below(100000) / 1000.0;
    const auto base_raw = optimal_combination(response_table(l9(y)), Basis::raw);
    const auto base_sn = optimal_combination(response_table(l9(y)), Basis::s_n);

    const double c = 1.5 + gen.below(100) / 10.0;
    std::vector<double> scaled(y);
    for (double& v : scaled) v *= c;
    const auto sn_scaled = optimal_combination(response_table(l9(scaled)), Basis::s_n);

    std::vector<double> affine(y);
    for (double& v : affine) v = 2.5 * v + 7.0;
    const auto raw_affine = optimal_combination(response_table(l9(affine)), Basis::raw);
    for (std::size_t f = 0; f < 3; ++f) {
      EXPECT_EQ(sn_scaled[f].level_number, base_sn[f].level_number);
      EXPECT_EQ(raw_affine[f].level_number, base_raw[f].level_number);
    }
    // Single-replicate S/N shifts by 20 log10(c).
    EXPECT_NEAR(sn1(y[0] * c) - sn1(y[0]), 20.0 * std::log10(c), 1e-9);
  }
}

TEST(Design, BuiltinBalancedButNotOrthogonal) {
  const auto dd = check_design(builtin_aa6262());
  EXPECT_EQ(dd.balanced, (std::vector<bool>{true, true, true}));
  ASSERT_EQ(dd.pairs.size(), 3u);
  EXPECT_TRUE(dd.pairs[0].orthogonal);   // rpm x traverse
  EXPECT_TRUE(dd.pairs[1].orthogonal);   // rpm x depth
  EXPECT_FALSE(dd.pairs[2].orthogonal);  // traverse x depth
  EXPECT_EQ(dd.pairs[2].first, 1u);
  EXPECT_EQ(dd.pairs[2].second, 2u);
  EXPECT_FALSE(dd.fully_orthogonal());
}

TEST(Design, L9IsOrthogonal) {
  const auto dd = check_design(l9(std::vector<double>(9, 5.0)));
  EXPECT_EQ(dd.balanced, (std::vector<bool>{true, true, true}));
  EXPECT_TRUE(dd.fully_orthogonal());
}

TEST(Design, OrthogonalPairImpliesBalance) {
  Rng gen(5);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<weldopt::Run> runs;
    const std::size_t n = 2 + gen.below(10);
    for (std::size_t i = 0; i < n; ++i) {
      runs.push_back({{double(1 + gen.below(2)), double(1 + gen.below(3))}, 1.0});
    }
    const auto dd = check_design(Dataset({"a", "b"}, "y", runs));
    if (dd.pairs[0].orthogonal) {
      EXPECT_TRUE(dd.balanced[0]);
      EXPECT_TRUE(dd.balanced[1]);
    }
  }
}
