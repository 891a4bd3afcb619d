#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <set>

#include "weldopt/anova.hpp"

using namespace weldopt;
using namespace weldopt::anova;

namespace {

// Oracle: treatment-coded dummy design solved with a rank-revealing decomposition.
// Shares no code with the library fit.
double oracle_sse(const Dataset& d, const std::vector<std::size_t>& factors) {
  const std::size_t n = d.size();
  std::vector<std::vector<double>> cols{std::vector<double>(n, 1.0)};
  for (std::size_t f : factors) {
    const auto col = d.factor_column(f);
    std::set<double> levels(col.begin(), col.end());
    levels.erase(levels.begin());
    for (double lv : levels) {
      std::vector<double> c(n);
      for (std::size_t i = 0; i < n; ++i) c[i] = col[i] == lv ? 1.0 : 0.0;
      cols.push_back(c);
    }
  }
  Eigen::MatrixXd X(n, cols.size());
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) X(i, j) = cols[j][i];
    y(i) = d.runs()[i].response;
  }
  const Eigen::VectorXd beta = X.completeOrthogonalDecomposition().solve(y);
  return (y - X * beta).squaredNorm();
}

Dataset with_responses(const Dataset& d, const std::vector<double>& y) {
  std::vector<weldopt::Run> runs = d.runs();
  for (std::size_t i = 0; i < runs.size(); ++i) runs[i].response = y[i];
  return Dataset(d.factor_names(), d.response_name(), runs);
}

}  // namespace

TEST(Glm, BuiltinGoldenValues) {
  const Dataset d = builtin_aa6262();
  const GlmFit fit = fit_glm(d);
  EXPECT_EQ(fit.parameters(), 7u);
  EXPECT_EQ(fit.df_error, 2u);
  EXPECT_EQ(fit.df_total, 8u);
  EXPECT_NEAR(fit.sst, 177.736355555556, 1e-9);
  EXPECT_NEAR(fit.sst, 177.736, 0.01);
  EXPECT_NEAR(fit.sse, 1.333475555556, 1e-9);

  const double hat[] = {0.911111111111, 0.644444444444, 0.911111111111,
                        0.911111111111, 0.911111111111, 0.644444444444,
                        0.777777777778, 0.644444444444, 0.644444444444};
  for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(fit.hat_diagonal[i], hat[i], 1e-9);

  const auto t = anova_table(fit);
  ASSERT_EQ(t.sources.size(), 3u);
  EXPECT_NEAR(t.sources[0].ss, 106.274755555556, 1e-9);
  EXPECT_NEAR(t.sources[1].ss, 36.488035555556, 1e-9);
  EXPECT_NEAR(t.sources[2].ss, 17.042702222222, 1e-9);
  for (const auto& r : t.sources) EXPECT_EQ(r.df, 2u);

  const auto ms = model_summary(fit);
  ASSERT_TRUE(ms.press);
  EXPECT_NEAR(*ms.press, 43.813532812493, 1e-8);
  EXPECT_NEAR(ms.s, 0.816540126251, 1e-9);
  EXPECT_NEAR(ms.r_squared, 0.992497451906, 1e-10);
  EXPECT_NEAR(ms.r_squared_adjusted, 0.969989807625, 1e-10);
  EXPECT_NEAR(*ms.r_squared_predicted, 0.753491441436, 1e-10);
}

TEST(Glm, BuiltinSstIsDeviationSum) {
  const auto y = builtin_aa6262().responses();
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 9.0;
  double sst = 0.0;
  for (double v : y) sst += (v - mean) * (v - mean);
  EXPECT_NEAR(fit_glm(builtin_aa6262()).sst, sst, 1e-10);
}

TEST(Glm, AdjustedSsMatchesLiveOracle) {
  Rng gen(31);
  const Dataset base = builtin_aa6262();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> y(9);
    for (double& v : y) v = 40.0 + gen.below(400000) / 10000.0;
    const Dataset d = trial == 0 ? base : with_responses(base, y);
    const GlmFit fit = fit_glm(d);
    const double full = oracle_sse(d, {0, 1, 2});
    EXPECT_NEAR(fit.sse, full, 1e-6);
    const auto t = anova_table(fit);
    for (std::size_t k = 0; k < 3; ++k) {
      std::vector<std::size_t> reduced;
      for (std::size_t j = 0; j < 3; ++j) {
        if (j != k) reduced.push_back(j);
      }
      EXPECT_NEAR(t.sources[k].ss, oracle_sse(d, reduced) - full, 1e-6);
    }
  }
}

TEST(Glm, ResidualAndHatProperties) {
  const GlmFit fit = fit_glm(builtin_aa6262());
  const double rsum = std::accumulate(fit.residuals.begin(), fit.residuals.end(), 0.0);
  EXPECT_NEAR(rsum, 0.0, 1e-9);
  for (std::size_t j = 0; j < fit.design.cols; ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < fit.design.rows; ++i) dot += fit.design.at(i, j) * fit.residuals[i];
    EXPECT_NEAR(dot, 0.0, 1e-9);
  }
  double trace = 0.0;
  for (double h : fit.hat_diagonal) {
    EXPECT_GE(h, 1.0 / 9.0 - 1e-12);
    EXPECT_LE(h, 1.0 + 1e-12);
    trace += h;
  }
  EXPECT_NEAR(trace, 7.0, 1e-9);
}

TEST(Glm, MeanOnlyModelPress) {
  const Dataset d = builtin_aa6262();
  const GlmFit fit = fit_glm(d, {});
  EXPECT_EQ(fit.parameters(), 1u);
  EXPECT_NEAR(fit.sse, fit.sst, 1e-9);
  EXPECT_NEAR(press(fit), fit.sst * (9.0 / 8.0) * (9.0 / 8.0), 1e-9);
}

TEST(Glm, OrthogonalL9DecomposesTotal) {
  const int cols[9][3] = {{1, 1, 1}, {1, 2, 2}, {1, 3, 3}, {2, 1, 2}, {2, 2, 3},
                          {2, 3, 1}, {3, 1, 3}, {3, 2, 1}, {3, 3, 2}};
  Rng gen(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<weldopt::Run> runs;
    for (const auto& r : cols) {
      runs.push_back({{double(r[0]), double(r[1]), double(r[2])}, 10.0 + gen.below(1000) / 37.0});
    }
    const Dataset d({"A", "B", "C"}, "y", runs);
    const GlmFit fit = fit_glm(d);
    const auto t = anova_table(fit);
    double total = fit.sse;
    for (const auto& r : t.sources) total += r.ss;
    EXPECT_NEAR(total, fit.sst, 1e-9);
    // Orthogonal adjusted SS equals the classical between-level sum.
    const auto y = d.responses();
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 9.0;
    for (std::size_t f = 0; f < 3; ++f) {
      double ss = 0.0;
      for (int lv = 1; lv <= 3; ++lv) {
        double s = 0.0;
        for (std::size_t i = 0; i < 9; ++i) {
          if (cols[i][f] == lv) s += y[i];
        }
        ss += 3.0 * (s / 3.0 - mean) * (s / 3.0 - mean);
      }
      EXPECT_NEAR(t.sources[f].ss, ss, 1e-9);
    }
  }
}

TEST(Glm, SaturatedAndRankDeficientDesigns) {
  // 4 factors with 3 levels on 9 runs: 9 parameters, no error DF.
  const int cols[9][4] = {{1, 1, 1, 1}, {1, 2, 2, 2}, {1, 3, 3, 3}, {2, 1, 2, 3}, {2, 2, 3, 1},
                          {2, 3, 1, 2}, {3, 1, 3, 2}, {3, 2, 1, 3}, {3, 3, 2, 1}};
  std::vector<weldopt::Run> runs;
  for (int i = 0; i < 9; ++i) {
    runs.push_back({{double(cols[i][0]), double(cols[i][1]), double(cols[i][2]),
                     double(cols[i][3])}, 50.0 + i * i});
  }
  const GlmFit fit = fit_glm(Dataset({"A", "B", "C", "D"}, "y", runs));
  EXPECT_EQ(fit.df_error, 0u);
  EXPECT_THROW(anova_table(fit), numerical_error);

  // B duplicates A: confounded.
  std::vector<weldopt::Run> dup;
  for (int i = 0; i < 6; ++i) dup.push_back({{double(1 + i % 3), double(1 + i % 3)}, 5.0 + i});
  try {
    fit_glm(Dataset({"A", "B"}, "y", dup));
    FAIL();
  } catch (const numerical_error& e) {
    EXPECT_NE(std::string(e.what()).find("'B'"), std::string::npos);
  }
}

TEST(AnovaRows, PublishedAggregatesArithmetic) {
  // Published adjusted SS and DF fed through the same row arithmetic.
  const double ms_error = 1.597 / 2.0;
  const auto rpm = make_row("rpm", 232.621, 2, ms_error, 2);
  const auto feed = make_row("feed", 2.965, 2, ms_error, 2);
  const auto depth = make_row("depth", 133.779, 2, ms_error, 2);
  EXPECT_NEAR(rpm.ms, 116.311, 1e-3);
  EXPECT_NEAR(feed.ms, 1.483, 1e-3);
  EXPECT_NEAR(depth.ms, 66.889, 1e-3);
  EXPECT_NEAR(rpm.f, 145.62, 0.1);
  EXPECT_NEAR(feed.f, 1.86, 0.1);
  EXPECT_NEAR(depth.f, 83.75, 0.1);
  EXPECT_NEAR(rpm.p, 0.007, 1e-3);
  EXPECT_NEAR(feed.p, 0.350, 1e-3);
  EXPECT_NEAR(depth.p, 0.012, 1e-3);
  EXPECT_TRUE(rpm.significant);
  EXPECT_FALSE(feed.significant);
  EXPECT_TRUE(depth.significant);
}

TEST(AnovaRows, PublishedModelSummary) {
  const auto m = model_summary(1.597, 2, 370.963, 8);
  EXPECT_NEAR(m.s, 0.894, 1e-3);
  EXPECT_NEAR(100.0 * m.r_squared, 99.57, 0.02);
  EXPECT_NEAR(100.0 * m.r_squared_adjusted, 98.28, 0.02);
  EXPECT_FALSE(m.r_squared_predicted.has_value());
}

TEST(AnovaRows, DegenerateCases) {
  const auto zero = make_row("z", 0.0, 2, 1.0, 2);
  EXPECT_EQ(zero.f, 0.0);
  EXPECT_EQ(zero.p, 1.0);
  const auto perfect = make_row("p", 3.0, 2, 0.0, 2);
  EXPECT_TRUE(std::isinf(perfect.f));
  EXPECT_EQ(perfect.p, kMinPValue);
  EXPECT_THROW(make_row("s", 1.0, 2, 1.0, 0), numerical_error);
  const auto tiny = make_row("t", 1e6, 1, 1e-9, 50);
  EXPECT_GE(tiny.p, kMinPValue);
}

TEST(AnovaRows, SummaryOrderingProperty) {
  Rng gen(4);
  const Dataset base = builtin_aa6262();
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> y(9);
    for (double& v : y) v = 50.0 + gen.below(300000) / 10000.0;
    const auto m = model_summary(fit_glm(with_responses(base, y)));
    EXPECT_LE(m.r_squared_adjusted, m.r_squared + 1e-12);
    EXPECT_LE(*m.r_squared_predicted, m.r_squared + 1e-12);
    EXPECT_LE(m.r_squared, 1.0);
  }
}
