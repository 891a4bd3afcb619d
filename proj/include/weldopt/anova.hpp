#ifndef WELDOPT_ANOVA_HPP
#define WELDOPT_ANOVA_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "weldopt/dataset.hpp"
#include "weldopt/error.hpp"
#include "weldopt/fdist.hpp"
#include "weldopt/taguchi.hpp"

namespace weldopt::anova {

/// Significance level for the "significant" flag on ANOVA rows.
inline constexpr double kAlpha = 0.05;
/// Smallest p-value ever reported.
inline constexpr double kMinPValue = 1e-300;
/// Pivot magnitude, relative to the largest pivot, below which the normal equations are singular.
inline constexpr double kSingularPivot = 1e-10;

/// Effects-coded main-effects design matrix. Column 0 is the intercept; a factor with L levels
/// contributes L-1 columns where column l is +1 at level l, -1 at the last level and 0 elsewhere.
struct Design {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> x;          // row-major
  std::vector<int> column_owner;  // factor index per column, -1 for the intercept
  std::vector<std::size_t> factors;

  double at(std::size_t i, std::size_t j) const { return x[i * cols + j]; }
};

inline Design effects_coded_design(const Dataset& d, const std::vector<std::size_t>& factors) {
  Design des;
  des.rows = d.size();
  des.factors = factors;
  des.column_owner.push_back(-1);

  std::vector<std::vector<std::size_t>> level_of;
  std::vector<std::size_t> level_count;
  for (std::size_t f : factors) {
    const auto fl = taguchi::factor_levels(d, f);
    level_of.push_back(taguchi::level_indices(d, fl, f));
    level_count.push_back(fl.levels.size());
    for (std::size_t l = 0; l + 1 < fl.levels.size(); ++l) {
      des.column_owner.push_back(static_cast<int>(f));
    }
  }
  des.cols = des.column_owner.size();
  des.x.assign(des.rows * des.cols, 0.0);
  for (std::size_t i = 0; i < des.rows; ++i) {
    double* row = &des.x[i * des.cols];
    row[0] = 1.0;
    std::size_t col = 1;
    for (std::size_t k = 0; k < factors.size(); ++k) {
      const std::size_t L = level_count[k];
      const std::size_t lvl = level_of[k][i];
      for (std::size_t l = 0; l + 1 < L; ++l) {
        row[col + l] = lvl == l ? 1.0 : (lvl == L - 1 ? -1.0 : 0.0);
      }
      col += L - 1;
    }
  }
  return des;
}

namespace detail {

/// Inverse of a symmetric positive (semi)definite p x p matrix by Gauss-Jordan elimination with
/// partial pivoting. Returns the failing column on singularity.
inline std::optional<std::vector<double>> invert(std::vector<double> a, std::size_t p,
                                                 std::size_t* failed_column) {
  std::vector<double> inv(p * p, 0.0);
  for (std::size_t i = 0; i < p; ++i) inv[i * p + i] = 1.0;
  double largest_pivot = 0.0;
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r) {
      if (std::abs(a[r * p + c]) > std::abs(a[piv * p + c])) piv = r;
    }
    const double mag = std::abs(a[piv * p + c]);
    largest_pivot = std::max(largest_pivot, mag);
    if (mag == 0.0 || mag < kSingularPivot * largest_pivot) {
      if (failed_column) *failed_column = c;
      return std::nullopt;
    }
    if (piv != c) {
      for (std::size_t k = 0; k < p; ++k) {
        std::swap(a[c * p + k], a[piv * p + k]);
        std::swap(inv[c * p + k], inv[piv * p + k]);
      }
    }
    const double scale = 1.0 / a[c * p + c];
    for (std::size_t k = 0; k < p; ++k) {
      a[c * p + k] *= scale;
      inv[c * p + k] *= scale;
    }
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) continue;
      const double factor = a[r * p + c];
      if (factor == 0.0) continue;
      for (std::size_t k = 0; k < p; ++k) {
        a[r * p + k] -= factor * a[c * p + k];
        inv[r * p + k] -= factor * inv[c * p + k];
      }
    }
  }
  return inv;
}

}  // namespace detail

/// Least-squares fit of the effects-coded main-effects model.
struct GlmFit {
  Dataset data;
  Design design;
  std::vector<double> response;
  std::vector<double> coefficients;
  std::vector<double> fitted;
  std::vector<double> residuals;
  std::vector<double> hat_diagonal;
  double sse = 0.0;
  double sst = 0.0;
  std::size_t df_model = 0;  // parameters excluding the intercept
  std::size_t df_error = 0;
  std::size_t df_total = 0;

  std::size_t parameters() const { return design.cols; }
};

/// Fits the main-effects model restricted to `factors` (declaration indices, any subset,
/// empty = mean-only model).
inline GlmFit fit_glm(const Dataset& d, const std::vector<std::size_t>& factors) {
  for (std::size_t f : factors) {
    if (f >= d.arity()) throw argument_error("fit_glm: factor index out of range");
  }
  Design des = effects_coded_design(d, factors);
  const std::size_t n = des.rows;
  const std::size_t p = des.cols;
  if (p > n) {
    throw numerical_error("model needs " + std::to_string(p) + " parameters but only " +
                          std::to_string(n) + " runs are available");
  }
  const std::vector<double> y = d.responses();

  std::vector<double> gram(p * p, 0.0);
  std::vector<double> xty(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < p; ++a) {
      const double xa = des.at(i, a);
      if (xa == 0.0) continue;
      xty[a] += xa * y[i];
      for (std::size_t b = 0; b < p; ++b) gram[a * p + b] += xa * des.at(i, b);
    }
  }

  std::size_t failed = 0;
  const auto inv = detail::invert(gram, p, &failed);
  if (!inv) {
    const int owner = des.column_owner[failed];
    std::string msg = "rank-deficient design: ";
    if (owner < 0) {
      msg += "intercept column is degenerate";
    } else {
      msg += "factor '" + d.factor_names()[static_cast<std::size_t>(owner)] +
             "' is confounded with";
      std::vector<std::string> earlier;
      for (std::size_t c = 1; c < failed; ++c) {
        const auto name = d.factor_names()[static_cast<std::size_t>(des.column_owner[c])];
        if (earlier.empty() || earlier.back() != name) earlier.push_back(name);
      }
      if (earlier.empty()) {
        msg += " the intercept";
      } else {
        for (std::size_t k = 0; k < earlier.size(); ++k) {
          msg += (k == 0 ? " '" : ", '") + earlier[k] + "'";
        }
      }
    }
    throw numerical_error(msg);
  }

  GlmFit fit{d, std::move(des), y, std::vector<double>(p, 0.0), {}, {}, {}, 0.0, 0.0, 0, 0, 0};
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) fit.coefficients[a] += (*inv)[a * p + b] * xty[b];
  }

  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  fit.fitted.assign(n, 0.0);
  fit.residuals.assign(n, 0.0);
  fit.hat_diagonal.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double yhat = 0.0;
    double h = 0.0;
    for (std::size_t a = 0; a < p; ++a) {
      const double xa = fit.design.at(i, a);
      yhat += xa * fit.coefficients[a];
      double row = 0.0;
      for (std::size_t b = 0; b < p; ++b) row += (*inv)[a * p + b] * fit.design.at(i, b);
      h += xa * row;
    }
    fit.fitted[i] = yhat;
    fit.residuals[i] = y[i] - yhat;
    fit.hat_diagonal[i] = h;
    fit.sse += fit.residuals[i] * fit.residuals[i];
    fit.sst += (y[i] - mean) * (y[i] - mean);
  }
  fit.df_model = p - 1;
  fit.df_error = n - p;
  fit.df_total = n - 1;
  return fit;
}

/// Full main-effects model over every factor of the dataset.
inline GlmFit fit_glm(const Dataset& d) {
  std::vector<std::size_t> all(d.arity());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return fit_glm(d, all);
}

struct AnovaRow {
  std::string source;
  std::size_t df = 0;
  double ss = 0.0;
  double ms = 0.0;
  double f = 0.0;
  double p = 1.0;
  bool significant = false;
};

/// Builds one source row from its adjusted SS and DF against the error mean square.
/// F is infinite (p = kMinPValue) when the error MS is zero and the source SS is not; a source
/// with zero SS gets F = 0, p = 1.
inline AnovaRow make_row(std::string source, double ss, std::size_t df, double ms_error,
                         std::size_t df_error) {
  if (df == 0) throw argument_error("ANOVA row '" + source + "' has zero degrees of freedom");
  if (df_error == 0) throw numerical_error("saturated model: no error degrees of freedom");
  AnovaRow row{std::move(source), df, ss, ss / static_cast<double>(df), 0.0, 1.0, false};
  if (row.ms <= 0.0) {
    row.f = 0.0;
    row.p = 1.0;
  } else if (ms_error <= 0.0) {
    row.f = std::numeric_limits<double>::infinity();
    row.p = kMinPValue;
  } else {
    row.f = row.ms / ms_error;
    row.p = std::max(kMinPValue, f_survival(row.f, static_cast<double>(df),
                                            static_cast<double>(df_error)));
  }
  row.significant = row.p < kAlpha;
  return row;
}

struct AnovaTable {
  std::vector<AnovaRow> sources;  // factor declaration order
  std::size_t df_error = 0;
  double ss_error = 0.0;
  double ms_error = 0.0;
  std::size_t df_total = 0;
  double ss_total = 0.0;
};

/// Adjusted SS of each factor = SSE(model without the factor) - SSE(full model); every reduced
/// model is refit from scratch.
inline AnovaTable anova_table(const GlmFit& fit) {
  if (fit.df_error == 0) {
    throw numerical_error("saturated model: error DF is 0, no F tests possible");
  }
  AnovaTable t;
  t.df_error = fit.df_error;
  t.ss_error = fit.sse;
  t.ms_error = fit.sse / static_cast<double>(fit.df_error);
  t.df_total = fit.df_total;
  t.ss_total = fit.sst;

  const auto& included = fit.design.factors;
  for (std::size_t k = 0; k < included.size(); ++k) {
    std::vector<std::size_t> reduced;
    for (std::size_t j = 0; j < included.size(); ++j) {
      if (j != k) reduced.push_back(included[j]);
    }
    const GlmFit smaller = fit_glm(fit.data, reduced);
    const double ss = std::max(0.0, smaller.sse - fit.sse);
    const auto df = static_cast<std::size_t>(
        std::count(fit.design.column_owner.begin(), fit.design.column_owner.end(),
                   static_cast<int>(included[k])));
    t.sources.push_back(
        make_row(fit.data.factor_names()[included[k]], ss, df, t.ms_error, t.df_error));
  }
  return t;
}

struct ModelSummary {
  double s = 0.0;
  double r_squared = 0.0;
  double r_squared_adjusted = 0.0;
  std::optional<double> r_squared_predicted;  // needs PRESS
  std::optional<double> press;
};

/// Summary statistics from aggregate sums of squares.
inline ModelSummary model_summary(double sse, std::size_t df_error, double sst,
                                  std::size_t df_total, std::optional<double> press = {}) {
  if (df_error == 0) throw numerical_error("saturated model: error DF is 0");
  if (df_total == 0 || !(sst > 0.0)) {
    throw numerical_error("total sum of squares is zero; R-squared undefined");
  }
  ModelSummary m;
  const double mse = sse / static_cast<double>(df_error);
  m.s = std::sqrt(mse);
  m.r_squared = 1.0 - sse / sst;
  m.r_squared_adjusted = 1.0 - mse / (sst / static_cast<double>(df_total));
  if (press) {
    m.press = press;
    m.r_squared_predicted = 1.0 - *press / sst;
  }
  return m;
}

/// Prediction error sum of squares from leave-one-out residuals e_i / (1 - h_ii).
inline double press(const GlmFit& fit) {
  double acc = 0.0;
  for (std::size_t i = 0; i < fit.residuals.size(); ++i) {
    const double denom = 1.0 - fit.hat_diagonal[i];
    if (denom < 1e-10) {
      throw numerical_error("PRESS undefined: run " + std::to_string(i + 1) +
                            " has leverage 1 (fully self-determined)");
    }
    const double e = fit.residuals[i] / denom;
    acc += e * e;
  }
  return acc;
}

inline ModelSummary model_summary(const GlmFit& fit) {
  return model_summary(fit.sse, fit.df_error, fit.sst, fit.df_total, press(fit));
}

}  // namespace weldopt::anova

#endif  // WELDOPT_ANOVA_HPP
