#ifndef WELDOPT_TAGUCHI_HPP
#define WELDOPT_TAGUCHI_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "weldopt/dataset.hpp"
#include "weldopt/error.hpp"

namespace weldopt::taguchi {

enum class Criterion { larger_is_better, smaller_is_better, nominal_is_best };

/// Larger-is-better S/N in dB: -10 log10(mean(1/y^2)). One replicate gives 20 log10(y).
inline double sn_larger_is_better(std::span<const double> y) {
  if (y.empty()) throw argument_error("S/N needs at least one replicate");
  double acc = 0.0;
  for (double v : y) {
    if (!(v > 0.0)) throw domain_error("larger-is-better S/N requires every response > 0");
    acc += 1.0 / (v * v);
  }
  if (y.size() == 1) return 20.0 * std::log10(y.front());
  return -10.0 * std::log10(acc / static_cast<double>(y.size()));
}

/// Smaller-is-better S/N in dB: -10 log10(mean(y^2)).
inline double sn_smaller_is_better(std::span<const double> y) {
  if (y.empty()) throw argument_error("S/N needs at least one replicate");
  double acc = 0.0;
  for (double v : y) acc += v * v;
  if (acc == 0.0) throw domain_error("smaller-is-better S/N undefined for all-zero responses");
  return -10.0 * std::log10(acc / static_cast<double>(y.size()));
}

/// Nominal-is-best S/N in dB: 10 log10(mean^2 / s^2) with sample variance s^2.
inline double sn_nominal_is_best(std::span<const double> y) {
  if (y.size() < 2) throw domain_error("nominal-is-best S/N needs at least 2 replicates");
  const double n = static_cast<double>(y.size());
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double var = ss / (n - 1.0);
  if (var == 0.0 || mean == 0.0) {
    throw domain_error("nominal-is-best S/N undefined for zero mean or zero variance");
  }
  return 10.0 * std::log10(mean * mean / var);
}

inline double signal_to_noise(std::span<const double> y, Criterion c) {
  switch (c) {
    case Criterion::larger_is_better: return sn_larger_is_better(y);
    case Criterion::smaller_is_better: return sn_smaller_is_better(y);
    case Criterion::nominal_is_best: return sn_nominal_is_best(y);
  }
  throw argument_error("unknown S/N criterion");
}

inline const char* criterion_name(Criterion c) {
  switch (c) {
    case Criterion::larger_is_better: return "larger";
    case Criterion::smaller_is_better: return "smaller";
    case Criterion::nominal_is_best: return "nominal";
  }
  return "?";
}

struct FactorLevels {
  std::string factor;
  std::vector<double> levels;  // distinct, ascending
};

/// Distinct settings of factor j in ascending order.
inline FactorLevels factor_levels(const Dataset& d, std::size_t j) {
  auto col = d.factor_column(j);
  std::sort(col.begin(), col.end());
  col.erase(std::unique(col.begin(), col.end()), col.end());
  return {d.factor_names().at(j), std::move(col)};
}

/// 0-based level index of every run for factor j.
inline std::vector<std::size_t> level_indices(const Dataset& d, const FactorLevels& fl,
                                              std::size_t j) {
  std::vector<std::size_t> out;
  out.reserve(d.size());
  for (const Run& r : d.runs()) {
    const auto it = std::lower_bound(fl.levels.begin(), fl.levels.end(), r.factors[j]);
    out.push_back(static_cast<std::size_t>(it - fl.levels.begin()));
  }
  return out;
}

struct FactorEffects {
  FactorLevels levels;
  std::vector<std::size_t> counts;
  std::vector<double> raw_means;
  std::vector<double> sn_means;
  double raw_delta = 0.0;
  double sn_delta = 0.0;
  std::size_t raw_rank = 0;  // 1 = largest delta
  std::size_t sn_rank = 0;
};

/// Main-effects response table over raw response means and S/N means.
struct ResponseTable {
  Criterion criterion = Criterion::larger_is_better;
  std::vector<FactorEffects> factors;
};

namespace detail {

// Rank 1 goes to the largest delta; equal deltas keep declaration order.
inline std::vector<std::size_t> rank_by_delta(const std::vector<double>& deltas) {
  std::vector<std::size_t> order(deltas.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return deltas[a] > deltas[b]; });
  std::vector<std::size_t> rank(deltas.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) rank[order[pos]] = pos + 1;
  return rank;
}

}  // namespace detail

/// Per-run S/N is computed from the single response of each run.
inline ResponseTable response_table(const Dataset& d,
                                    Criterion criterion = Criterion::larger_is_better) {
  std::vector<double> sn;
  sn.reserve(d.size());
  for (const Run& r : d.runs()) {
    const double y = r.response;
    sn.push_back(signal_to_noise(std::span<const double>(&y, 1), criterion));
  }

  ResponseTable t{criterion, {}};
  for (std::size_t j = 0; j < d.arity(); ++j) {
    FactorEffects fe;
    fe.levels = factor_levels(d, j);
    const std::size_t L = fe.levels.levels.size();
    if (L < 2) {
      throw argument_error("degenerate factor '" + fe.levels.factor + "': only one level");
    }
    fe.counts.assign(L, 0);
    fe.raw_means.assign(L, 0.0);
    fe.sn_means.assign(L, 0.0);
    const auto idx = level_indices(d, fe.levels, j);
    for (std::size_t i = 0; i < d.size(); ++i) {
      ++fe.counts[idx[i]];
      fe.raw_means[idx[i]] += d.runs()[i].response;
      fe.sn_means[idx[i]] += sn[i];
    }
    for (std::size_t l = 0; l < L; ++l) {
      fe.raw_means[l] /= static_cast<double>(fe.counts[l]);
      fe.sn_means[l] /= static_cast<double>(fe.counts[l]);
    }
    const auto spread = [](const std::vector<double>& v) {
      const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
      return *hi - *lo;
    };
    fe.raw_delta = spread(fe.raw_means);
    fe.sn_delta = spread(fe.sn_means);
    t.factors.push_back(std::move(fe));
  }

  std::vector<double> raw_deltas, sn_deltas;
  for (const auto& fe : t.factors) {
    raw_deltas.push_back(fe.raw_delta);
    sn_deltas.push_back(fe.sn_delta);
  }
  const auto raw_rank = detail::rank_by_delta(raw_deltas);
  const auto sn_rank = detail::rank_by_delta(sn_deltas);
  for (std::size_t j = 0; j < t.factors.size(); ++j) {
    t.factors[j].raw_rank = raw_rank[j];
    t.factors[j].sn_rank = sn_rank[j];
  }
  return t;
}

enum class Basis { raw, s_n };

struct LevelChoice {
  std::string factor;
  std::size_t level_number = 0;  // 1-based Taguchi level number
  double setting = 0.0;
};

/// Per factor, the level with the largest mean on `basis`; ties go to the lowest level.
inline std::vector<LevelChoice> optimal_combination(const ResponseTable& t, Basis basis) {
  std::vector<LevelChoice> out;
  for (const auto& fe : t.factors) {
    const auto& means = basis == Basis::raw ? fe.raw_means : fe.sn_means;
    if (means.empty() || means.size() != fe.levels.levels.size()) {
      throw argument_error("malformed response table for factor '" + fe.levels.factor + "'");
    }
    // Means within rounding noise of each other count as tied.
    std::size_t best = 0;
    for (std::size_t l = 1; l < means.size(); ++l) {
      const double tol = 1e-12 * std::max(std::abs(means[l]), std::abs(means[best]));
      if (means[l] > means[best] + tol) best = l;
    }
    out.push_back({fe.levels.factor, best + 1, fe.levels.levels[best]});
  }
  return out;
}

struct PairOrthogonality {
  std::size_t first = 0;
  std::size_t second = 0;
  bool orthogonal = false;
};

struct DesignDiagnostics {
  std::vector<std::string> factors;
  std::vector<bool> balanced;
  std::vector<PairOrthogonality> pairs;  // (0,1), (0,2), ..., (1,2), ...

  bool fully_orthogonal() const {
    return std::all_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.orthogonal; });
  }
};

inline DesignDiagnostics check_design(const Dataset& d) {
  DesignDiagnostics dd;
  std::vector<FactorLevels> levels;
  std::vector<std::vector<std::size_t>> idx;
  for (std::size_t j = 0; j < d.arity(); ++j) {
    levels.push_back(factor_levels(d, j));
    idx.push_back(level_indices(d, levels.back(), j));
    dd.factors.push_back(d.factor_names()[j]);

    std::vector<std::size_t> counts(levels.back().levels.size(), 0);
    for (std::size_t l : idx.back()) ++counts[l];
    dd.balanced.push_back(std::adjacent_find(counts.begin(), counts.end(),
                                             std::not_equal_to<>()) == counts.end());
  }
  for (std::size_t a = 0; a < d.arity(); ++a) {
    for (std::size_t b = a + 1; b < d.arity(); ++b) {
      const std::size_t La = levels[a].levels.size();
      const std::size_t Lb = levels[b].levels.size();
      std::vector<std::size_t> cells(La * Lb, 0);
      for (std::size_t i = 0; i < d.size(); ++i) ++cells[idx[a][i] * Lb + idx[b][i]];
      const bool equal = std::adjacent_find(cells.begin(), cells.end(),
                                            std::not_equal_to<>()) == cells.end();
      dd.pairs.push_back({a, b, equal});
    }
  }
  return dd;
}

}  // namespace weldopt::taguchi

#endif  // WELDOPT_TAGUCHI_HPP
