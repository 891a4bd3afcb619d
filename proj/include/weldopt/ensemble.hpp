#ifndef WELDOPT_ENSEMBLE_HPP
#define WELDOPT_ENSEMBLE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "weldopt/dataset.hpp"
#include "weldopt/error.hpp"
#include "weldopt/rng.hpp"
#include "weldopt/tree.hpp"

namespace weldopt::ensemble {

using cart::RegressionTree;
using cart::TreeConfig;

// ---------------------------------------------------------------------------------------------
// Random forest

struct ForestParams {
  std::size_t trees = 100;
  TreeConfig tree{};
  std::size_t features_per_split = 0;  // 0 = all features
  std::uint64_t seed = 0;
  bool bootstrap = true;
  std::size_t threads = 1;  // training parallelism; never changes the result
};

struct ForestModel {
  ForestParams params;
  std::size_t arity = 0;
  std::vector<std::uint64_t> tree_seeds;
  std::vector<RegressionTree> trees;
};

/// Seed of tree t: bootstrap draw and feature subsampling both derive from it.
inline std::uint64_t forest_tree_seed(std::uint64_t seed, std::size_t t) {
  return Rng::derive(seed, t);
}

inline ForestModel fit_random_forest(const Dataset& d, const ForestParams& params) {
  if (params.trees == 0) throw argument_error("random forest needs at least one tree");
  if (params.features_per_split > d.arity()) {
    throw argument_error("features per split (" + std::to_string(params.features_per_split) +
                         ") exceeds feature count (" + std::to_string(d.arity()) + ")");
  }
  const auto x = d.feature_matrix();
  const auto y = d.responses();
  const cart::SampleView view{x, y, d.arity()};

  ForestModel model{params, d.arity(), std::vector<std::uint64_t>(params.trees),
                    std::vector<RegressionTree>(params.trees)};
  for (std::size_t t = 0; t < params.trees; ++t) {
    model.tree_seeds[t] = forest_tree_seed(params.seed, t);
  }

  const auto train = [&](std::size_t t) {
    const std::uint64_t s = model.tree_seeds[t];
    std::vector<std::size_t> rows;
    if (params.bootstrap) {
      rows = bootstrap_indices(d.size(), s);
    } else {
      rows.resize(d.size());
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    const cart::GrowOptions opt{params.features_per_split, Rng::derive(s, 0), 0.0};
    model.trees[t] = cart::fit_regression_tree(view, std::move(rows), params.tree, opt);
  };

  const std::size_t workers = std::clamp<std::size_t>(params.threads, 1, params.trees);
  if (workers == 1) {
    for (std::size_t t = 0; t < params.trees; ++t) train(t);
  } else {
    // Static striping: worker w trains trees w, w+workers, ...
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t t = w; t < params.trees; t += workers) train(t);
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }
  return model;
}

/// Mean of the tree predictions, accumulated in tree-index order.
inline double predict(const ForestModel& m, std::span<const double> x) {
  if (x.size() != m.arity) {
    throw argument_error("predict: expected " + std::to_string(m.arity) + " features, got " +
                         std::to_string(x.size()));
  }
  double sum = 0.0;
  for (const auto& t : m.trees) sum += t.predict(x);
  return sum / static_cast<double>(m.trees.size());
}

// ---------------------------------------------------------------------------------------------
// Gradient boosting (squared error)

struct GbmParams {
  std::size_t rounds = 100;
  TreeConfig tree{3, 1, 0.0};
  double learning_rate = 0.1;
  double l2 = 0.0;  // leaf value = sum(residual) / (count + l2)
  std::uint64_t seed = 0;
  std::size_t features_per_split = 0;  // 0 = all features
};

struct BoostModel {
  GbmParams params;
  std::size_t arity = 0;
  double initial = 0.0;  // F0 = mean training response
  std::vector<RegressionTree> stages;
  std::vector<double> training_mse;  // index m = MSE of F_m on the training set
};

/// F_m(x) = F_{m-1}(x) + nu h_m(x), starting from the training mean F_0. Each h_m is a
/// regression tree fit to the current residuals y - F_{m-1}(x).
inline BoostModel fit_gbm(const Dataset& d, const GbmParams& params) {
  if (!(params.learning_rate > 0.0 && params.learning_rate <= 1.0)) {
    throw argument_error("learning rate must lie in (0, 1]");
  }
  if (!(params.l2 >= 0.0) || !std::isfinite(params.l2)) {
    throw argument_error("L2 leaf penalty must be >= 0");
  }
  if (params.features_per_split > d.arity()) {
    throw argument_error("features per split exceeds feature count");
  }
  const auto x = d.feature_matrix();
  const auto y = d.responses();
  const std::size_t n = y.size();

  BoostModel model{params, d.arity(), 0.0, {}, {}};
  model.initial = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  std::vector<double> current(n, model.initial);
  std::vector<double> residual(n);

  const auto mse = [&] {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += (y[i] - current[i]) * (y[i] - current[i]);
    return acc / static_cast<double>(n);
  };
  model.training_mse.push_back(mse());

  for (std::size_t m = 0; m < params.rounds; ++m) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - current[i];
    const cart::SampleView view{x, residual, d.arity()};
    const cart::GrowOptions opt{params.features_per_split, Rng::derive(params.seed, m),
                                params.l2};
    model.stages.push_back(cart::fit_regression_tree(view, params.tree, opt));
    const auto& h = model.stages.back();
    for (std::size_t i = 0; i < n; ++i) {
      current[i] += params.learning_rate *
                    h.predict(std::span<const double>(x.data() + i * d.arity(), d.arity()));
    }
    model.training_mse.push_back(mse());
  }
  return model;
}

inline double predict(const BoostModel& m, std::span<const double> x) {
  if (x.size() != m.arity) {
    throw argument_error("predict: expected " + std::to_string(m.arity) + " features, got " +
                         std::to_string(x.size()));
  }
  double f = m.initial;
  for (const auto& h : m.stages) f += m.params.learning_rate * h.predict(x);
  return f;
}

// ---------------------------------------------------------------------------------------------
// Model plumbing

using ModelSpec = std::variant<ForestParams, GbmParams>;
using Model = std::variant<ForestModel, BoostModel>;

inline Model fit_model(const Dataset& d, const ModelSpec& spec) {
  return std::visit(
      [&](const auto& p) -> Model {
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, ForestParams>) {
          return fit_random_forest(d, p);
        } else {
          return fit_gbm(d, p);
        }
      },
      spec);
}

inline double predict_ensemble(const Model& m, std::span<const double> x) {
  return std::visit([&](const auto& model) { return predict(model, x); }, m);
}

inline std::vector<double> predict_all(const Model& m, const Dataset& d) {
  std::vector<double> out;
  out.reserve(d.size());
  for (const Run& r : d.runs()) out.push_back(predict_ensemble(m, r.factors));
  return out;
}

// ---------------------------------------------------------------------------------------------
// Feature importance

/// Impurity-based importance, normalized to sum 1 unless the model has no split at all.
struct FeatureImportance {
  std::vector<double> scores;

  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) -
                                    scores.begin());
  }
};

namespace detail {

inline std::vector<double> raw_importance(const RegressionTree& t) {
  std::vector<double> raw(t.arity(), 0.0);
  const double total = static_cast<double>(t.root().samples);
  for (const auto& n : t.nodes()) {
    if (!n.leaf) raw[n.feature] += static_cast<double>(n.samples) / total * n.impurity_decrease;
  }
  return raw;
}

inline FeatureImportance normalized(std::vector<double> raw) {
  const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
  if (sum > 0.0) {
    for (double& v : raw) v /= sum;
  }
  return {std::move(raw)};
}

}  // namespace detail

inline FeatureImportance feature_importance(const RegressionTree& t) {
  return detail::normalized(detail::raw_importance(t));
}

/// Per-tree normalized importances averaged over trees.
inline FeatureImportance feature_importance(const ForestModel& m) {
  std::vector<double> acc(m.arity, 0.0);
  for (const auto& t : m.trees) {
    const auto fi = feature_importance(t);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += fi.scores[j];
  }
  return detail::normalized(std::move(acc));
}

/// Raw decreases summed across stages; later stages fit smaller residuals and weigh less.
inline FeatureImportance feature_importance(const BoostModel& m) {
  std::vector<double> acc(m.arity, 0.0);
  for (const auto& t : m.stages) {
    const auto raw = detail::raw_importance(t);
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += raw[j];
  }
  return detail::normalized(std::move(acc));
}

inline FeatureImportance feature_importance(const Model& m) {
  return std::visit([](const auto& model) { return feature_importance(model); }, m);
}

// ---------------------------------------------------------------------------------------------
// Metrics and cross-validation

struct RegressionMetrics {
  std::size_t n = 0;
  double mse = 0.0;
  double mae = 0.0;
  /// 1 - SSE/SST with the evaluated set's own mean; absent for fewer than 2 points or
  /// zero-variance actual values.
  std::optional<double> r_squared;
};

inline RegressionMetrics regression_metrics(std::span<const double> y,
                                            std::span<const double> yhat) {
  if (y.size() != yhat.size()) {
    throw argument_error("regression_metrics: " + std::to_string(y.size()) + " actual vs " +
                         std::to_string(yhat.size()) + " predicted values");
  }
  if (y.empty()) throw argument_error("regression_metrics: no values");
  const double n = static_cast<double>(y.size());
  RegressionMetrics m;
  m.n = y.size();
  double sse = 0.0, sae = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - yhat[i];
    sse += e * e;
    sae += std::abs(e);
  }
  m.mse = sse / n;
  m.mae = sae / n;
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sst = 0.0;
  for (double v : y) sst += (v - mean) * (v - mean);
  if (y.size() >= 2 && sst > 0.0) m.r_squared = 1.0 - sse / sst;
  return m;
}

struct CrossValidation {
  std::vector<RegressionMetrics> folds;
  RegressionMetrics pooled;
  std::vector<double> predictions;  // held-out prediction per run, run order
};

/// Trains on the complement of each fold and predicts the fold. Pooled metrics cover every
/// held-out prediction.
inline CrossValidation cross_validate(const Dataset& d, const ModelSpec& spec,
                                      const FoldPlan& plan) {
  if (plan.assignments.size() != d.size()) {
    throw argument_error("fold plan covers " + std::to_string(plan.assignments.size()) +
                         " runs, dataset has " + std::to_string(d.size()));
  }
  CrossValidation cv;
  cv.predictions.assign(d.size(), 0.0);
  const auto y = d.responses();
  for (std::size_t f = 0; f < plan.k; ++f) {
    const auto test = plan.fold(f);
    const auto train = plan.complement(f);
    if (train.size() < 2) {
      throw argument_error("fold " + std::to_string(f) + ": training complement has " +
                           std::to_string(train.size()) + " runs, need at least 2");
    }
    if (test.empty()) continue;
    const Model model = fit_model(d.subset(train), spec);
    std::vector<double> actual, predicted;
    for (std::size_t i : test) {
      const double p = predict_ensemble(model, d.runs()[i].factors);
      cv.predictions[i] = p;
      actual.push_back(y[i]);
      predicted.push_back(p);
    }
    cv.folds.push_back(regression_metrics(actual, predicted));
  }
  cv.pooled = regression_metrics(y, cv.predictions);
  return cv;
}

}  // namespace weldopt::ensemble

#endif  // WELDOPT_ENSEMBLE_HPP
