#ifndef WELDOPT_REPORT_HPP
#define WELDOPT_REPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "weldopt/anova.hpp"
#include "weldopt/dataset.hpp"
#include "weldopt/ensemble.hpp"
#include "weldopt/error.hpp"
#include "weldopt/taguchi.hpp"
#include "weldopt/tree.hpp"

// End-to-end pipeline: ingestion -> Taguchi analysis -> ANOVA -> model fitting and
// cross-validation -> report in text, CSV or JSON.

namespace weldopt::report {

using json = nlohmann::ordered_json;

enum class Format { text, csv, json };

enum class Stage { taguchi, anova, model };

struct CvSpec {
  std::size_t k = 0;  // 0 = leave-one-out
};

struct RunConfig {
  std::optional<std::string> input_path;  // empty = builtin AA6262 data
  std::string response = "hardness";
  taguchi::Criterion criterion = taguchi::Criterion::larger_is_better;
  ensemble::ModelSpec model = ensemble::ForestParams{200, {}, 0, 0, true, 1};
  /// Features searched per split: a count (>= 1) or a fraction of the features (< 1).
  /// Unset keeps the model's features_per_split (0 = all).
  std::optional<double> features_per_split;
  CvSpec cv{};
  std::uint64_t seed = 0;
  Format format = Format::text;
  std::optional<std::string> out_dir;
  std::vector<Stage> stages{Stage::taguchi, Stage::anova, Stage::model};
};

struct TaguchiSection {
  taguchi::ResponseTable table;
  taguchi::DesignDiagnostics design;
  std::vector<taguchi::LevelChoice> optimum_raw;
  std::vector<taguchi::LevelChoice> optimum_sn;
};

struct AnovaSection {
  anova::AnovaTable table;
  anova::ModelSummary summary;
};

struct ModelSection {
  ensemble::Model model;
  ensemble::RegressionMetrics training;
  ensemble::CrossValidation cv;
  FoldPlan plan;
  ensemble::FeatureImportance importance;
  cart::RegressionTree tree;  // single tree on all runs, same tree settings as the model
};

struct Discrepancy {
  std::string item;
  std::string published;
  std::string computed;
  std::string note;
};

struct ReportDocument {
  RunConfig config;
  std::string source;  // "builtin:aa6262" or the CSV path
  Dataset data;
  SummaryStats summary;
  std::optional<TaguchiSection> taguchi;
  std::optional<AnovaSection> anova;
  std::optional<ModelSection> model;
  std::map<std::string, std::string> stage_errors;  // stage name -> message
  std::vector<std::string> warnings;
  std::vector<Discrepancy> discrepancies;

  bool any_stage_succeeded() const { return taguchi || anova || model; }
};

// ---------------------------------------------------------------------------------------------
// Formatting helpers

/// 6 significant digits, C locale.
inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// JSON number rounded to 6 significant digits; non-finite values become null.
inline json jnum(double v) {
  if (!std::isfinite(v)) return nullptr;
  return std::stod(num(v));
}

inline json jnum(const std::optional<double>& v) { return v ? jnum(*v) : json(nullptr); }

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::taguchi: return "taguchi";
    case Stage::anova: return "anova";
    case Stage::model: return "model";
  }
  return "?";
}

inline std::string model_kind(const ensemble::ModelSpec& spec) {
  return std::holds_alternative<ensemble::ForestParams>(spec) ? "rf" : "gbm";
}

namespace detail {

inline std::string level_tuple(const std::vector<taguchi::LevelChoice>& choice) {
  std::string s = "(";
  for (std::size_t i = 0; i < choice.size(); ++i) {
    s += (i ? ", " : "") + num(choice[i].setting);
  }
  return s + ")";
}

inline void add_builtin_discrepancies(ReportDocument& doc) {
  auto& log = doc.discrepancies;
  if (doc.anova) {
    const auto& t = doc.anova->table;
    log.push_back({"ANOVA total SS", "370.963", num(t.ss_total),
                   "published total is not reproducible from the 9 tabulated runs"});
    const char* published_ss[] = {"232.621", "2.965", "133.779"};
    for (std::size_t i = 0; i < t.sources.size() && i < 3; ++i) {
      log.push_back({"ANOVA adjusted SS (" + t.sources[i].source + ")", published_ss[i],
                     num(t.sources[i].ss), "depends on the unreproducible total"});
    }
    log.push_back({"ANOVA error SS", "1.597", num(t.ss_error), ""});
    const auto& s = doc.anova->summary;
    log.push_back({"Model summary S", "0.89370", num(s.s), ""});
    log.push_back({"Model summary R-sq", "99.57%", num(100.0 * s.r_squared) + "%", ""});
    log.push_back(
        {"Model summary R-sq(adj)", "98.28%", num(100.0 * s.r_squared_adjusted) + "%", ""});
    log.push_back({"Model summary R-sq(pred)", "91.28%",
                   s.r_squared_predicted ? num(100.0 * *s.r_squared_predicted) + "%" : "n/a",
                   ""});
  }
  if (doc.taguchi) {
    log.push_back({"optimal level combination", "A3 B2 C3 = (1200, 50, 0.3)",
                   "raw " + level_tuple(doc.taguchi->optimum_raw) + ", S/N " +
                       level_tuple(doc.taguchi->optimum_sn),
                   "maximum tabulated response 74.2 is at (1000, 60, 0.1)"});
  }
  if (doc.model) {
    const bool rf = std::holds_alternative<ensemble::ForestModel>(doc.model->model);
    const auto& p = doc.model->cv.pooled;
    log.push_back({rf ? "random forest MSE / MAE / R-sq" : "boosting MSE / MAE / R-sq",
                   rf ? "4.42 / 1.979 / 0.62" : "4.14 / 1.99 / 0.65",
                   num(p.mse) + " / " + num(p.mae) + " / " +
                       (p.r_squared ? num(*p.r_squared) : std::string("n/a")),
                   "published split, seed and hyperparameters unknown; computed values are "
                   "cross-validated"});
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Pipeline

/// Count for values >= 1 (must be integral), ceil(value * arity) for values in (0, 1).
inline std::size_t resolve_features_per_split(double value, std::size_t arity) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw argument_error("features per split must be positive");
  }
  std::size_t m = 0;
  if (value < 1.0) {
    m = static_cast<std::size_t>(std::ceil(value * static_cast<double>(arity)));
  } else {
    if (value != std::floor(value)) {
      throw argument_error("features per split >= 1 must be a whole number");
    }
    m = static_cast<std::size_t>(value);
  }
  if (m < 1 || m > arity) {
    throw argument_error("features per split must lie in [1, " + std::to_string(arity) + "]");
  }
  return m;
}

/// Loads the input named by the config. Throws io_error / schema_error / parse_error.
inline std::pair<Dataset, std::string> load_input(const RunConfig& cfg) {
  if (!cfg.input_path) return {builtin_aa6262(), "builtin:aa6262"};
  CsvSchema schema;
  schema.response_column = cfg.response;
  return {load_csv(*cfg.input_path, schema), *cfg.input_path};
}

/// Runs every configured stage. A failing stage is recorded in stage_errors and the remaining
/// stages still run.
inline ReportDocument run_pipeline(const RunConfig& cfg) {
  auto [data, source] = load_input(cfg);
  ReportDocument doc{cfg, source, data, summarize(data), {}, {}, {}, {}, {}, {}};

  const auto wants = [&](Stage s) {
    return std::find(cfg.stages.begin(), cfg.stages.end(), s) != cfg.stages.end();
  };

  if (wants(Stage::taguchi)) {
    try {
      TaguchiSection t{taguchi::response_table(data, cfg.criterion), taguchi::check_design(data),
                       {}, {}};
      t.optimum_raw = taguchi::optimal_combination(t.table, taguchi::Basis::raw);
      t.optimum_sn = taguchi::optimal_combination(t.table, taguchi::Basis::s_n);
      for (std::size_t j = 0; j < t.design.balanced.size(); ++j) {
        if (!t.design.balanced[j]) {
          doc.warnings.push_back("factor '" + t.design.factors[j] + "' is not balanced");
        }
      }
      for (const auto& p : t.design.pairs) {
        if (!p.orthogonal) {
          doc.warnings.push_back("design is not orthogonal for pair (" +
                                 t.design.factors[p.first] + ", " + t.design.factors[p.second] +
                                 "); main effects are confounded and analysed anyway");
        }
      }
      doc.taguchi = std::move(t);
    } catch (const error& e) {
      doc.stage_errors["taguchi"] = e.what();
    }
  }

  if (wants(Stage::anova)) {
    try {
      const auto fit = anova::fit_glm(data);
      doc.anova = AnovaSection{anova::anova_table(fit), anova::model_summary(fit)};
    } catch (const error& e) {
      doc.stage_errors["anova"] = e.what();
    }
  }

  if (wants(Stage::model)) {
    try {
      auto spec = cfg.model;
      std::visit([&](auto& p) { p.seed = cfg.seed; }, spec);
      if (cfg.features_per_split) {
        const std::size_t m = resolve_features_per_split(*cfg.features_per_split, data.arity());
        std::visit([&](auto& p) { p.features_per_split = m; }, spec);
      }
      const std::size_t k = cfg.cv.k == 0 ? data.size() : cfg.cv.k;
      const FoldPlan plan = kfold_plan(data.size(), k, cfg.seed);
      ensemble::Model model = ensemble::fit_model(data, spec);
      const auto y = data.responses();
      const auto fitted = ensemble::predict_all(model, data);
      const auto tree_cfg = std::visit([](const auto& p) { return p.tree; }, spec);
      doc.model = ModelSection{model,
                               ensemble::regression_metrics(y, fitted),
                               ensemble::cross_validate(data, spec, plan),
                               plan,
                               ensemble::feature_importance(model),
                               cart::fit_regression_tree(data, tree_cfg)};
    } catch (const error& e) {
      doc.stage_errors["model"] = e.what();
    }
  }

  if (data == builtin_aa6262()) detail::add_builtin_discrepancies(doc);
  return doc;
}

// ---------------------------------------------------------------------------------------------
// JSON

inline json config_json(const RunConfig& cfg, const std::string& source) {
  json j;
  j["input"] = source;
  j["response"] = cfg.response;
  j["criterion"] = taguchi::criterion_name(cfg.criterion);
  j["seed"] = cfg.seed;
  j["cv"] = cfg.cv.k == 0 ? std::string("loo") : "k:" + std::to_string(cfg.cv.k);
  j["model"] = model_kind(cfg.model);
  std::visit(
      [&](const auto& p) {
        j["max_depth"] = p.tree.max_depth;
        j["min_samples_leaf"] = p.tree.min_samples_leaf;
        j["features_per_split"] = p.features_per_split;
        if constexpr (std::is_same_v<std::decay_t<decltype(p)>, ensemble::ForestParams>) {
          j["trees"] = p.trees;
          j["bootstrap"] = p.bootstrap;
        } else {
          j["rounds"] = p.rounds;
          j["learning_rate"] = jnum(p.learning_rate);
          j["l2"] = jnum(p.l2);
        }
      },
      cfg.model);
  if (cfg.features_per_split) j["features_per_split"] = jnum(*cfg.features_per_split);
  return j;
}

inline json metrics_json(const ensemble::RegressionMetrics& m) {
  return json{{"n", m.n}, {"mse", jnum(m.mse)}, {"mae", jnum(m.mae)},
              {"r_squared", jnum(m.r_squared)}};
}

inline json to_json(const ReportDocument& doc) {
  json j;
  j["config"] = config_json(doc.config, doc.source);

  json ds;
  ds["runs"] = doc.data.size();
  ds["columns"] = doc.summary.columns;
  json cols = json::array();
  for (std::size_t c = 0; c < doc.summary.columns.size(); ++c) {
    cols.push_back(json{{"name", doc.summary.columns[c]},
                        {"min", jnum(doc.summary.min[c])},
                        {"max", jnum(doc.summary.max[c])},
                        {"mean", jnum(doc.summary.mean[c])},
                        {"std", jnum(doc.summary.stddev[c])}});
  }
  ds["statistics"] = cols;
  json corr = json::array();
  for (const auto& row : doc.summary.correlation) {
    json r = json::array();
    for (const auto& v : row) r.push_back(jnum(v));
    corr.push_back(r);
  }
  ds["correlation"] = corr;
  j["dataset"] = ds;

  j["warnings"] = doc.warnings;

  if (doc.taguchi) {
    const auto& t = *doc.taguchi;
    json tj;
    tj["criterion"] = taguchi::criterion_name(t.table.criterion);
    json factors = json::array();
    for (const auto& fe : t.table.factors) {
      json levels = json::array();
      for (std::size_t l = 0; l < fe.levels.levels.size(); ++l) {
        levels.push_back(json{{"level", l + 1},
                              {"setting", jnum(fe.levels.levels[l])},
                              {"count", fe.counts[l]},
                              {"mean", jnum(fe.raw_means[l])},
                              {"sn_mean", jnum(fe.sn_means[l])}});
      }
      factors.push_back(json{{"factor", fe.levels.factor},
                             {"levels", levels},
                             {"delta", jnum(fe.raw_delta)},
                             {"rank", fe.raw_rank},
                             {"sn_delta", jnum(fe.sn_delta)},
                             {"sn_rank", fe.sn_rank}});
    }
    tj["response_table"] = factors;
    const auto choice = [](const std::vector<taguchi::LevelChoice>& v) {
      json a = json::array();
      for (const auto& c : v) {
        a.push_back(json{{"factor", c.factor}, {"level", c.level_number},
                         {"setting", jnum(c.setting)}});
      }
      return a;
    };
    tj["optimum_raw"] = choice(t.optimum_raw);
    tj["optimum_sn"] = choice(t.optimum_sn);
    json design;
    json balanced = json::object();
    for (std::size_t f = 0; f < t.design.factors.size(); ++f) {
      balanced[t.design.factors[f]] = static_cast<bool>(t.design.balanced[f]);
    }
    design["balanced"] = balanced;
    json pairs = json::array();
    for (const auto& p : t.design.pairs) {
      pairs.push_back(json{{"first", t.design.factors[p.first]},
                           {"second", t.design.factors[p.second]},
                           {"orthogonal", p.orthogonal}});
    }
    design["pairs"] = pairs;
    tj["design"] = design;
    j["taguchi"] = tj;
  }

  if (doc.anova) {
    const auto& a = *doc.anova;
    json rows = json::array();
    for (const auto& r : a.table.sources) {
      rows.push_back(json{{"source", r.source},
                          {"df", r.df},
                          {"adjusted_ss", jnum(r.ss)},
                          {"adjusted_ms", jnum(r.ms)},
                          {"f", jnum(r.f)},
                          {"p", jnum(r.p)},
                          {"significant", r.significant}});
    }
    json aj;
    aj["sources"] = rows;
    aj["error"] = json{{"df", a.table.df_error},
                       {"ss", jnum(a.table.ss_error)},
                       {"ms", jnum(a.table.ms_error)}};
    aj["total"] = json{{"df", a.table.df_total}, {"ss", jnum(a.table.ss_total)}};
    aj["summary"] = json{{"s", jnum(a.summary.s)},
                         {"r_squared", jnum(a.summary.r_squared)},
                         {"r_squared_adjusted", jnum(a.summary.r_squared_adjusted)},
                         {"r_squared_predicted", jnum(a.summary.r_squared_predicted)},
                         {"press", jnum(a.summary.press)}};
    j["anova"] = aj;
  }

  if (doc.model) {
    const auto& m = *doc.model;
    json mj;
    mj["kind"] = std::holds_alternative<ensemble::ForestModel>(m.model) ? "random_forest"
                                                                       : "gradient_boosting";
    mj["training"] = metrics_json(m.training);
    json cv;
    cv["k"] = m.plan.k;
    cv["assignments"] = m.plan.assignments;
    json folds = json::array();
    for (const auto& f : m.cv.folds) folds.push_back(metrics_json(f));
    cv["folds"] = folds;
    cv["pooled"] = metrics_json(m.cv.pooled);
    json preds = json::array();
    for (double p : m.cv.predictions) preds.push_back(jnum(p));
    cv["predictions"] = preds;
    mj["cross_validation"] = cv;
    json fi = json::object();
    for (std::size_t f = 0; f < m.importance.scores.size(); ++f) {
      fi[doc.data.factor_names()[f]] = jnum(m.importance.scores[f]);
    }
    mj["feature_importance"] = fi;
    if (const auto* b = std::get_if<ensemble::BoostModel>(&m.model)) {
      json mse = json::array();
      for (double v : b->training_mse) mse.push_back(jnum(v));
      mj["training_mse_by_round"] = mse;
    }
    mj["decision_tree"] = cart::export_tree(m.tree, cart::ExportFormat::text,
                                            doc.data.factor_names());
    j["model"] = mj;
  }

  json errors = json::object();
  for (const auto& [stage, msg] : doc.stage_errors) errors[stage] = msg;
  j["stage_errors"] = errors;

  json disc = json::array();
  for (const auto& d : doc.discrepancies) {
    disc.push_back(json{{"item", d.item}, {"published", d.published}, {"computed", d.computed},
                        {"note", d.note}});
  }
  j["discrepancies"] = disc;
  return j;
}

// ---------------------------------------------------------------------------------------------
// Text

namespace detail {

/// Column-aligned table: first column left-aligned, the rest right-aligned.
inline std::string table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) {
      const std::size_t pad = width[c] - r[c].size();
      if (c == 0) {
        line += r[c] + std::string(pad, ' ');
      } else {
        line += "  " + std::string(pad, ' ') + r[c];
      }
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

inline std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : "n/a"; }

inline std::string pct(const std::optional<double>& v) {
  return v ? num(100.0 * *v) + "%" : "n/a";
}

}  // namespace detail

inline std::string anova_text(const AnovaSection& a) {
  std::vector<std::vector<std::string>> rows{
      {"Source", "DF", "Adjusted SS", "Adjusted MS", "F-Value", "P-Value"}};
  for (const auto& r : a.table.sources) {
    rows.push_back({r.source, std::to_string(r.df), num(r.ss), num(r.ms), num(r.f),
                    num(r.p) + (r.significant ? " *" : "")});
  }
  rows.push_back({"Error", std::to_string(a.table.df_error), num(a.table.ss_error),
                  num(a.table.ms_error), "", ""});
  rows.push_back({"Total", std::to_string(a.table.df_total), num(a.table.ss_total), "", "", ""});
  std::string out = "Analysis of Variance\n" + detail::table(rows);
  out += "(* significant at alpha = 0.05)\n\nModel Summary\n";
  out += detail::table({{"S", "R-sq", "R-sq(adj)", "R-sq(pred)"},
                        {num(a.summary.s), detail::pct(a.summary.r_squared),
                         detail::pct(a.summary.r_squared_adjusted),
                         detail::pct(a.summary.r_squared_predicted)}});
  return out;
}

inline std::string to_text(const ReportDocument& doc) {
  std::string out;
  out += "weldopt report\n==============\n";
  const json cfg = config_json(doc.config, doc.source);
  for (const auto& [key, value] : cfg.items()) {
    out += key + ": " + (value.is_string() ? value.get<std::string>() : value.dump()) + "\n";
  }

  out += "\nDataset (" + std::to_string(doc.data.size()) + " runs)\n";
  std::vector<std::vector<std::string>> stats{{"Column", "Min", "Max", "Mean", "Std (pop.)"}};
  for (std::size_t c = 0; c < doc.summary.columns.size(); ++c) {
    stats.push_back({doc.summary.columns[c], num(doc.summary.min[c]), num(doc.summary.max[c]),
                     num(doc.summary.mean[c]), num(doc.summary.stddev[c])});
  }
  out += detail::table(stats);
  out += "\nCorrelation\n";
  std::vector<std::vector<std::string>> corr{{""}};
  for (const auto& c : doc.summary.columns) corr.front().push_back(c);
  for (std::size_t a = 0; a < doc.summary.columns.size(); ++a) {
    corr.push_back({doc.summary.columns[a]});
    for (const auto& v : doc.summary.correlation[a]) corr.back().push_back(detail::opt_num(v));
  }
  out += detail::table(corr);

  if (!doc.warnings.empty()) {
    out += "\nWarnings\n";
    for (const auto& w : doc.warnings) out += "  - " + w + "\n";
  }

  if (doc.taguchi) {
    const auto& t = *doc.taguchi;
    out += "\nResponse Table (means, S/N criterion: " +
           std::string(taguchi::criterion_name(t.table.criterion)) + ")\n";
    std::vector<std::vector<std::string>> rows{
        {"Factor", "Level", "Setting", "Count", "Mean", "S/N mean (dB)"}};
    for (const auto& fe : t.table.factors) {
      for (std::size_t l = 0; l < fe.levels.levels.size(); ++l) {
        rows.push_back({fe.levels.factor, std::to_string(l + 1), num(fe.levels.levels[l]),
                        std::to_string(fe.counts[l]), num(fe.raw_means[l]),
                        num(fe.sn_means[l])});
      }
    }
    out += detail::table(rows);
    std::vector<std::vector<std::string>> deltas{
        {"Factor", "Delta", "Rank", "S/N delta", "S/N rank"}};
    for (const auto& fe : t.table.factors) {
      deltas.push_back({fe.levels.factor, num(fe.raw_delta), std::to_string(fe.raw_rank),
                        num(fe.sn_delta), std::to_string(fe.sn_rank)});
    }
    out += "\n" + detail::table(deltas);
    out += "\nOptimal levels (means): " + detail::level_tuple(t.optimum_raw) + "\n";
    out += "Optimal levels (S/N):   " + detail::level_tuple(t.optimum_sn) + "\n";
    out += "\nDesign: ";
    out += t.design.fully_orthogonal() ? "pairwise orthogonal\n" : "NOT pairwise orthogonal\n";
  }

  if (doc.anova) out += "\n" + anova_text(*doc.anova);

  if (doc.model) {
    const auto& m = *doc.model;
    const bool rf = std::holds_alternative<ensemble::ForestModel>(m.model);
    out += std::string("\nModel: ") + (rf ? "random forest" : "gradient boosting") + "\n";
    std::vector<std::vector<std::string>> rows{{"Evaluation", "Mean Square Error (MSE)",
                                                "Mean Absolute Error", "R-sq"}};
    rows.push_back({"training", num(m.training.mse), num(m.training.mae),
                    detail::opt_num(m.training.r_squared)});
    rows.push_back({m.plan.k == doc.data.size() ? "leave-one-out"
                                                : std::to_string(m.plan.k) + "-fold CV",
                    num(m.cv.pooled.mse), num(m.cv.pooled.mae),
                    detail::opt_num(m.cv.pooled.r_squared)});
    out += detail::table(rows);
    out += "\nFeature importance\n";
    std::vector<std::vector<std::string>> fi{{"Feature", "Importance"}};
    for (std::size_t f = 0; f < m.importance.scores.size(); ++f) {
      fi.push_back({doc.data.factor_names()[f], num(m.importance.scores[f])});
    }
    out += detail::table(fi);
    out += "\nDecision tree (all runs)\n" +
           cart::export_tree(m.tree, cart::ExportFormat::text, doc.data.factor_names());
  }

  if (!doc.stage_errors.empty()) {
    out += "\nStage errors\n";
    for (const auto& [stage, msg] : doc.stage_errors) out += "  " + stage + ": " + msg + "\n";
  }
  if (!doc.discrepancies.empty()) {
    out += "\nDiscrepancies against published values\n";
    std::vector<std::vector<std::string>> rows{{"Item", "Published", "Computed", "Note"}};
    for (const auto& d : doc.discrepancies) {
      rows.push_back({d.item, d.published, d.computed, d.note});
    }
    out += detail::table(rows);
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// CSV

/// One CSV document per section, keyed by file name.
inline std::map<std::string, std::string> to_csv_files(const ReportDocument& doc) {
  std::map<std::string, std::string> files;
  const auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };

  files["dataset.csv"] = to_csv(doc.data);
  {
    std::string s = "column,min,max,mean,std\n";
    for (std::size_t c = 0; c < doc.summary.columns.size(); ++c) {
      s += doc.summary.columns[c] + "," + num(doc.summary.min[c]) + "," +
           num(doc.summary.max[c]) + "," + num(doc.summary.mean[c]) + "," +
           num(doc.summary.stddev[c]) + "\n";
    }
    files["summary.csv"] = s;
    std::string c = "column";
    for (const auto& name : doc.summary.columns) c += "," + name;
    c += "\n";
    for (std::size_t a = 0; a < doc.summary.columns.size(); ++a) {
      c += doc.summary.columns[a];
      for (const auto& v : doc.summary.correlation[a]) c += "," + (v ? num(*v) : "");
      c += "\n";
    }
    files["correlation.csv"] = c;
  }

  if (doc.taguchi) {
    const auto& t = *doc.taguchi;
    std::string rt = "factor,level,setting,count,mean,sn_mean\n";
    std::string me = "factor,setting,mean\n";
    std::string sn = "factor,setting,sn_mean\n";
    for (const auto& fe : t.table.factors) {
      for (std::size_t l = 0; l < fe.levels.levels.size(); ++l) {
        const std::string f = fe.levels.factor;
        const std::string setting = num(fe.levels.levels[l]);
        rt += f + "," + std::to_string(l + 1) + "," + setting + "," +
              std::to_string(fe.counts[l]) + "," + num(fe.raw_means[l]) + "," +
              num(fe.sn_means[l]) + "\n";
        me += f + "," + setting + "," + num(fe.raw_means[l]) + "\n";
        sn += f + "," + setting + "," + num(fe.sn_means[l]) + "\n";
      }
    }
    files["response_table.csv"] = rt;
    files["main_effects.csv"] = me;
    files["sn_ratios.csv"] = sn;
    std::string design = "first,second,orthogonal\n";
    for (const auto& p : t.design.pairs) {
      design += t.design.factors[p.first] + "," + t.design.factors[p.second] + "," +
                (p.orthogonal ? "true" : "false") + "\n";
    }
    files["design_pairs.csv"] = design;
    std::string opt = "basis,factor,level,setting\n";
    for (const auto& c : t.optimum_raw) {
      opt += "mean," + c.factor + "," + std::to_string(c.level_number) + "," + num(c.setting) +
             "\n";
    }
    for (const auto& c : t.optimum_sn) {
      opt += "sn," + c.factor + "," + std::to_string(c.level_number) + "," + num(c.setting) +
             "\n";
    }
    files["optimum.csv"] = opt;
  }

  if (doc.anova) {
    const auto& a = *doc.anova;
    std::string s = "source,df,adjusted_ss,adjusted_ms,f,p\n";
    for (const auto& r : a.table.sources) {
      s += r.source + "," + std::to_string(r.df) + "," + num(r.ss) + "," + num(r.ms) + "," +
           num(r.f) + "," + num(r.p) + "\n";
    }
    s += "Error," + std::to_string(a.table.df_error) + "," + num(a.table.ss_error) + "," +
         num(a.table.ms_error) + ",,\n";
    s += "Total," + std::to_string(a.table.df_total) + "," + num(a.table.ss_total) + ",,,\n";
    files["anova.csv"] = s;
    files["model_summary.csv"] =
        "s,r_squared,r_squared_adjusted,r_squared_predicted\n" + num(a.summary.s) + "," +
        num(a.summary.r_squared) + "," + num(a.summary.r_squared_adjusted) + "," +
        detail::opt_num(a.summary.r_squared_predicted) + "\n";
  }

  if (doc.model) {
    const auto& m = *doc.model;
    const auto row = [](const std::string& name, const ensemble::RegressionMetrics& r) {
      return name + "," + std::to_string(r.n) + "," + num(r.mse) + "," + num(r.mae) + "," +
             (r.r_squared ? num(*r.r_squared) : "") + "\n";
    };
    std::string s = "evaluation,n,mse,mae,r_squared\n";
    s += row("training", m.training);
    s += row("cv_pooled", m.cv.pooled);
    for (std::size_t f = 0; f < m.cv.folds.size(); ++f) {
      s += row("cv_fold_" + std::to_string(f), m.cv.folds[f]);
    }
    files["metrics.csv"] = s;
    std::string p = "run,fold,actual,predicted\n";
    for (std::size_t i = 0; i < doc.data.size(); ++i) {
      p += std::to_string(i + 1) + "," + std::to_string(m.plan.assignments[i]) + "," +
           num(doc.data.runs()[i].response) + "," + num(m.cv.predictions[i]) + "\n";
    }
    files["cv_predictions.csv"] = p;
    std::string fi = "feature,importance\n";
    for (std::size_t f = 0; f < m.importance.scores.size(); ++f) {
      fi += doc.data.factor_names()[f] + "," + num(m.importance.scores[f]) + "\n";
    }
    files["feature_importance.csv"] = fi;
  }

  std::string w = "warning\n";
  for (const auto& msg : doc.warnings) w += quote(msg) + "\n";
  files["warnings.csv"] = w;
  std::string e = "stage,error\n";
  for (const auto& [stage, msg] : doc.stage_errors) e += stage + "," + quote(msg) + "\n";
  files["stage_errors.csv"] = e;
  std::string d = "item,published,computed,note\n";
  for (const auto& x : doc.discrepancies) {
    d += quote(x.item) + "," + quote(x.published) + "," + quote(x.computed) + "," +
         quote(x.note) + "\n";
  }
  files["discrepancies.csv"] = d;
  return files;
}

// ---------------------------------------------------------------------------------------------
// Rendering to disk

/// Rendered documents for `format`, keyed by file name.
inline std::map<std::string, std::string> render_files(const ReportDocument& doc, Format format) {
  switch (format) {
    case Format::text: {
      std::map<std::string, std::string> files{{"report.txt", to_text(doc)}};
      if (doc.model) {
        files["decision_tree.dot"] = cart::export_tree(doc.model->tree, cart::ExportFormat::graph,
                                                       doc.data.factor_names());
      }
      return files;
    }
    case Format::csv: return to_csv_files(doc);
    case Format::json: return {{"report.json", to_json(doc).dump(2) + "\n"}};
  }
  return {};
}

/// Writes the rendered files into `dir` (created if missing). Throws io_error.
inline std::vector<std::filesystem::path> render(const ReportDocument& doc, Format format,
                                                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw io_error("cannot create output directory '" + dir.string() + "'");
  }
  std::vector<std::filesystem::path> written;
  for (const auto& [name, content] : render_files(doc, format)) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw io_error("write failed for '" + path.string() + "'");
    written.push_back(path);
  }
  return written;
}

}  // namespace weldopt::report

#endif  // WELDOPT_REPORT_HPP
