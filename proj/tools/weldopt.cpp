// weldopt command-line front end.
//
//   weldopt report --builtin aa6262 --model rf --trees 200 --seed 7 --format json --out out/
//
// Exit codes: 0 success, 1 every analysis stage failed, 2 usage error, 3 input/output error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "weldopt/report.hpp"
#include "weldopt/serialize.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitStagesFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct Options {
  std::optional<std::string> input;
  std::optional<std::string> builtin;
  std::string response = "hardness";
  std::string criterion = "larger";
  std::string model = "rf";
  std::size_t trees = 200;
  std::size_t rounds = 100;
  std::optional<std::size_t> depth;
  double nu = 0.1;
  double lambda = 0.0;
  std::optional<double> m;
  std::string cv = "loo";
  std::uint64_t seed = 0;
  std::string format = "text";
  std::optional<std::string> out;
  std::size_t threads = 1;
};

weldopt::report::RunConfig to_config(const Options& o) {
  using namespace weldopt;
  report::RunConfig cfg;
  if (o.input && o.builtin) throw CLI::ValidationError("--input and --builtin are exclusive");
  if (o.builtin && *o.builtin != "aa6262") {
    throw CLI::ValidationError("unknown builtin dataset '" + *o.builtin + "'");
  }
  cfg.input_path = o.input;
  cfg.response = o.response;

  if (o.criterion == "larger") {
    cfg.criterion = taguchi::Criterion::larger_is_better;
  } else if (o.criterion == "smaller") {
    cfg.criterion = taguchi::Criterion::smaller_is_better;
  } else {
    cfg.criterion = taguchi::Criterion::nominal_is_best;
  }

  if (o.model == "rf") {
    ensemble::ForestParams p;
    p.trees = o.trees;
    p.tree.max_depth = o.depth.value_or(0);
    p.threads = o.threads;
    cfg.model = p;
  } else {
    ensemble::GbmParams p;
    p.rounds = o.rounds;
    p.tree.max_depth = o.depth.value_or(3);
    p.learning_rate = o.nu;
    p.l2 = o.lambda;
    cfg.model = p;
  }
  if (!(o.nu > 0.0 && o.nu <= 1.0)) throw CLI::ValidationError("--nu must lie in (0, 1]");
  if (!(o.lambda >= 0.0)) throw CLI::ValidationError("--lambda must be >= 0");
  if (o.m) {
    try {
      report::resolve_features_per_split(*o.m, CsvSchema{}.factor_columns.size());
    } catch (const argument_error& e) {
      throw CLI::ValidationError(std::string("--m: ") + e.what());
    }
  }
  cfg.features_per_split = o.m;

  if (o.cv == "loo") {
    cfg.cv.k = 0;
  } else if (o.cv.rfind("k:", 0) == 0) {
    try {
      std::size_t used = 0;
      const auto k = std::stoul(o.cv.substr(2), &used);
      if (used != o.cv.size() - 2 || k < 2) throw std::invalid_argument("k");
      cfg.cv.k = k;
    } catch (const std::exception&) {
      throw CLI::ValidationError("--cv expects loo or k:<K> with K >= 2");
    }
  } else {
    throw CLI::ValidationError("--cv expects loo or k:<K>");
  }

  cfg.seed = o.seed;
  cfg.format = o.format == "csv"    ? report::Format::csv
               : o.format == "json" ? report::Format::json
                                    : report::Format::text;
  cfg.out_dir = o.out;
  return cfg;
}

void add_common_options(CLI::App& app, Options& o) {
  app.add_option("--input", o.input, "CSV file with columns rpm,traverse_mm_min,plan_depth_mm,"
                                     "<response>");
  app.add_option("--builtin", o.builtin, "Embedded dataset (aa6262); default when no --input");
  app.add_option("--response", o.response, "Response column name")->capture_default_str();
  app.add_option("--criterion", o.criterion, "S/N criterion")
      ->check(CLI::IsMember({"larger", "smaller", "nominal"}))
      ->capture_default_str();
  app.add_option("--model", o.model, "Ensemble model")
      ->check(CLI::IsMember({"rf", "gbm"}))
      ->capture_default_str();
  app.add_option("--trees", o.trees, "Random forest tree count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--rounds", o.rounds, "Boosting rounds")->capture_default_str();
  app.add_option("--depth", o.depth, "Maximum tree depth, 0 = unlimited (rf default 0, gbm 3)");
  app.add_option("--nu", o.nu, "Boosting learning rate in (0, 1]")->capture_default_str();
  app.add_option("--lambda", o.lambda, "Boosting L2 leaf penalty")->capture_default_str();
  app.add_option("--m", o.m, "Features per split: count, or fraction when < 1 (default all)");
  app.add_option("--cv", o.cv, "Cross-validation: loo or k:<K>")->capture_default_str();
  app.add_option("--seed", o.seed, "Seed for every random draw")->capture_default_str();
  app.add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"text", "csv", "json"}))
      ->capture_default_str();
  app.add_option("--out", o.out, "Output directory (default: stdout)");
  app.add_option("--threads", o.threads, "Forest training threads (result is identical)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

int emit(const weldopt::report::ReportDocument& doc, const weldopt::report::RunConfig& cfg) {
  using namespace weldopt;
  if (cfg.out_dir) {
    report::render(doc, cfg.format, *cfg.out_dir);
    if (doc.model) {
      const auto path = std::filesystem::path(*cfg.out_dir) / "model.json";
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) throw io_error("cannot write '" + path.string() + "'");
      out << serialize::dump_model(doc.model->model);
    }
  } else {
    const auto files = report::render_files(doc, cfg.format);
    const bool several = files.size() > 1;
    for (const auto& [name, content] : files) {
      if (several) std::cout << "# " << name << "\n";
      std::cout << content;
      if (several) std::cout << "\n";
    }
  }
  for (const auto& [stage, msg] : doc.stage_errors) {
    std::cerr << "weldopt: " << stage << " stage failed: " << msg << "\n";
  }
  return doc.any_stage_succeeded() ? kExitOk : kExitStagesFailed;
}

}  // namespace

int main(int argc, char** argv) {
  using weldopt::report::Stage;

  CLI::App app{"Taguchi, ANOVA and tree-ensemble analysis of process-parameter data"};
  app.require_subcommand(1);
  Options opts;
  add_common_options(app, opts);
  app.fallthrough();

  std::vector<Stage> stages;
  app.add_subcommand("taguchi", "S/N ratios, response table, optimum levels, design checks")
      ->callback([&] { stages = {Stage::taguchi}; });
  app.add_subcommand("anova", "Main-effects ANOVA and model summary")
      ->callback([&] { stages = {Stage::anova}; });
  app.add_subcommand("fit", "Random forest or boosting with cross-validation")
      ->callback([&] { stages = {Stage::model}; });
  app.add_subcommand("report", "Full pipeline")->callback([&] {
    stages = {Stage::taguchi, Stage::anova, Stage::model};
  });

  weldopt::report::RunConfig cfg;
  try {
    app.parse(argc, argv);
    cfg = to_config(opts);
    cfg.stages = stages;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const auto doc = weldopt::report::run_pipeline(cfg);
    return emit(doc, cfg);
  } catch (const weldopt::error& e) {
    // Stages trap their own failures, so anything escaping is input or output trouble.
    std::cerr << "weldopt: " << e.what() << "\n";
    return kExitIo;
  }
}
