#ifndef WELDOPT_SERIALIZE_HPP
#define WELDOPT_SERIALIZE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "weldopt/ensemble.hpp"
#include "weldopt/error.hpp"
#include "weldopt/tree.hpp"

// Versioned JSON documents for fitted models. Doubles are written in shortest round-trip form,
// so serialize -> load reproduces predictions exactly.

namespace weldopt::serialize {

using json = nlohmann::ordered_json;

inline constexpr const char* kFormat = "weldopt-model";
inline constexpr int kVersion = 1;

namespace detail {

inline json node_to_json(const cart::RegressionTree& t, std::size_t i) {
  const auto& n = t.nodes()[i];
  json j;
  j["samples"] = n.samples;
  j["value"] = n.value;
  if (!n.leaf) {
    j["feature"] = n.feature;
    j["threshold"] = n.threshold;
    j["impurity_decrease"] = n.impurity_decrease;
    j["left"] = node_to_json(t, n.left);
    j["right"] = node_to_json(t, n.right);
  }
  return j;
}

inline std::size_t node_from_json(const json& j, std::vector<cart::TreeNode>& nodes,
                                  std::size_t arity) {
  const std::size_t id = nodes.size();
  nodes.emplace_back();
  cart::TreeNode n;
  n.samples = j.at("samples").get<std::size_t>();
  n.value = j.at("value").get<double>();
  if (j.contains("feature")) {
    n.leaf = false;
    n.feature = j.at("feature").get<std::size_t>();
    if (n.feature >= arity) throw parse_error("tree node feature index out of range", 0, 0);
    n.threshold = j.at("threshold").get<double>();
    n.impurity_decrease = j.at("impurity_decrease").get<double>();
    n.left = node_from_json(j.at("left"), nodes, arity);
    n.right = node_from_json(j.at("right"), nodes, arity);
  }
  nodes[id] = n;
  return id;
}

inline json config_to_json(const cart::TreeConfig& c) {
  return json{{"max_depth", c.max_depth},
              {"min_samples_leaf", c.min_samples_leaf},
              {"min_impurity_decrease", c.min_impurity_decrease}};
}

inline cart::TreeConfig config_from_json(const json& j) {
  return {j.at("max_depth").get<std::size_t>(), j.at("min_samples_leaf").get<std::size_t>(),
          j.at("min_impurity_decrease").get<double>()};
}

}  // namespace detail

inline json tree_to_json(const cart::RegressionTree& t) {
  return json{{"arity", t.arity()}, {"root", detail::node_to_json(t, 0)}};
}

inline cart::RegressionTree tree_from_json(const json& j) {
  const auto arity = j.at("arity").get<std::size_t>();
  std::vector<cart::TreeNode> nodes;
  detail::node_from_json(j.at("root"), nodes, arity);
  return cart::RegressionTree(std::move(nodes), arity);
}

inline json to_json(const ensemble::ForestModel& m) {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["kind"] = "random_forest";
  j["arity"] = m.arity;
  j["seed"] = m.params.seed;
  j["bootstrap"] = m.params.bootstrap;
  j["features_per_split"] = m.params.features_per_split;
  j["tree_config"] = detail::config_to_json(m.params.tree);
  j["tree_seeds"] = m.tree_seeds;
  j["trees"] = json::array();
  for (const auto& t : m.trees) j["trees"].push_back(tree_to_json(t));
  return j;
}

inline json to_json(const ensemble::BoostModel& m) {
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["kind"] = "gradient_boosting";
  j["arity"] = m.arity;
  j["seed"] = m.params.seed;
  j["rounds"] = m.params.rounds;
  j["learning_rate"] = m.params.learning_rate;
  j["l2"] = m.params.l2;
  j["features_per_split"] = m.params.features_per_split;
  j["tree_config"] = detail::config_to_json(m.params.tree);
  j["initial"] = m.initial;
  j["training_mse"] = m.training_mse;
  j["stages"] = json::array();
  for (const auto& t : m.stages) j["stages"].push_back(tree_to_json(t));
  return j;
}

inline json to_json(const ensemble::Model& m) {
  return std::visit([](const auto& model) { return to_json(model); }, m);
}

inline ensemble::Model model_from_json(const json& j) {
  if (j.value("format", std::string{}) != kFormat) throw parse_error("not a weldopt model", 0, 0);
  if (j.at("version").get<int>() != kVersion) {
    throw parse_error("unsupported model version " + j.at("version").dump(), 0, 0);
  }
  const auto kind = j.at("kind").get<std::string>();
  const auto arity = j.at("arity").get<std::size_t>();
  if (kind == "random_forest") {
    ensemble::ForestModel m;
    m.arity = arity;
    m.params.seed = j.at("seed").get<std::uint64_t>();
    m.params.bootstrap = j.at("bootstrap").get<bool>();
    m.params.features_per_split = j.at("features_per_split").get<std::size_t>();
    m.params.tree = detail::config_from_json(j.at("tree_config"));
    m.tree_seeds = j.at("tree_seeds").get<std::vector<std::uint64_t>>();
    for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
    m.params.trees = m.trees.size();
    if (m.trees.empty()) throw parse_error("forest has no trees", 0, 0);
    return m;
  }
  if (kind == "gradient_boosting") {
    ensemble::BoostModel m;
    m.arity = arity;
    m.params.seed = j.at("seed").get<std::uint64_t>();
    m.params.rounds = j.at("rounds").get<std::size_t>();
    m.params.learning_rate = j.at("learning_rate").get<double>();
    m.params.l2 = j.at("l2").get<double>();
    m.params.features_per_split = j.at("features_per_split").get<std::size_t>();
    m.params.tree = detail::config_from_json(j.at("tree_config"));
    m.initial = j.at("initial").get<double>();
    m.training_mse = j.at("training_mse").get<std::vector<double>>();
    for (const auto& t : j.at("stages")) m.stages.push_back(tree_from_json(t));
    return m;
  }
  throw parse_error("unknown model kind '" + kind + "'", 0, 0);
}

inline std::string dump_model(const ensemble::Model& m) { return to_json(m).dump(2) + "\n"; }

inline ensemble::Model load_model(const std::string& text) {
  try {
    return model_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw parse_error(std::string("model JSON: ") + e.what(), 0, 0);
  }
}

}  // namespace weldopt::serialize

#endif  // WELDOPT_SERIALIZE_HPP
