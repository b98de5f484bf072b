#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "perfreg/errors.hpp"
#include "perfreg/io/tables.hpp"
#include "perfreg/personalize.hpp"

namespace perfreg {

namespace detail {

inline nlohmann::json regression_tree_to_json(const RegressionTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const RegressionTree::Node& n : tree.nodes) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"value", n.value}});
  }
  return nodes;
}

inline RegressionTree regression_tree_from_json(const nlohmann::json& nodes) {
  RegressionTree tree;
  for (const nlohmann::json& n : nodes) {
    RegressionTree::Node node;
    node.feature = n.at("feature").get<int>();
    node.threshold = n.at("threshold").get<double>();
    node.left = n.at("left").get<int>();
    node.right = n.at("right").get<int>();
    node.value = n.at("value").get<double>();
    tree.nodes.push_back(node);
  }
  if (tree.nodes.empty()) throw DataError("model manifest: empty tree");
  return tree;
}

inline nlohmann::json classification_tree_to_json(const ClassificationTree& tree) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const ClassificationTree::Node& n : tree.nodes) {
    nodes.push_back({{"feature", n.feature},
                     {"threshold", n.threshold},
                     {"left", n.left},
                     {"right", n.right},
                     {"label", n.label}});
  }
  return nodes;
}

inline ClassificationTree classification_tree_from_json(const nlohmann::json& nodes) {
  ClassificationTree tree;
  for (const nlohmann::json& n : nodes) {
    ClassificationTree::Node node;
    node.feature = n.at("feature").get<int>();
    node.threshold = n.at("threshold").get<double>();
    node.left = n.at("left").get<int>();
    node.right = n.at("right").get<int>();
    node.label = n.at("label").get<int>();
    tree.nodes.push_back(node);
  }
  if (tree.nodes.empty()) throw DataError("model manifest: empty tree");
  return tree;
}

inline nlohmann::json regressor_to_json(const TrainedRegressor& model) {
  nlohmann::json trees = nlohmann::json::array();
  for (const RegressionTree& t : model.trees) trees.push_back(regression_tree_to_json(t));
  return {{"name", model.config.canonical_name()},
          {"n_features", model.n_features},
          {"bootstrap_seeds", model.bootstrap_seeds},
          {"training_fingerprint", model.training_fingerprint},
          {"trees", std::move(trees)}};
}

inline TrainedRegressor regressor_from_json(const nlohmann::json& j) {
  TrainedRegressor model;
  model.config = parse_rm_config(j.at("name").get<std::string>());
  model.n_features = j.at("n_features").get<std::size_t>();
  model.bootstrap_seeds = j.at("bootstrap_seeds").get<std::vector<std::uint64_t>>();
  model.training_fingerprint = j.at("training_fingerprint").get<std::uint64_t>();
  for (const nlohmann::json& t : j.at("trees"))
    model.trees.push_back(regression_tree_from_json(t));
  if (model.trees.empty()) throw DataError("model manifest: regressor without trees");
  return model;
}

inline Technique parse_technique(const std::string& s) {
  if (s == "DecisionTree") return Technique::DecisionTree;
  if (s == "RandomForest") return Technique::RandomForest;
  if (s == "BaggingDT") return Technique::BaggingDT;
  throw DataError("unknown technique: " + s);
}

}  // namespace detail

// Everything needed to reload and re-predict bit-identically: classifier
// members with their trees, per-class members with configs, q values,
// weights and trees, plus seeds and the target transform.
inline nlohmann::json personalized_model_to_json(const PersonalizedModel& model) {
  nlohmann::json j;
  j["format"] = "perfreg-model";
  j["version"] = 1;
  j["algorithm"] = model.algorithm_id;
  j["budget"] = model.budget;
  j["target_transform"] = target_transform_name(model.target_transform);
  j["seed"] = model.seed;
  j["feature_names"] = canonical_feature_names();

  nlohmann::json members = nlohmann::json::array();
  for (const ClassifierMember& m : model.classifier.members) {
    nlohmann::json trees = nlohmann::json::array();
    for (const ClassificationTree& t : m.trees)
      trees.push_back(detail::classification_tree_to_json(t));
    members.push_back({{"technique", technique_name(m.config.technique)},
                       {"split_measure", split_measure_name(m.config.split_measure)},
                       {"minsplit", m.config.minsplit},
                       {"nest", m.config.nest},
                       {"trees", std::move(trees)}});
  }
  j["classifier"] = {{"labels", model.classifier.labels},
                     {"n_features", model.classifier.n_features},
                     {"members", std::move(members)}};

  nlohmann::json ensembles = nlohmann::json::array();
  for (const auto& [class_id, ens] : model.ensembles) {
    nlohmann::json ens_members = nlohmann::json::array();
    for (const ClassEnsembleMember& m : ens.members) {
      nlohmann::json member = detail::regressor_to_json(m.model);
      member["q"] = m.q;
      member["weight"] = m.weight;
      ens_members.push_back(std::move(member));
    }
    ensembles.push_back({{"class_id", class_id}, {"members", std::move(ens_members)}});
  }
  j["ensembles"] = std::move(ensembles);
  return j;
}

inline PersonalizedModel personalized_model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "perfreg-model")
    throw DataError("not a perfreg model manifest");
  PersonalizedModel model;
  model.algorithm_id = j.at("algorithm").get<std::string>();
  model.budget = j.at("budget").get<long>();
  model.target_transform = parse_target_transform(j.at("target_transform").get<std::string>());
  model.seed = j.at("seed").get<std::uint64_t>();

  const nlohmann::json& cj = j.at("classifier");
  model.classifier.labels = cj.at("labels").get<std::vector<int>>();
  model.classifier.n_features = cj.at("n_features").get<std::size_t>();
  for (const nlohmann::json& mj : cj.at("members")) {
    ClassifierMember member;
    member.config.technique = detail::parse_technique(mj.at("technique").get<std::string>());
    const std::string measure = mj.at("split_measure").get<std::string>();
    if (measure == "gini") member.config.split_measure = SplitMeasure::Gini;
    else if (measure == "entropy") member.config.split_measure = SplitMeasure::Entropy;
    else throw DataError("unknown split measure: " + measure);
    member.config.minsplit = mj.at("minsplit").get<int>();
    member.config.nest = mj.at("nest").get<int>();
    for (const nlohmann::json& t : mj.at("trees"))
      member.trees.push_back(detail::classification_tree_from_json(t));
    model.classifier.members.push_back(std::move(member));
  }

  for (const nlohmann::json& ej : j.at("ensembles")) {
    ClassEnsemble ens;
    ens.class_id = ej.at("class_id").get<int>();
    for (const nlohmann::json& mj : ej.at("members")) {
      ClassEnsembleMember member;
      member.model = detail::regressor_from_json(mj);
      member.config = member.model.config;
      member.q = mj.at("q").get<double>();
      member.weight = mj.at("weight").get<double>();
      ens.members.push_back(std::move(member));
    }
    if (ens.members.empty()) throw DataError("model manifest: class without members");
    model.ensembles[ens.class_id] = std::move(ens);
  }
  if (model.ensembles.empty()) throw DataError("model manifest: no class ensembles");
  return model;
}

inline void save_personalized_model(const PersonalizedModel& model, const std::string& path) {
  write_file(path, personalized_model_to_json(model).dump(1) + "\n");
}

inline PersonalizedModel load_personalized_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("malformed model manifest " + path + ": " + e.what());
  }
  return personalized_model_from_json(j);
}

}  // namespace perfreg
