#pragma once

// Gradient boosting over the regression-tree weak learner, squared loss.
// The model starts from the target mean and adds shrunken trees fit to the
// current residuals; prediction is the additive sum, clamped at zero only
// for the reported count.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "features.hpp"
#include "tree.hpp"

namespace sectorcast {

struct EmptyDataset : std::runtime_error {
  EmptyDataset() : std::runtime_error("training dataset is empty") {}
};

struct SchemaMismatch : std::runtime_error {
  SchemaMismatch(std::size_t got, std::size_t want)
      : std::runtime_error("feature vector has " + std::to_string(got) + " entries, schema wants " +
                           std::to_string(want)) {}
};

struct ModelParseError : std::runtime_error {
  explicit ModelParseError(const std::string& what)
      : std::runtime_error("bad model document: " + what) {}
};

struct BoostConfig {
  int n_learners = 400;
  double shrinkage = 0.1;
  TreeParams tree{};
  // Per-term least-squares step length on top of the shrinkage. The leaf
  // means already embed the optimal per-leaf step, so this stays off unless
  // explicitly asked for.
  bool line_search = false;
};

struct BoostedTerm {
  RegressionTree tree;
  double rho = 0;
};

struct Prediction {
  double raw = 0;
  double count = 0;  // max(raw, 0)
};

inline constexpr int kModelFormatVersion = 1;

struct BoostedModel {
  std::string sector;
  FeatureSchema schema;
  // Width of the training feature vectors; equals schema.dimension() for
  // datasets built through encode_features.
  int input_dimension = 0;
  double f0 = 0;
  double shrinkage = 0.1;
  std::vector<BoostedTerm> terms;

  Prediction predict(const std::vector<double>& x) const {
    if (x.size() != static_cast<std::size_t>(input_dimension))
      throw SchemaMismatch(x.size(), static_cast<std::size_t>(input_dimension));
    double raw = f0;
    for (const BoostedTerm& t : terms) raw += t.rho * t.tree.predict(x);
    return {raw, raw > 0 ? raw : 0};
  }
};

// `mse_trace`, when given, receives the training mean squared error after
// every term (index 0 = after the first tree).
inline BoostedModel train_boosted(const std::vector<std::vector<double>>& features,
                                  const std::vector<double>& targets, const BoostConfig& config,
                                  FeatureSchema schema = {}, std::string sector = {},
                                  std::vector<double>* mse_trace = nullptr) {
  if (targets.empty()) throw EmptyDataset();
  if (features.size() != targets.size())
    throw std::invalid_argument("feature and target counts differ");
  if (config.n_learners < 0) throw std::invalid_argument("nLearners must be >= 0");

  BoostedModel model;
  model.sector = std::move(sector);
  model.schema = schema;
  model.input_dimension = static_cast<int>(features.front().size());
  model.shrinkage = config.shrinkage;

  const std::size_t n = targets.size();
  double sum = 0;
  for (double y : targets) sum += y;
  model.f0 = sum / static_cast<double>(n);

  std::vector<double> current(n, model.f0);
  std::vector<double> residuals(n);
  if (mse_trace) mse_trace->clear();

  for (int i = 0; i < config.n_learners; ++i) {
    for (std::size_t p = 0; p < n; ++p) residuals[p] = targets[p] - current[p];
    RegressionTree tree = RegressionTree::fit(features, residuals, config.tree);

    std::vector<double> h(n);
    for (std::size_t p = 0; p < n; ++p) h[p] = tree.predict(features[p]);

    double rho = config.shrinkage;
    if (config.line_search) {
      double num = 0, den = 0;
      for (std::size_t p = 0; p < n; ++p) {
        num += residuals[p] * h[p];
        den += h[p] * h[p];
      }
      rho = den > 0 ? config.shrinkage * (num / den) : 0.0;
    }

    for (std::size_t p = 0; p < n; ++p) current[p] += rho * h[p];
    model.terms.push_back({std::move(tree), rho});

    if (mse_trace) {
      double mse = 0;
      for (std::size_t p = 0; p < n; ++p) {
        double d = targets[p] - current[p];
        mse += d * d;
      }
      mse_trace->push_back(mse / static_cast<double>(n));
    }
  }
  return model;
}

// ---- Model document (versioned JSON, one per trained model) ----

namespace boostdetail {

inline nlohmann::json node_to_json(const TreeNode& n) {
  nlohmann::json j;
  j["feature"] = n.feature;
  j["threshold"] = n.threshold;
  j["left"] = n.left;
  j["right"] = n.right;
  j["value"] = n.value;
  return j;
}

inline TreeNode node_from_json(const nlohmann::json& j) {
  TreeNode n;
  n.feature = j.at("feature").get<int>();
  n.threshold = j.at("threshold").get<double>();
  n.left = j.at("left").get<int>();
  n.right = j.at("right").get<int>();
  n.value = j.at("value").get<double>();
  return n;
}

}  // namespace boostdetail

inline nlohmann::json model_to_json(const BoostedModel& model) {
  nlohmann::json j;
  j["version"] = kModelFormatVersion;
  j["sector"] = model.sector;
  j["schema"] = model.schema.to_json();
  j["inputDimension"] = model.input_dimension;
  j["f0"] = model.f0;
  j["shrinkage"] = model.shrinkage;
  nlohmann::json terms = nlohmann::json::array();
  for (const BoostedTerm& t : model.terms) {
    nlohmann::json jt;
    jt["rho"] = t.rho;
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : t.tree.nodes()) nodes.push_back(boostdetail::node_to_json(n));
    jt["nodes"] = std::move(nodes);
    terms.push_back(std::move(jt));
  }
  j["terms"] = std::move(terms);
  return j;
}

inline BoostedModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != kModelFormatVersion)
      throw ModelParseError("unsupported version");
    BoostedModel model;
    model.sector = j.at("sector").get<std::string>();
    model.schema = FeatureSchema::from_json(j.at("schema"));
    model.input_dimension = j.at("inputDimension").get<int>();
    if (model.input_dimension < 1) throw ModelParseError("bad input dimension");
    model.f0 = j.at("f0").get<double>();
    model.shrinkage = j.at("shrinkage").get<double>();
    for (const nlohmann::json& jt : j.at("terms")) {
      std::vector<TreeNode> nodes;
      for (const nlohmann::json& jn : jt.at("nodes"))
        nodes.push_back(boostdetail::node_from_json(jn));
      BoostedTerm term{RegressionTree::from_nodes(std::move(nodes)), jt.at("rho").get<double>()};
      model.terms.push_back(std::move(term));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ModelParseError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelParseError(e.what());
  }
}

inline std::string serialize_model(const BoostedModel& model) {
  return model_to_json(model).dump(2) + "\n";
}

inline BoostedModel parse_model(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ModelParseError("not valid JSON");
  return model_from_json(j);
}

}  // namespace sectorcast
