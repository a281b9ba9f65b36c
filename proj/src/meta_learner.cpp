#include "hatelab/meta_learner.hpp"

#include <algorithm>

#include "hatelab/error.hpp"

namespace hatelab {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "hatelab.meta/1";

std::vector<std::string> model_ids(const ProbabilityVector& pv) {
  std::vector<std::string> ids;
  for (const auto& e : pv.entries()) ids.push_back(e.model_id);
  return ids;
}

}  // namespace

MetaLearnerModel::MetaLearnerModel(MetaLearnerConfig config, std::vector<std::string> feature_order,
                                   BoostedModel hate_head, BoostedModel neutral_head)
    : config_(std::move(config)),
      feature_order_(std::move(feature_order)),
      hate_head_(std::move(hate_head)),
      neutral_head_(std::move(neutral_head)) {}

json MetaLearnerModel::to_json() const {
  return json{{"format", kFormat},
              {"config", config_.to_json()},
              {"feature_order", feature_order_},
              {"heads", {"hate", "neutral"}},
              {"base_scores", {hate_head_.base_score, neutral_head_.base_score}},
              {"trees", {hate_head_.trees_to_json(), neutral_head_.trees_to_json()}}};
}

MetaLearnerModel MetaLearnerModel::from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat) throw DataError("model: unsupported format");
    auto cfg = MetaLearnerConfig::from_json(j.at("config"));
    auto order = j.at("feature_order").get<std::vector<std::string>>();
    if (order.size() != kNumFeatures) throw DataError("model: expected 8 features");
    const auto& bases = j.at("base_scores");
    const auto& trees = j.at("trees");
    if (bases.size() != 2 || trees.size() != 2) throw DataError("model: expected two heads");
    BoostedModel hate{bases[0].get<double>(), BoostedModel::trees_from_json(trees[0], order.size())};
    BoostedModel neutral{bases[1].get<double>(), BoostedModel::trees_from_json(trees[1], order.size())};
    return MetaLearnerModel(std::move(cfg), std::move(order), std::move(hate), std::move(neutral));
  } catch (const json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("model: ") + e.what());
  }
}

FeatureMatrix feature_matrix(std::span<const ProbabilityVector> vectors, std::vector<std::string>* feature_order) {
  FeatureMatrix x;
  std::vector<std::string> ids;
  for (const auto& pv : vectors) {
    auto these = model_ids(pv);
    if (ids.empty()) {
      ids = these;
    } else if (these != ids) {
      throw DataError("probability vectors disagree on model slot order");
    }
    const auto f = pv.features();
    x.push_row(f);
  }
  if (feature_order) *feature_order = feature_names(ids);
  return x;
}

MetaLearnerModel train_meta(const FeatureMatrix& features, std::span<const BinaryLabel> golds,
                            const MetaLearnerConfig& config, std::vector<std::string> feature_order) {
  if (features.rows() != golds.size()) throw DataError("train_meta: features and labels differ in length");
  const auto hate = std::count(golds.begin(), golds.end(), BinaryLabel::Hate);
  if (golds.size() < 2 || hate == 0 || hate == static_cast<std::ptrdiff_t>(golds.size())) {
    throw DataError("train_meta: supervision must contain both Hate and Neutral examples (" +
                    std::to_string(hate) + " Hate of " + std::to_string(golds.size()) + ")");
  }
  std::vector<int> y_hate;
  std::vector<int> y_neutral;
  for (auto g : golds) {
    y_hate.push_back(g == BinaryLabel::Hate ? 1 : 0);
    y_neutral.push_back(g == BinaryLabel::Neutral ? 1 : 0);
  }
  auto hate_head = gbdt_fit(features, y_hate, config);
  auto neutral_head = gbdt_fit(features, y_neutral, config);
  return MetaLearnerModel(config, std::move(feature_order), std::move(hate_head), std::move(neutral_head));
}

MetaLearnerModel train_meta(std::span<const ProbabilityVector> vectors, std::span<const BinaryLabel> golds,
                            const MetaLearnerConfig& config) {
  std::vector<std::string> order;
  auto x = feature_matrix(vectors, &order);
  return train_meta(x, golds, config, std::move(order));
}

MetaPrediction predict_meta(const MetaLearnerModel& model, std::span<const double> features) {
  MetaPrediction p;
  p.score_hate = model.hate_head().predict_probability(features);
  p.score_neutral = model.neutral_head().predict_probability(features);
  p.label = p.score_hate > p.score_neutral ? BinaryLabel::Hate : BinaryLabel::Neutral;
  return p;
}

MetaPrediction predict_meta(const MetaLearnerModel& model, const ProbabilityVector& pv) {
  if (!model.feature_order().empty() && feature_names(model_ids(pv)) != model.feature_order()) {
    throw DataError("probability vector models do not match the meta-learner feature order");
  }
  const auto f = pv.features();
  return predict_meta(model, std::span<const double>(f));
}

}  // namespace hatelab
