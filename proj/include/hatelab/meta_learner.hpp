#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hatelab/binary_label.hpp"
#include "hatelab/gbdt.hpp"
#include "hatelab/probability_vector.hpp"

namespace hatelab {

// Two independent boosted classifiers over the eight probability features:
// one predicts "is Hate", the other "is Neutral".
class MetaLearnerModel {
 public:
  MetaLearnerModel() = default;
  MetaLearnerModel(MetaLearnerConfig config, std::vector<std::string> feature_order, BoostedModel hate_head,
                   BoostedModel neutral_head);

  const MetaLearnerConfig& config() const { return config_; }
  const std::vector<std::string>& feature_order() const { return feature_order_; }
  const BoostedModel& hate_head() const { return hate_head_; }
  const BoostedModel& neutral_head() const { return neutral_head_; }

  // {"format","config","feature_order","heads","base_scores","trees"}
  nlohmann::json to_json() const;
  static MetaLearnerModel from_json(const nlohmann::json& j);

  friend bool operator==(const MetaLearnerModel&, const MetaLearnerModel&) = default;

 private:
  MetaLearnerConfig config_;
  std::vector<std::string> feature_order_;
  BoostedModel hate_head_;
  BoostedModel neutral_head_;
};

// Rows of pv.features(). All vectors must share one model-id order, which
// becomes the feature order.
FeatureMatrix feature_matrix(std::span<const ProbabilityVector> vectors, std::vector<std::string>* feature_order = nullptr);

// Fits both heads with the same config and seed. Throws DataError when the
// supervision lacks one of the classes or sizes disagree.
MetaLearnerModel train_meta(std::span<const ProbabilityVector> vectors, std::span<const BinaryLabel> golds,
                            const MetaLearnerConfig& config);

MetaLearnerModel train_meta(const FeatureMatrix& features, std::span<const BinaryLabel> golds,
                            const MetaLearnerConfig& config, std::vector<std::string> feature_order);

struct MetaPrediction {
  BinaryLabel label{BinaryLabel::Neutral};
  double score_hate{0.0};
  double score_neutral{0.0};
};

// Hate iff the Hate head's probability is strictly above the Neutral head's.
MetaPrediction predict_meta(const MetaLearnerModel& model, const ProbabilityVector& pv);
MetaPrediction predict_meta(const MetaLearnerModel& model, std::span<const double> features);

}  // namespace hatelab
