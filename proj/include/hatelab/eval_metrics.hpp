#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hatelab/binary_label.hpp"

namespace hatelab {

class DatasetRegistry;

// Hate is the positive class.
struct ConfusionCounts {
  std::uint64_t tp{0};
  std::uint64_t fp{0};
  std::uint64_t fn{0};
  std::uint64_t tn{0};

  std::uint64_t total() const { return tp + fp + fn + tn; }
  ConfusionCounts& operator+=(const ConfusionCounts& o);
  // Hate <-> Neutral swap.
  ConfusionCounts swapped() const { return {tn, fn, fp, tp}; }

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Throws DataError on empty input or length mismatch.
ConfusionCounts confusion(std::span<const BinaryLabel> preds, std::span<const BinaryLabel> golds);

// F1 of the positive class; 0 when precision + recall would be 0/0.
double f1_positive(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);
double accuracy(const ConfusionCounts& c);
// Mean of the Hate and Neutral F1 scores. Throws DataError when total() == 0.
double macro_f1(const ConfusionCounts& c);

// Arithmetic mean of the Hate scores, kept within [min, max] of the input
// (and strictly above min when the scores are not all equal) so that
// thresholding at it always yields both classes where possible.
// Throws DataError on empty input.
double mean_probability_threshold(std::span<const double> scores);

// Hate iff score >= threshold.
std::vector<BinaryLabel> apply_threshold(std::span<const double> scores, double threshold);

struct GroupSpec {
  std::string name;
  std::set<std::string> members;
};

// EN, DE, VI, ES by language, then 7-Set, Rest (= All minus 7-Set), All.
std::vector<GroupSpec> default_groups(const DatasetRegistry& registry);
// {"groups": [{"name", "members": [...]}, ...]}
std::vector<GroupSpec> groups_from_json(const nlohmann::json& j);

struct ScoredPrediction {
  std::string dataset;
  BinaryLabel pred{BinaryLabel::Neutral};
  BinaryLabel gold{BinaryLabel::Neutral};
};

struct ScoreRow {
  std::string name;
  std::uint64_t n{0};
  ConfusionCounts confusion;
  double accuracy{0.0};
  double macro_f1{0.0};
  std::optional<double> threshold;
};

ScoreRow score_row(std::string name, const ConfusionCounts& c, std::optional<double> threshold = std::nullopt);

// Accuracy and macro-F1 computed once per group on the concatenation of its
// members' predictions. Groups without predictions are omitted (and named in
// `omitted` when given). Throws DataError for a dataset tag not in `known`.
std::vector<ScoreRow> pooled_group_scores(std::span<const ScoredPrediction> predictions,
                                          std::span<const GroupSpec> groups, const std::set<std::string>& known,
                                          std::vector<std::string>* omitted = nullptr);

// One line of the evaluate stage's input.
struct PredictionRecord {
  std::string id;
  std::string dataset;
  double score_hate{0.0};
  BinaryLabel gold{BinaryLabel::Neutral};
};

PredictionRecord prediction_from_json(const nlohmann::json& j);

enum class ThresholdScope { Group, Dataset, Global };

struct ThresholdPolicy {
  // Unset: mean predicted Hate probability over the scope.
  std::optional<double> fixed;
  ThresholdScope scope{ThresholdScope::Group};

  // "mean" or "fixed:<v>"
  static ThresholdPolicy parse(std::string_view mode, std::string_view scope = "group");
  std::string mode_string() const;
};

std::string_view to_string(ThresholdScope s);

struct DeltaEntry {
  double accuracy{0.0};
  double macro_f1{0.0};
};

struct DeltaReport {
  std::map<std::string, DeltaEntry> per_dataset;
  std::map<std::string, DeltaEntry> per_group;
  std::vector<std::string> skipped;  // keys absent from the baseline

  nlohmann::json to_json() const;
};

struct EvaluationReport {
  std::string threshold_mode{"mean"};
  std::string threshold_scope{"group"};
  // Set when one threshold applied everywhere.
  std::optional<double> threshold_used;
  std::vector<ScoreRow> per_dataset;  // registry order
  std::vector<ScoreRow> per_group;    // group-spec order
  std::optional<DeltaReport> baseline_deltas;

  const ScoreRow* dataset(std::string_view name) const;
  const ScoreRow* group(std::string_view name) const;

  nlohmann::json to_json() const;
  static EvaluationReport from_json(const nlohmann::json& j);

  // Aligned text table: datasets, then groups; percentages to one decimal.
  std::string render_table() const;
};

// Thresholds scores per the policy, then scores datasets and pooled groups.
// Within Group scope each group uses the mean over its own pooled rows and
// each dataset row the mean over that dataset.
EvaluationReport evaluate(std::span<const PredictionRecord> predictions, std::span<const GroupSpec> groups,
                          const ThresholdPolicy& policy, const std::vector<std::string>& dataset_order);

// report - baseline for every key both share. Throws DataError when they
// share no key at all.
DeltaReport delta_report(const EvaluationReport& report, const EvaluationReport& baseline);

}  // namespace hatelab
