#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hatelab/ensemble.hpp"
#include "hatelab/probability_vector.hpp"

namespace hatelab {

class MetaLearnerModel;

inline constexpr const char* kAllColumn = "All";

struct PoolRow {
  std::string language;
  ProbabilityVector probabilities;
  // Native label of single-annotator pools (e.g. Neutral/Hate/Offensive).
  std::optional<std::string> raw_label;
};

// Cell maps are keyed [row][column]; columns are the languages in sorted
// order followed by "All". All-column values are computed over the union of
// rows.
struct PoolSummary {
  std::vector<std::string> columns;
  std::vector<std::string> models;
  std::vector<std::string> strategies;
  std::map<std::string, std::uint64_t> counts;
  std::map<std::string, std::map<std::string, double>> per_model_mean_phate;
  std::map<std::string, std::map<std::string, double>> per_model_pct_hate;
  std::map<std::string, std::map<std::string, double>> per_strategy_pct_hate;
  // Only populated when some row carries raw_label.
  std::map<std::string, std::map<std::string, std::uint64_t>> raw_label_counts;

  nlohmann::json to_json() const;
  static PoolSummary from_json(const nlohmann::json& j);
  // Layout of the per-language pool statistics tables.
  std::string render_table() const;

  friend bool operator==(const PoolSummary&, const PoolSummary&) = default;
};

// Per-model mean P(Hate) and share with P(Hate) > 0.5 (the same rule as a
// model's vote), plus each strategy's share of Hate labels. Strategies are
// vote and mean, and lgb when `model` is given. Throws DataError on an empty
// pool or when rows disagree on model slots.
PoolSummary pool_statistics(std::span<const PoolRow> pool, const MetaLearnerModel* model = nullptr);

}  // namespace hatelab
