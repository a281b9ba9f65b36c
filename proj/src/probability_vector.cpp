#include "hatelab/probability_vector.hpp"

#include <cmath>
#include <set>

#include "hatelab/error.hpp"

namespace hatelab {

ProbabilityVector::ProbabilityVector(std::vector<ModelScore> entries) {
  if (entries.size() != kNumAnnotators) {
    throw DataError("probability vector needs exactly 4 models, got " + std::to_string(entries.size()));
  }
  std::set<std::string> seen;
  for (std::size_t i = 0; i < kNumAnnotators; ++i) {
    auto& e = entries[i];
    if (!seen.insert(e.model_id).second) throw DataError("duplicate model id " + e.model_id);
    const bool in_range = std::isfinite(e.p_hate) && std::isfinite(e.p_neutral) && e.p_hate >= 0.0 &&
                          e.p_hate <= 1.0 && e.p_neutral >= 0.0 && e.p_neutral <= 1.0;
    if (!in_range || std::abs(e.p_hate + e.p_neutral - 1.0) > kPairSumTolerance) {
      throw DataError("model " + e.model_id + ": probabilities do not form a distribution");
    }
    entries_[i] = std::move(e);
  }
}

ProbabilityVector ProbabilityVector::from_hate(const std::array<double, kNumAnnotators>& p_hate) {
  std::vector<ModelScore> e;
  for (std::size_t i = 0; i < kNumAnnotators; ++i) {
    e.push_back({"m" + std::to_string(i), p_hate[i], 1.0 - p_hate[i]});
  }
  return ProbabilityVector(std::move(e));
}

std::array<double, kNumFeatures> ProbabilityVector::features() const {
  std::array<double, kNumFeatures> f{};
  for (std::size_t i = 0; i < kNumAnnotators; ++i) {
    f[2 * i] = entries_[i].p_hate;
    f[2 * i + 1] = entries_[i].p_neutral;
  }
  return f;
}

std::vector<std::string> feature_names(std::span<const std::string> model_ids) {
  std::vector<std::string> out;
  for (const auto& m : model_ids) {
    out.push_back(m + ":hate");
    out.push_back(m + ":neutral");
  }
  return out;
}

}  // namespace hatelab
