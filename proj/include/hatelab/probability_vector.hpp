#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace hatelab {

inline constexpr std::size_t kNumAnnotators = 4;
inline constexpr std::size_t kNumFeatures = 2 * kNumAnnotators;

// Tolerance on p_hate + p_neutral == 1.
inline constexpr double kPairSumTolerance = 1e-9;

struct ModelScore {
  std::string model_id;
  double p_hate{0.0};
  double p_neutral{0.0};

  friend bool operator==(const ModelScore&, const ModelScore&) = default;
};

// The four annotators' (Hate, Neutral) probability pairs for one text.
class ProbabilityVector {
 public:
  ProbabilityVector() = default;

  // Throws DataError unless there are exactly four entries with distinct
  // model ids and each pair is a valid two-class distribution.
  explicit ProbabilityVector(std::vector<ModelScore> entries);

  // Convenience for tests and synthetic pools: model ids m0..m3,
  // p_neutral = 1 - p_hate.
  static ProbabilityVector from_hate(const std::array<double, kNumAnnotators>& p_hate);

  const std::array<ModelScore, kNumAnnotators>& entries() const { return entries_; }
  const ModelScore& operator[](std::size_t i) const { return entries_[i]; }

  // (h0, n0, h1, n1, ...) in slot order.
  std::array<double, kNumFeatures> features() const;

  friend bool operator==(const ProbabilityVector&, const ProbabilityVector&) = default;

 private:
  std::array<ModelScore, kNumAnnotators> entries_{};
};

// Feature names matching ProbabilityVector::features() for the given slot
// order: "<model>:hate", "<model>:neutral", ...
std::vector<std::string> feature_names(std::span<const std::string> model_ids);

}  // namespace hatelab
