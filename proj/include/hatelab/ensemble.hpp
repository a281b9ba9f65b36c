#pragma once

#include <string_view>

#include "hatelab/binary_label.hpp"
#include "hatelab/probability_vector.hpp"

namespace hatelab {

class MetaLearnerModel;

// A model votes Hate when its p_hate is strictly above this.
inline constexpr double kVoteThreshold = 0.5;
// Votes needed for a Hate majority label.
inline constexpr int kMinHateVotes = 2;

bool votes_hate(const ModelScore& s);
int hate_votes(const ProbabilityVector& pv);

// Hate iff at least two of the four models have p_hate > 0.5.
BinaryLabel vote_label(const ProbabilityVector& pv);

// The class with the strictly higher mean probability; ties go to Neutral.
// The comparison uses an exactly rounded sum, so the result does not depend
// on slot order.
BinaryLabel mean_label(const ProbabilityVector& pv);

enum class Strategy { Vote, Mean, Lgb };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view s);

struct EnsembleDecision {
  BinaryLabel label{BinaryLabel::Neutral};
  // Vote: fraction of models voting each class. Mean: the class means.
  // Lgb: each head's probability.
  double score_hate{0.0};
  double score_neutral{0.0};
};

// Throws ConfigError for Lgb without a model.
EnsembleDecision decide(Strategy strategy, const ProbabilityVector& pv,
                        const MetaLearnerModel* model = nullptr);

}  // namespace hatelab
