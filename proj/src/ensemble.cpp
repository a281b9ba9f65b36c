#include "hatelab/ensemble.hpp"

#include <cmath>
#include <vector>

#include "hatelab/error.hpp"
#include "hatelab/meta_learner.hpp"

namespace hatelab {

namespace {

// Sign of the exact sum of `xs` (Shewchuk's non-overlapping partials).
int exact_sum_sign(std::span<const double> xs) {
  std::vector<double> partials;
  for (double x : xs) {
    std::size_t i = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  // Partials are non-overlapping and increasing in magnitude; the largest
  // nonzero one carries the sign.
  for (auto it = partials.rbegin(); it != partials.rend(); ++it) {
    if (*it > 0.0) return 1;
    if (*it < 0.0) return -1;
  }
  return 0;
}

}  // namespace

bool votes_hate(const ModelScore& s) { return s.p_hate > kVoteThreshold; }

int hate_votes(const ProbabilityVector& pv) {
  int n = 0;
  for (const auto& e : pv.entries()) n += votes_hate(e) ? 1 : 0;
  return n;
}

BinaryLabel vote_label(const ProbabilityVector& pv) {
  return hate_votes(pv) >= kMinHateVotes ? BinaryLabel::Hate : BinaryLabel::Neutral;
}

BinaryLabel mean_label(const ProbabilityVector& pv) {
  std::array<double, 2 * kNumAnnotators> terms{};
  for (std::size_t i = 0; i < kNumAnnotators; ++i) {
    terms[2 * i] = pv[i].p_hate;
    terms[2 * i + 1] = -pv[i].p_neutral;
  }
  return exact_sum_sign(terms) > 0 ? BinaryLabel::Hate : BinaryLabel::Neutral;
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Vote: return "vote";
    case Strategy::Mean: return "mean";
    case Strategy::Lgb: return "lgb";
  }
  return "?";
}

Strategy parse_strategy(std::string_view s) {
  if (s == "vote") return Strategy::Vote;
  if (s == "mean") return Strategy::Mean;
  if (s == "lgb") return Strategy::Lgb;
  throw ConfigError("unknown strategy: " + std::string(s));
}

EnsembleDecision decide(Strategy strategy, const ProbabilityVector& pv, const MetaLearnerModel* model) {
  EnsembleDecision d;
  switch (strategy) {
    case Strategy::Vote: {
      const int v = hate_votes(pv);
      d.label = v >= kMinHateVotes ? BinaryLabel::Hate : BinaryLabel::Neutral;
      d.score_hate = static_cast<double>(v) / kNumAnnotators;
      d.score_neutral = 1.0 - d.score_hate;
      break;
    }
    case Strategy::Mean: {
      double h = 0.0;
      double n = 0.0;
      for (const auto& e : pv.entries()) {
        h += e.p_hate;
        n += e.p_neutral;
      }
      d.label = mean_label(pv);
      d.score_hate = h / kNumAnnotators;
      d.score_neutral = n / kNumAnnotators;
      break;
    }
    case Strategy::Lgb: {
      if (!model) throw ConfigError("strategy lgb needs a trained meta-learner model");
      auto p = predict_meta(*model, pv);
      d.label = p.label;
      d.score_hate = p.score_hate;
      d.score_neutral = p.score_neutral;
      break;
    }
  }
  return d;
}

}  // namespace hatelab
