#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace hatelab {

// Hyper-parameters of the boosted-tree meta-learner. num_rounds,
// min_data_in_leaf and the L2 term use the usual framework defaults.
struct MetaLearnerConfig {
  std::string objective{"binary"};
  std::string metric{"binary_logloss"};
  int num_leaves{34};
  double learning_rate{0.05};
  double feature_fraction{0.9};
  double bagging_fraction{0.8};
  int bagging_freq{5};
  int num_rounds{100};
  int min_data_in_leaf{20};
  double l2_leaf_regularization{0.0};
  std::uint64_t seed{0};

  void validate() const;  // throws ConfigError
  nlohmann::json to_json() const;
  static MetaLearnerConfig from_json(const nlohmann::json& j);

  friend bool operator==(const MetaLearnerConfig&, const MetaLearnerConfig&) = default;
};

// Dense row-major matrix.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  void push_row(std::span<const double> values);

 private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::vector<double> data_;
};

// Internal node when feature >= 0 (x[feature] <= threshold goes left),
// leaf otherwise.
struct TreeNode {
  int feature{-1};
  double threshold{0.0};
  int left{-1};
  int right{-1};
  double value{0.0};  // leaf output, learning rate already applied

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  double predict(std::span<const double> x) const;
  int num_leaves() const;
  // Index of the leaf reached by x.
  int leaf_index(std::span<const double> x) const;

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct BoostedModel {
  double base_score{0.0};
  std::vector<Tree> trees;

  double predict_raw(std::span<const double> x) const;
  double predict_probability(std::span<const double> x) const;

  nlohmann::json trees_to_json() const;
  static std::vector<Tree> trees_from_json(const nlohmann::json& j, std::size_t num_features);

  friend bool operator==(const BoostedModel&, const BoostedModel&) = default;
};

double sigmoid(double raw);

// Probabilities are clamped to this distance from 0 and 1.
inline constexpr double kProbabilityClamp = 1e-15;
// Splits must improve the objective by more than this.
inline constexpr double kMinSplitGain = 1e-12;

struct GradientPair {
  double g{0.0};
  double h{0.0};
};

// Derivatives of the log loss with respect to the raw score at predicted
// probability p: g = p - y, h = p (1 - p), with p clamped first.
GradientPair logistic_gradients(double p, int y);

// Log-odds of the clamped base rate.
double base_score_for(std::span<const int> labels);

// Second-order split gain, 1/2 [GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)].
double split_gain(double gl, double hl, double gr, double hr, double lambda);
// -G/(H+l), 0 when the denominator vanishes.
double leaf_weight(double g, double h, double lambda);

// Mean log loss of raw scores against 0/1 labels.
double mean_logloss(std::span<const double> raw, std::span<const int> labels);

struct FitObserver {
  // Called after each round with the round index and the training log loss
  // over all rows.
  std::function<void(int, double)> on_round;
};

// Leaf-wise gradient boosting on the binary log loss with exact split
// search over sorted distinct feature values. Deterministic for a fixed seed.
// Throws DataError on empty input or size mismatch, ConfigError on a bad
// config.
BoostedModel gbdt_fit(const FeatureMatrix& features, std::span<const int> labels,
                      const MetaLearnerConfig& config, const FitObserver* observer = nullptr);

}  // namespace hatelab
