#include "hatelab/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hatelab/error.hpp"
#include "hatelab/rng.hpp"

namespace hatelab {

using nlohmann::json;

void MetaLearnerConfig::validate() const {
  if (objective != "binary") throw ConfigError("meta-learner: only the binary objective is supported");
  if (num_leaves < 2) throw ConfigError("meta-learner: num_leaves must be >= 2");
  if (!(learning_rate > 0.0)) throw ConfigError("meta-learner: learning_rate must be > 0");
  if (!(feature_fraction > 0.0 && feature_fraction <= 1.0)) {
    throw ConfigError("meta-learner: feature_fraction must be in (0, 1]");
  }
  if (!(bagging_fraction > 0.0 && bagging_fraction <= 1.0)) {
    throw ConfigError("meta-learner: bagging_fraction must be in (0, 1]");
  }
  if (bagging_freq < 0) throw ConfigError("meta-learner: bagging_freq must be >= 0");
  if (num_rounds < 1) throw ConfigError("meta-learner: num_rounds must be >= 1");
  if (min_data_in_leaf < 1) throw ConfigError("meta-learner: min_data_in_leaf must be >= 1");
  if (!(l2_leaf_regularization >= 0.0)) throw ConfigError("meta-learner: l2_leaf_regularization must be >= 0");
}

json MetaLearnerConfig::to_json() const {
  return json{{"objective", objective},
              {"metric", metric},
              {"boosting_type", "gbdt"},
              {"num_leaves", num_leaves},
              {"learning_rate", learning_rate},
              {"feature_fraction", feature_fraction},
              {"bagging_fraction", bagging_fraction},
              {"bagging_freq", bagging_freq},
              {"num_rounds", num_rounds},
              {"min_data_in_leaf", min_data_in_leaf},
              {"l2_leaf_regularization", l2_leaf_regularization},
              {"seed", seed}};
}

MetaLearnerConfig MetaLearnerConfig::from_json(const json& j) {
  MetaLearnerConfig c;
  if (!j.is_object()) throw ConfigError("meta-learner config must be a JSON object");
  try {
    c.objective = j.value("objective", c.objective);
    c.metric = j.value("metric", c.metric);
    if (j.value("boosting_type", std::string("gbdt")) != "gbdt") {
      throw ConfigError("meta-learner: only boosting_type gbdt is supported");
    }
    c.num_leaves = j.value("num_leaves", c.num_leaves);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.feature_fraction = j.value("feature_fraction", c.feature_fraction);
    c.bagging_fraction = j.value("bagging_fraction", c.bagging_fraction);
    c.bagging_freq = j.value("bagging_freq", c.bagging_freq);
    c.num_rounds = j.value("num_rounds", c.num_rounds);
    c.min_data_in_leaf = j.value("min_data_in_leaf", c.min_data_in_leaf);
    c.l2_leaf_regularization = j.value("l2_leaf_regularization", c.l2_leaf_regularization);
    c.seed = j.value("seed", c.seed);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("meta-learner config: ") + e.what());
  }
  c.validate();
  return c;
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

void FeatureMatrix::push_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw DataError("feature row has the wrong width");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

int Tree::leaf_index(std::span<const double> x) const {
  int i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    i = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return i;
}

double Tree::predict(std::span<const double> x) const {
  if (nodes.empty()) return 0.0;
  return nodes[leaf_index(x)].value;
}

int Tree::num_leaves() const {
  return static_cast<int>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

double BoostedModel::predict_raw(std::span<const double> x) const {
  double raw = base_score;
  for (const auto& t : trees) raw += t.predict(x);
  return raw;
}

double BoostedModel::predict_probability(std::span<const double> x) const { return sigmoid(predict_raw(x)); }

json BoostedModel::trees_to_json() const {
  json out = json::array();
  for (const auto& t : trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      if (n.is_leaf()) {
        nodes.push_back(json{{"leaf", n.value}});
      } else {
        nodes.push_back(json{{"feature", n.feature}, {"threshold", n.threshold}, {"left", n.left}, {"right", n.right}});
      }
    }
    out.push_back(std::move(nodes));
  }
  return out;
}

std::vector<Tree> BoostedModel::trees_from_json(const json& j, std::size_t num_features) {
  if (!j.is_array()) throw DataError("model: trees must be an array");
  std::vector<Tree> trees;
  try {
    for (const auto& jt : j) {
      Tree t;
      for (const auto& jn : jt) {
        TreeNode n;
        if (jn.contains("leaf")) {
          n.value = jn.at("leaf").get<double>();
          if (!std::isfinite(n.value)) throw DataError("model: non-finite leaf value");
        } else {
          n.feature = jn.at("feature").get<int>();
          n.threshold = jn.at("threshold").get<double>();
          n.left = jn.at("left").get<int>();
          n.right = jn.at("right").get<int>();
          if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= num_features || !std::isfinite(n.threshold)) {
            throw DataError("model: bad split node");
          }
        }
        t.nodes.push_back(n);
      }
      const int size = static_cast<int>(t.nodes.size());
      if (size == 0) throw DataError("model: empty tree");
      for (int i = 0; i < size; ++i) {
        const auto& n = t.nodes[i];
        if (!n.is_leaf() && (n.left <= i || n.right <= i || n.left >= size || n.right >= size)) {
          throw DataError("model: bad child index");
        }
      }
      trees.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("model: ") + e.what());
  }
  return trees;
}

double sigmoid(double raw) {
  if (raw >= 0.0) return 1.0 / (1.0 + std::exp(-raw));
  const double e = std::exp(raw);
  return e / (1.0 + e);
}

GradientPair logistic_gradients(double p, int y) {
  p = std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
  return {p - static_cast<double>(y), p * (1.0 - p)};
}

double base_score_for(std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  const double pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  const double rate = std::clamp(pos / static_cast<double>(labels.size()), kProbabilityClamp, 1.0 - kProbabilityClamp);
  return std::log(rate / (1.0 - rate));
}

double split_gain(double gl, double hl, double gr, double hr, double lambda) {
  const double g = gl + gr;
  const double h = hl + hr;
  return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda));
}

double leaf_weight(double g, double h, double lambda) {
  const double denom = h + lambda;
  return denom > 0.0 ? -g / denom : 0.0;
}

double mean_logloss(std::span<const double> raw, std::span<const int> labels) {
  double total = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double r = raw[i];
    const double softplus = std::max(r, 0.0) + std::log1p(std::exp(-std::abs(r)));
    total += softplus - (labels[i] == 1 ? r : 0.0);
  }
  return raw.empty() ? 0.0 : total / static_cast<double>(raw.size());
}

namespace {

struct SplitCandidate {
  int feature{-1};
  double threshold{0.0};
  double gain{-std::numeric_limits<double>::infinity()};
};

struct Leaf {
  std::vector<std::size_t> rows;
  double g_sum{0.0};
  double h_sum{0.0};
  int node{0};
  SplitCandidate best;
};

// k distinct indices from [0, n), ascending.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::size_t ceil_fraction(double fraction, std::size_t n) {
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  return std::clamp<std::size_t>(k, 1, n);
}

double split_threshold(double lo, double hi) {
  const double mid = std::midpoint(lo, hi);
  return mid < hi ? mid : lo;
}

class TreeGrower {
 public:
  TreeGrower(const FeatureMatrix& x, const std::vector<GradientPair>& grad, const MetaLearnerConfig& cfg)
      : x_(x), grad_(grad), cfg_(cfg) {}

  Tree grow(std::vector<std::size_t> bag, const std::vector<std::size_t>& features) {
    features_ = &features;
    Tree tree;
    tree.nodes.push_back(TreeNode{});
    std::vector<Leaf> leaves;
    leaves.push_back(make_leaf(std::move(bag), 0));

    while (static_cast<int>(leaves.size()) < cfg_.num_leaves) {
      std::size_t pick = leaves.size();
      for (std::size_t i = 0; i < leaves.size(); ++i) {
        const auto& b = leaves[i].best;
        if (b.feature < 0 || !(b.gain > kMinSplitGain)) continue;
        if (pick == leaves.size() || b.gain > leaves[pick].best.gain) pick = i;
      }
      if (pick == leaves.size()) break;

      Leaf parent = std::move(leaves[pick]);
      std::vector<std::size_t> left_rows;
      std::vector<std::size_t> right_rows;
      for (auto r : parent.rows) {
        (x_.at(r, parent.best.feature) <= parent.best.threshold ? left_rows : right_rows).push_back(r);
      }
      const int left_node = static_cast<int>(tree.nodes.size());
      const int right_node = left_node + 1;
      tree.nodes.push_back(TreeNode{});
      tree.nodes.push_back(TreeNode{});
      auto& pn = tree.nodes[parent.node];
      pn.feature = parent.best.feature;
      pn.threshold = parent.best.threshold;
      pn.left = left_node;
      pn.right = right_node;

      leaves[pick] = make_leaf(std::move(left_rows), left_node);
      leaves.push_back(make_leaf(std::move(right_rows), right_node));
    }

    for (const auto& leaf : leaves) {
      tree.nodes[leaf.node].value =
          cfg_.learning_rate * leaf_weight(leaf.g_sum, leaf.h_sum, cfg_.l2_leaf_regularization);
    }
    return tree;
  }

 private:
  Leaf make_leaf(std::vector<std::size_t> rows, int node) {
    Leaf leaf;
    leaf.rows = std::move(rows);
    leaf.node = node;
    for (auto r : leaf.rows) {
      leaf.g_sum += grad_[r].g;
      leaf.h_sum += grad_[r].h;
    }
    leaf.best = best_split(leaf);
    return leaf;
  }

  SplitCandidate best_split(const Leaf& leaf) const {
    SplitCandidate best;
    const std::size_t m = leaf.rows.size();
    const auto min_leaf = static_cast<std::size_t>(cfg_.min_data_in_leaf);
    if (m < 2 * min_leaf) return best;
    const double lambda = cfg_.l2_leaf_regularization;
    std::vector<std::size_t> order(leaf.rows);
    for (auto f : *features_) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double xa = x_.at(a, f);
        const double xb = x_.at(b, f);
        return xa < xb || (xa == xb && a < b);
      });
      double gl = 0.0;
      double hl = 0.0;
      for (std::size_t k = 0; k + 1 < m; ++k) {
        gl += grad_[order[k]].g;
        hl += grad_[order[k]].h;
        const double lo = x_.at(order[k], f);
        const double hi = x_.at(order[k + 1], f);
        if (!(lo < hi)) continue;
        const std::size_t nl = k + 1;
        if (nl < min_leaf || m - nl < min_leaf) continue;
        const double gr = leaf.g_sum - gl;
        const double hr = leaf.h_sum - hl;
        if (!(hl + lambda > 0.0) || !(hr + lambda > 0.0)) continue;
        const double gain = split_gain(gl, hl, gr, hr, lambda);
        if (gain > best.gain) {
          best.feature = static_cast<int>(f);
          best.threshold = split_threshold(lo, hi);
          best.gain = gain;
        }
      }
    }
    return best;
  }

  const FeatureMatrix& x_;
  const std::vector<GradientPair>& grad_;
  const MetaLearnerConfig& cfg_;
  const std::vector<std::size_t>* features_{nullptr};
};

}  // namespace

BoostedModel gbdt_fit(const FeatureMatrix& features, std::span<const int> labels, const MetaLearnerConfig& config,
                      const FitObserver* observer) {
  config.validate();
  const std::size_t n = features.rows();
  const std::size_t d = features.cols();
  if (n == 0 || d == 0) throw DataError("gbdt_fit: empty input");
  if (labels.size() != n) {
    throw DataError("gbdt_fit: " + std::to_string(n) + " feature rows but " + std::to_string(labels.size()) +
                    " labels");
  }
  for (int y : labels) {
    if (y != 0 && y != 1) throw DataError("gbdt_fit: labels must be 0 or 1");
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (double v : features.row(r)) {
      if (!std::isfinite(v)) throw DataError("gbdt_fit: non-finite feature value");
    }
  }

  BoostedModel model;
  model.base_score = base_score_for(labels);
  std::vector<double> scores(n, model.base_score);
  std::vector<GradientPair> grad(n);
  Rng rng(config.seed);

  const bool bagging = config.bagging_fraction < 1.0 && config.bagging_freq > 0;
  std::vector<std::size_t> bag(n);
  std::iota(bag.begin(), bag.end(), std::size_t{0});
  std::vector<std::size_t> all_features(d);
  std::iota(all_features.begin(), all_features.end(), std::size_t{0});

  TreeGrower grower(features, grad, config);
  for (int round = 0; round < config.num_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) grad[i] = logistic_gradients(sigmoid(scores[i]), labels[i]);

    if (bagging && round % config.bagging_freq == 0) {
      bag = sample_without_replacement(rng, n, ceil_fraction(config.bagging_fraction, n));
    }
    const auto candidate_features = config.feature_fraction < 1.0
                                        ? sample_without_replacement(rng, d, ceil_fraction(config.feature_fraction, d))
                                        : all_features;

    Tree tree = grower.grow(bag, candidate_features);
    for (std::size_t i = 0; i < n; ++i) scores[i] += tree.predict(features.row(i));
    model.trees.push_back(std::move(tree));

    if (observer && observer->on_round) observer->on_round(round, mean_logloss(scores, labels));
  }
  return model;
}

}  // namespace hatelab
