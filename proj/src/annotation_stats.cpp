#include "hatelab/annotation_stats.hpp"

#include <iomanip>
#include <set>
#include <sstream>

#include "hatelab/error.hpp"
#include "hatelab/meta_learner.hpp"

namespace hatelab {

using nlohmann::json;

namespace {

struct Tally {
  std::uint64_t n{0};
  std::vector<double> sum_phate;
  std::vector<std::uint64_t> model_hate;
  std::vector<std::uint64_t> strategy_hate;
};

double percent(std::uint64_t k, std::uint64_t n) { return 100.0 * static_cast<double>(k) / static_cast<double>(n); }

}  // namespace

PoolSummary pool_statistics(std::span<const PoolRow> pool, const MetaLearnerModel* model) {
  if (pool.empty()) throw DataError("pool_statistics: empty pool");
  PoolSummary s;
  for (const auto& e : pool.front().probabilities.entries()) s.models.push_back(e.model_id);
  std::vector<Strategy> strategies{Strategy::Vote, Strategy::Mean};
  if (model) strategies.push_back(Strategy::Lgb);
  for (auto st : strategies) s.strategies.emplace_back(to_string(st));

  std::set<std::string> langs;
  for (const auto& r : pool) {
    if (r.language == kAllColumn) throw DataError("pool row language may not be \"All\"");
    langs.insert(r.language);
  }
  s.columns.assign(langs.begin(), langs.end());
  s.columns.push_back(kAllColumn);

  std::map<std::string, Tally> tallies;
  for (const auto& c : s.columns) {
    tallies[c] = Tally{0, std::vector<double>(s.models.size(), 0.0), std::vector<std::uint64_t>(s.models.size(), 0),
                       std::vector<std::uint64_t>(strategies.size(), 0)};
  }
  std::map<std::string, std::map<std::string, std::uint64_t>> raw;
  bool any_raw = false;

  for (const auto& row : pool) {
    const auto& pv = row.probabilities;
    for (std::size_t m = 0; m < s.models.size(); ++m) {
      if (pv[m].model_id != s.models[m]) throw DataError("pool rows disagree on model slots");
    }
    std::vector<bool> strat_hate;
    for (auto st : strategies) strat_hate.push_back(decide(st, pv, model).label == BinaryLabel::Hate);
    for (const std::string* col : {&row.language, static_cast<const std::string*>(&s.columns.back())}) {
      Tally& t = tallies[*col];
      ++t.n;
      for (std::size_t m = 0; m < s.models.size(); ++m) {
        t.sum_phate[m] += pv[m].p_hate;
        t.model_hate[m] += votes_hate(pv[m]) ? 1 : 0;
      }
      for (std::size_t k = 0; k < strategies.size(); ++k) t.strategy_hate[k] += strat_hate[k] ? 1 : 0;
    }
    if (row.raw_label) {
      any_raw = true;
      ++raw[*row.raw_label][row.language];
      ++raw[*row.raw_label][kAllColumn];
    }
  }

  for (const auto& c : s.columns) {
    const Tally& t = tallies[c];
    s.counts[c] = t.n;
    for (std::size_t m = 0; m < s.models.size(); ++m) {
      s.per_model_mean_phate[s.models[m]][c] = t.sum_phate[m] / static_cast<double>(t.n);
      s.per_model_pct_hate[s.models[m]][c] = percent(t.model_hate[m], t.n);
    }
    for (std::size_t k = 0; k < strategies.size(); ++k) {
      s.per_strategy_pct_hate[s.strategies[k]][c] = percent(t.strategy_hate[k], t.n);
    }
  }
  if (any_raw) s.raw_label_counts = std::move(raw);
  return s;
}

json PoolSummary::to_json() const {
  json j{{"columns", columns},
         {"models", models},
         {"strategies", strategies},
         {"counts", counts},
         {"per_model_mean_phate", per_model_mean_phate},
         {"per_model_pct_hate", per_model_pct_hate},
         {"per_strategy_pct_hate", per_strategy_pct_hate}};
  if (!raw_label_counts.empty()) j["raw_label_counts"] = raw_label_counts;
  return j;
}

PoolSummary PoolSummary::from_json(const json& j) {
  PoolSummary s;
  try {
    j.at("columns").get_to(s.columns);
    j.at("models").get_to(s.models);
    j.at("strategies").get_to(s.strategies);
    j.at("counts").get_to(s.counts);
    j.at("per_model_mean_phate").get_to(s.per_model_mean_phate);
    j.at("per_model_pct_hate").get_to(s.per_model_pct_hate);
    j.at("per_strategy_pct_hate").get_to(s.per_strategy_pct_hate);
    if (j.contains("raw_label_counts")) j.at("raw_label_counts").get_to(s.raw_label_counts);
  } catch (const json::exception& e) {
    throw DataError(std::string("pool summary: ") + e.what());
  }
  return s;
}

std::string PoolSummary::render_table() const {
  std::size_t width = 24;
  for (const auto& m : models) width = std::max(width, m.size() + 4);
  const int col = 10;
  std::ostringstream os;
  auto row = [&](const std::string& label, const std::map<std::string, double>& cells, int precision) {
    os << std::left << std::setw(static_cast<int>(width)) << ("  " + label) << std::right;
    for (const auto& c : columns) {
      auto it = cells.find(c);
      std::ostringstream v;
      if (it != cells.end()) v << std::fixed << std::setprecision(precision) << it->second;
      os << std::setw(col) << v.str();
    }
    os << '\n';
  };
  auto section = [&](const std::string& title) { os << title << '\n'; };

  os << std::left << std::setw(static_cast<int>(width)) << "" << std::right;
  for (const auto& c : columns) os << std::setw(col) << c;
  os << '\n' << std::left << std::setw(static_cast<int>(width)) << "" << std::right;
  for (const auto& c : columns) os << std::setw(col) << counts.at(c);
  os << '\n';

  section("Per-model mean P(Hate)");
  for (const auto& m : models) row(m, per_model_mean_phate.at(m), 3);
  section("Per-model % classified Hate (P>0.5)");
  for (const auto& m : models) row(m, per_model_pct_hate.at(m), 2);
  section("Ensemble % Hate");
  for (const auto& st : strategies) row(st, per_strategy_pct_hate.at(st), 2);
  if (!raw_label_counts.empty()) {
    section("Raw label counts");
    for (const auto& [label, cells] : raw_label_counts) {
      std::map<std::string, double> d;
      for (const auto& [c, n] : cells) d[c] = static_cast<double>(n);
      row(label, d, 0);
    }
    section("Raw label %");
    for (const auto& [label, cells] : raw_label_counts) {
      std::map<std::string, double> d;
      for (const auto& [c, n] : cells) d[c] = percent(n, counts.at(c));
      row(label, d, 2);
    }
  }
  return os.str();
}

}  // namespace hatelab
