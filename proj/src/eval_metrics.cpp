#include "hatelab/eval_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "hatelab/dataset_ingest.hpp"
#include "hatelab/error.hpp"

namespace hatelab {

using nlohmann::json;

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

ConfusionCounts confusion(std::span<const BinaryLabel> preds, std::span<const BinaryLabel> golds) {
  if (preds.size() != golds.size()) {
    throw DataError("confusion: " + std::to_string(preds.size()) + " predictions vs " +
                    std::to_string(golds.size()) + " gold labels");
  }
  if (preds.empty()) throw DataError("confusion: empty input");
  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool p = preds[i] == BinaryLabel::Hate;
    const bool g = golds[i] == BinaryLabel::Hate;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

double f1_positive(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  // 2PR/(P+R) simplifies to 2tp/(2tp+fp+fn) whenever it is defined.
  const std::uint64_t denom = 2 * tp + fp + fn;
  if (tp == 0 || denom == 0) return 0.0;
  return static_cast<double>(2 * tp) / static_cast<double>(denom);
}

double accuracy(const ConfusionCounts& c) {
  if (c.total() == 0) throw DataError("accuracy: no examples");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

double macro_f1(const ConfusionCounts& c) {
  if (c.total() == 0) throw DataError("macro_f1: no examples");
  const double hate = f1_positive(c.tp, c.fp, c.fn);
  const double neutral = f1_positive(c.tn, c.fn, c.fp);
  return (hate + neutral) / 2.0;
}

double mean_probability_threshold(std::span<const double> scores) {
  if (scores.empty()) throw DataError("mean_probability_threshold: empty input");
  // Neumaier-compensated sum.
  double sum = 0.0;
  double comp = 0.0;
  for (double s : scores) {
    const double t = sum + s;
    comp += std::abs(sum) >= std::abs(s) ? (sum - t) + s : (s - t) + sum;
    sum = t;
  }
  double mean = (sum + comp) / static_cast<double>(scores.size());
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  if (*lo == *hi) return *lo;
  return std::clamp(mean, std::nextafter(*lo, INFINITY), *hi);
}

std::vector<BinaryLabel> apply_threshold(std::span<const double> scores, double threshold) {
  std::vector<BinaryLabel> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(s >= threshold ? BinaryLabel::Hate : BinaryLabel::Neutral);
  return out;
}

std::vector<GroupSpec> default_groups(const DatasetRegistry& registry) {
  std::vector<GroupSpec> groups{{"EN", {}}, {"DE", {}}, {"VI", {}}, {"ES", {}},
                                {"7-Set", {}}, {"Rest", {}}, {"All", {}}};
  const std::map<std::string, std::size_t> by_lang{{"eng", 0}, {"deu", 1}, {"vie", 2}, {"spa", 3}};
  for (const auto& name : registry.names()) {
    const auto& spec = registry.get(name);
    groups[by_lang.at(spec.language)].members.insert(name);
    groups[spec.seven_set ? 4 : 5].members.insert(name);
    groups[6].members.insert(name);
  }
  std::erase_if(groups, [](const GroupSpec& g) { return g.members.empty(); });
  return groups;
}

std::vector<GroupSpec> groups_from_json(const json& j) {
  std::vector<GroupSpec> out;
  try {
    for (const auto& g : j.at("groups")) {
      GroupSpec s{g.at("name").get<std::string>(), g.at("members").get<std::set<std::string>>()};
      if (s.name.empty() || s.members.empty()) throw ConfigError("group '" + s.name + "' has no members");
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("groups config: ") + e.what());
  }
  if (out.empty()) throw ConfigError("groups config: no groups");
  return out;
}

ScoreRow score_row(std::string name, const ConfusionCounts& c, std::optional<double> threshold) {
  ScoreRow r;
  r.name = std::move(name);
  r.n = c.total();
  r.confusion = c;
  r.accuracy = accuracy(c);
  r.macro_f1 = macro_f1(c);
  r.threshold = threshold;
  return r;
}

std::vector<ScoreRow> pooled_group_scores(std::span<const ScoredPrediction> predictions,
                                          std::span<const GroupSpec> groups, const std::set<std::string>& known,
                                          std::vector<std::string>* omitted) {
  std::map<std::string, ConfusionCounts> per_dataset;
  for (const auto& p : predictions) {
    if (!known.count(p.dataset)) throw DataError("unknown dataset tag: " + p.dataset);
    const BinaryLabel pred[] = {p.pred};
    const BinaryLabel gold[] = {p.gold};
    per_dataset[p.dataset] += confusion(pred, gold);
  }
  std::vector<ScoreRow> out;
  for (const auto& g : groups) {
    ConfusionCounts pooled;
    for (const auto& m : g.members) {
      if (auto it = per_dataset.find(m); it != per_dataset.end()) pooled += it->second;
    }
    if (pooled.total() == 0) {
      if (omitted) omitted->push_back(g.name);
      continue;
    }
    out.push_back(score_row(g.name, pooled));
  }
  return out;
}

PredictionRecord prediction_from_json(const json& j) {
  PredictionRecord p;
  try {
    p.id = j.value("id", std::string());
    p.dataset = j.at("dataset").get<std::string>();
    p.score_hate = j.at("score_hate").get<double>();
    p.gold = parse_binary_label(j.at("gold").get<std::string>());
  } catch (const json::exception& e) {
    throw DataError(std::string("prediction record: ") + e.what());
  }
  if (!std::isfinite(p.score_hate)) throw DataError("prediction " + p.id + ": score_hate is not finite");
  return p;
}

std::string_view to_string(ThresholdScope s) {
  switch (s) {
    case ThresholdScope::Group: return "group";
    case ThresholdScope::Dataset: return "dataset";
    case ThresholdScope::Global: return "global";
  }
  return "?";
}

ThresholdPolicy ThresholdPolicy::parse(std::string_view mode, std::string_view scope) {
  ThresholdPolicy p;
  if (mode.starts_with("fixed:")) {
    const std::string v(mode.substr(6));
    std::size_t used = 0;
    try {
      p.fixed = std::stod(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(*p.fixed)) {
      throw ConfigError("bad fixed threshold: " + std::string(mode));
    }
  } else if (mode != "mean") {
    throw ConfigError("threshold must be 'mean' or 'fixed:<v>', got '" + std::string(mode) + "'");
  }
  if (scope == "group") p.scope = ThresholdScope::Group;
  else if (scope == "dataset") p.scope = ThresholdScope::Dataset;
  else if (scope == "global") p.scope = ThresholdScope::Global;
  else throw ConfigError("threshold scope must be group, dataset or global");
  return p;
}

std::string ThresholdPolicy::mode_string() const {
  if (!fixed) return "mean";
  std::ostringstream os;
  os << "fixed:" << *fixed;
  return os.str();
}

namespace {

json row_json(const ScoreRow& r) {
  json j{{"n", r.n},
         {"accuracy", r.accuracy},
         {"macro_f1", r.macro_f1},
         {"confusion", {{"tp", r.confusion.tp}, {"fp", r.confusion.fp}, {"fn", r.confusion.fn}, {"tn", r.confusion.tn}}}};
  if (r.threshold) j["threshold"] = *r.threshold;
  return j;
}

ScoreRow row_from_json(const std::string& name, const json& j) {
  ScoreRow r;
  r.name = name;
  r.accuracy = j.at("accuracy").get<double>();
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.n = j.value("n", std::uint64_t{0});
  if (auto c = j.find("confusion"); c != j.end()) {
    r.confusion = {c->at("tp").get<std::uint64_t>(), c->at("fp").get<std::uint64_t>(),
                   c->at("fn").get<std::uint64_t>(), c->at("tn").get<std::uint64_t>()};
  }
  if (j.contains("threshold")) r.threshold = j.at("threshold").get<double>();
  return r;
}

json delta_map_json(const std::map<std::string, DeltaEntry>& m) {
  json j = json::object();
  for (const auto& [k, d] : m) j[k] = {{"accuracy", d.accuracy}, {"macro_f1", d.macro_f1}};
  return j;
}

const ScoreRow* find_row(const std::vector<ScoreRow>& rows, std::string_view name) {
  for (const auto& r : rows) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::string pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << 100.0 * v;
  return os.str();
}

std::string signed_pct(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(1) << std::showpos << 100.0 * v;
  return os.str();
}

}  // namespace

json DeltaReport::to_json() const {
  return json{{"per_dataset", delta_map_json(per_dataset)},
              {"per_group", delta_map_json(per_group)},
              {"skipped", skipped}};
}

const ScoreRow* EvaluationReport::dataset(std::string_view name) const { return find_row(per_dataset, name); }
const ScoreRow* EvaluationReport::group(std::string_view name) const { return find_row(per_group, name); }

json EvaluationReport::to_json() const {
  json ds = json::object();
  for (const auto& r : per_dataset) ds[r.name] = row_json(r);
  json gs = json::object();
  for (const auto& r : per_group) gs[r.name] = row_json(r);
  json order = json::array();
  for (const auto& r : per_group) order.push_back(r.name);
  json j{{"threshold_mode", threshold_mode},
         {"threshold_scope", threshold_scope},
         {"per_dataset", ds},
         {"per_group", gs},
         {"group_order", order}};
  j["threshold_used"] = threshold_used ? json(*threshold_used) : json(nullptr);
  if (baseline_deltas) j["baseline_deltas"] = baseline_deltas->to_json();
  return j;
}

EvaluationReport EvaluationReport::from_json(const json& j) {
  EvaluationReport r;
  try {
    r.threshold_mode = j.value("threshold_mode", r.threshold_mode);
    r.threshold_scope = j.value("threshold_scope", r.threshold_scope);
    if (j.contains("threshold_used") && !j.at("threshold_used").is_null()) {
      r.threshold_used = j.at("threshold_used").get<double>();
    }
    for (const auto& [name, row] : j.at("per_dataset").items()) r.per_dataset.push_back(row_from_json(name, row));
    const auto& groups = j.at("per_group");
    std::vector<std::string> order = j.value("group_order", std::vector<std::string>{});
    for (const auto& [name, _] : groups.items()) {
      if (std::find(order.begin(), order.end(), name) == order.end()) order.push_back(name);
    }
    for (const auto& name : order) {
      if (groups.contains(name)) r.per_group.push_back(row_from_json(name, groups.at(name)));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("evaluation report: ") + e.what());
  }
  return r;
}

std::string EvaluationReport::render_table() const {
  const bool deltas = baseline_deltas.has_value();
  std::size_t width = 7;
  for (const auto& r : per_dataset) width = std::max(width, r.name.size());
  for (const auto& r : per_group) width = std::max(width, r.name.size());
  std::ostringstream os;
  auto header = [&] {
    os << std::left << std::setw(static_cast<int>(width)) << "Dataset" << std::right << std::setw(9) << "n"
       << std::setw(8) << "Thr" << std::setw(8) << "Acc" << std::setw(8) << "F1";
    if (deltas) os << std::setw(8) << "dF1";
    os << '\n';
  };
  auto line = [&](const ScoreRow& r, const std::map<std::string, DeltaEntry>* dm) {
    std::ostringstream thr;
    if (r.threshold) thr << std::fixed << std::setprecision(3) << *r.threshold;
    else if (threshold_used) thr << std::fixed << std::setprecision(3) << *threshold_used;
    else thr << "-";
    os << std::left << std::setw(static_cast<int>(width)) << r.name << std::right << std::setw(9) << r.n
       << std::setw(8) << thr.str() << std::setw(8) << pct(r.accuracy) << std::setw(8) << pct(r.macro_f1);
    if (deltas) {
      auto it = dm->find(r.name);
      os << std::setw(8) << (it == dm->end() ? std::string("-") : signed_pct(it->second.macro_f1));
    }
    os << '\n';
  };
  header();
  for (const auto& r : per_dataset) line(r, deltas ? &baseline_deltas->per_dataset : nullptr);
  os << std::string(width + 33 + (deltas ? 8 : 0), '-') << '\n';
  for (const auto& r : per_group) line(r, deltas ? &baseline_deltas->per_group : nullptr);
  return os.str();
}

EvaluationReport evaluate(std::span<const PredictionRecord> predictions, std::span<const GroupSpec> groups,
                          const ThresholdPolicy& policy, const std::vector<std::string>& dataset_order) {
  const std::set<std::string> known(dataset_order.begin(), dataset_order.end());
  std::map<std::string, std::vector<const PredictionRecord*>> by_dataset;
  std::vector<double> all_scores;
  for (const auto& p : predictions) {
    if (!known.count(p.dataset)) throw DataError("unknown dataset tag: " + p.dataset);
    by_dataset[p.dataset].push_back(&p);
    all_scores.push_back(p.score_hate);
  }
  if (predictions.empty()) throw DataError("evaluate: no predictions");

  EvaluationReport report;
  report.threshold_mode = policy.mode_string();
  report.threshold_scope = std::string(to_string(policy.scope));

  std::optional<double> single;
  if (policy.fixed) single = *policy.fixed;
  else if (policy.scope == ThresholdScope::Global) single = mean_probability_threshold(all_scores);
  report.threshold_used = single;

  auto scores_of = [](const std::vector<const PredictionRecord*>& rows) {
    std::vector<double> s;
    for (const auto* r : rows) s.push_back(r->score_hate);
    return s;
  };
  auto confusion_at = [](const std::vector<const PredictionRecord*>& rows, double t) {
    ConfusionCounts c;
    for (const auto* r : rows) {
      const bool p = r->score_hate >= t;
      const bool g = r->gold == BinaryLabel::Hate;
      if (p && g) ++c.tp;
      else if (p) ++c.fp;
      else if (g) ++c.fn;
      else ++c.tn;
    }
    return c;
  };

  std::map<std::string, ConfusionCounts> dataset_confusion;
  for (const auto& name : dataset_order) {
    auto it = by_dataset.find(name);
    if (it == by_dataset.end()) continue;
    const double t = single ? *single : mean_probability_threshold(scores_of(it->second));
    dataset_confusion[name] = confusion_at(it->second, t);
    report.per_dataset.push_back(score_row(name, dataset_confusion[name], single ? std::nullopt : std::optional(t)));
  }

  for (const auto& g : groups) {
    std::vector<const PredictionRecord*> rows;
    for (const auto& name : dataset_order) {
      if (!g.members.count(name)) continue;
      if (auto it = by_dataset.find(name); it != by_dataset.end()) rows.insert(rows.end(), it->second.begin(), it->second.end());
    }
    if (rows.empty()) continue;
    if (policy.scope == ThresholdScope::Group && !single) {
      const double t = mean_probability_threshold(scores_of(rows));
      report.per_group.push_back(score_row(g.name, confusion_at(rows, t), t));
    } else {
      ConfusionCounts pooled;
      for (const auto& m : g.members) {
        if (auto it = dataset_confusion.find(m); it != dataset_confusion.end()) pooled += it->second;
      }
      report.per_group.push_back(score_row(g.name, pooled));
    }
  }
  return report;
}

DeltaReport delta_report(const EvaluationReport& report, const EvaluationReport& baseline) {
  DeltaReport d;
  std::size_t shared = 0;
  auto fill = [&](const std::vector<ScoreRow>& rows, const std::vector<ScoreRow>& base,
                  std::map<std::string, DeltaEntry>& out, const char* section) {
    for (const auto& r : rows) {
      const ScoreRow* b = find_row(base, r.name);
      if (!b) {
        d.skipped.push_back(std::string(section) + ":" + r.name);
        continue;
      }
      out[r.name] = {r.accuracy - b->accuracy, r.macro_f1 - b->macro_f1};
      ++shared;
    }
  };
  fill(report.per_dataset, baseline.per_dataset, d.per_dataset, "dataset");
  fill(report.per_group, baseline.per_group, d.per_group, "group");
  if (shared == 0) throw DataError("delta_report: report and baseline share no keys");
  return d;
}

}  // namespace hatelab
