#include "hatelab/stages.hpp"

#include <iostream>
#include <set>

#include "hatelab/annotation_stats.hpp"
#include "hatelab/annotator_gateway.hpp"
#include "hatelab/corpus_filter.hpp"
#include "hatelab/dataset_ingest.hpp"
#include "hatelab/ensemble.hpp"
#include "hatelab/error.hpp"
#include "hatelab/eval_metrics.hpp"
#include "hatelab/jsonl.hpp"
#include "hatelab/log.hpp"
#include "hatelab/meta_learner.hpp"

namespace hatelab {

namespace {

// A run config holds one section per stage; a file may also be the bare
// section.
json config_section(const json& doc, const char* name) {
  if (doc.is_object() && doc.contains(name)) return doc.at(name);
  return doc;
}

const DatasetRegistry& load_registry(const std::optional<std::string>& path, DatasetRegistry& storage) {
  if (!path) return DatasetRegistry::builtin();
  storage = DatasetRegistry::from_file(*path);
  return storage;
}

std::vector<AnnotationRecord> read_annotations(const std::string& path) {
  std::vector<AnnotationRecord> out;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    try {
      out.push_back(AnnotationRecord::from_json(j));
    } catch (const DataError& e) {
      throw DataError(path + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

std::map<std::string, LabeledExample> read_labels(const std::string& path) {
  std::map<std::string, LabeledExample> out;
  for_each_jsonl(path, [&](const json& j, std::size_t line) {
    LabeledExample e;
    try {
      e = labeled_example_from_json(j);
    } catch (const DataError& ex) {
      throw DataError(path + ":" + std::to_string(line) + ": " + ex.what());
    }
    if (out.count(e.id)) throw DataError(path + ":" + std::to_string(line) + ": duplicate id " + e.id);
    out.emplace(e.id, std::move(e));
  });
  return out;
}

MetaLearnerModel load_model(const std::string& path) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw DataError(path + ": invalid JSON");
  return MetaLearnerModel::from_json(j);
}

}  // namespace

int run_filter_stage(const FilterStageOptions& o) {
  FilterConfig cfg;
  if (o.config) cfg = FilterConfig::from_json(config_section(read_json_file(*o.config), "filter"));
  CorpusFilter filter(cfg);
  std::optional<LanguageSampler> sampler;
  if (!o.quotas.empty()) sampler.emplace(o.quotas, o.seed);

  AtomicWriter out(o.out);
  std::uint64_t malformed = 0;
  for_each_jsonl(o.in, [&](const json& j, std::size_t line) {
    WebRecord r;
    try {
      r = web_record_from_json(j);
    } catch (const DataError& e) {
      ++malformed;
      log::warn("skipping malformed record", {{"line", std::to_string(line)}, {"error", e.what()}});
      return;
    }
    if (!filter.offer(r)) return;
    if (sampler) sampler->offer(std::move(r));
    else out.write_line(to_json(r));
  });
  std::uint64_t emitted = filter.stats().kept;
  if (sampler) {
    auto sampled = sampler->take();
    emitted = sampled.size();
    for (const auto& r : sampled) out.write_line(to_json(r));
  }
  out.commit();

  json stats = filter.stats().to_json();
  stats["malformed"] = malformed;
  stats["emitted"] = emitted;
  if (o.stats) {
    write_file_atomic(*o.stats, dump_line(stats) + "\n");
  } else {
    std::cerr << dump_line(stats) << '\n';
  }
  log::info("filter done", {{"seen", std::to_string(filter.stats().records_seen)},
                            {"kept", std::to_string(filter.stats().kept)},
                            {"emitted", std::to_string(emitted)}});
  return kExitOk;
}

int run_ingest_stage(const IngestStageOptions& o) {
  DatasetRegistry storage;
  const auto& reg = load_registry(o.registry, storage);
  const auto& spec = reg.get(o.dataset);
  IngestOptions opts;
  if (o.format) {
    if (*o.format == "csv") opts.format = InputFormat::Csv;
    else if (*o.format == "tsv") opts.format = InputFormat::Tsv;
    else if (*o.format == "jsonl") opts.format = InputFormat::Jsonl;
    else throw ConfigError("unknown format: " + *o.format);
  }
  opts.id_column = o.id_column;
  opts.text_column = o.text_column;
  opts.label_column = o.label_column;
  const auto examples = ingest_dataset(spec, o.in, opts);

  AtomicWriter out(o.out);
  for (const auto& e : examples) out.write_line(to_json(e));
  out.commit();

  const auto st = dataset_stats(examples);
  if (st.empty_warning) log::warn("dataset is empty", {{"dataset", spec.name}});
  log::info("ingest done", {{"dataset", spec.name},
                            {"count", std::to_string(st.count)},
                            {"hate_fraction", std::to_string(st.hate_fraction)}});
  return kExitOk;
}

int run_annotate_stage(const AnnotateStageOptions& o) {
  const json doc = config_section(read_json_file(o.endpoints), "annotate");
  std::vector<AnnotatorEndpoint> endpoints;
  if (!doc.contains("endpoints") || !doc.at("endpoints").is_array()) {
    throw ConfigError(o.endpoints + ": expected an \"endpoints\" array");
  }
  for (const auto& e : doc.at("endpoints")) endpoints.push_back(AnnotatorEndpoint::from_json(e));
  PromptTemplate tmpl = doc.contains("prompt") ? PromptTemplate::from_json(doc.at("prompt")) : PromptTemplate{};

  std::vector<AnnotationInput> inputs;
  for_each_jsonl(o.in, [&](const json& j, std::size_t line) {
    try {
      inputs.push_back(annotation_input_from_json(j));
    } catch (const DataError& e) {
      throw DataError(o.in + ":" + std::to_string(line) + ": " + e.what());
    }
  });

  const auto result = annotate_batch(inputs, endpoints, tmpl, AnnotateOptions{o.seed});

  AtomicWriter out(o.out);
  for (const auto& r : result.annotated) out.write_line(r.to_json());
  AtomicWriter dead(o.dead_letter);
  for (const auto& q : result.quarantined) dead.write_line(q.to_json());
  out.commit();
  dead.commit();

  log::info("annotate done", {{"texts", std::to_string(inputs.size())},
                              {"annotated", std::to_string(result.annotated.size())},
                              {"quarantined", std::to_string(result.quarantined.size())}});
  return result.quarantined.empty() ? kExitOk : kExitPartialFailure;
}

int run_train_meta_stage(const TrainMetaStageOptions& o) {
  MetaLearnerConfig cfg;
  if (o.config) cfg = MetaLearnerConfig::from_json(config_section(read_json_file(*o.config), "meta"));
  if (o.seed) cfg.seed = *o.seed;

  const auto annotations = read_annotations(o.features);
  const auto labels = read_labels(o.labels);
  std::vector<ProbabilityVector> vectors;
  std::vector<BinaryLabel> golds;
  std::uint64_t unmatched = 0;
  for (const auto& a : annotations) {
    auto it = labels.find(a.id);
    if (it == labels.end()) {
      ++unmatched;
      continue;
    }
    vectors.push_back(a.probabilities);
    golds.push_back(it->second.gold);
  }
  if (unmatched) log::warn("annotations without a gold label were ignored", {{"count", std::to_string(unmatched)}});
  const auto model = train_meta(vectors, golds, cfg);
  write_file_atomic(o.out, model.to_json().dump(2) + "\n");
  log::info("train-meta done", {{"rows", std::to_string(vectors.size())}, {"seed", std::to_string(cfg.seed)}});
  return kExitOk;
}

int run_ensemble_stage(const EnsembleStageOptions& o) {
  const Strategy strategy = parse_strategy(o.strategy);
  std::optional<MetaLearnerModel> model;
  if (strategy == Strategy::Lgb) {
    if (!o.model) throw ConfigError("--strategy lgb requires --model");
    model = load_model(*o.model);
  }
  std::map<std::string, LabeledExample> labels;
  if (o.labels) labels = read_labels(*o.labels);

  AtomicWriter out(o.out);
  std::uint64_t hate = 0;
  std::uint64_t total = 0;
  for_each_jsonl(o.in, [&](const json& j, std::size_t line) {
    AnnotationRecord a;
    try {
      a = AnnotationRecord::from_json(j);
    } catch (const DataError& e) {
      throw DataError(o.in + ":" + std::to_string(line) + ": " + e.what());
    }
    const auto d = decide(strategy, a.probabilities, model ? &*model : nullptr);
    json row{{"id", a.id},
             {"lang", a.lang},
             {"strategy", to_string(strategy)},
             {"label", to_string(d.label)},
             {"score_hate", d.score_hate},
             {"score_neutral", d.score_neutral}};
    if (a.dataset) row["dataset"] = *a.dataset;
    if (auto it = labels.find(a.id); it != labels.end()) {
      row["dataset"] = it->second.dataset;
      row["gold"] = to_string(it->second.gold);
    }
    out.write_line(row);
    ++total;
    hate += d.label == BinaryLabel::Hate ? 1 : 0;
  });
  out.commit();
  log::info("ensemble done", {{"strategy", std::string(to_string(strategy))},
                              {"rows", std::to_string(total)},
                              {"hate", std::to_string(hate)}});
  return kExitOk;
}

int run_evaluate_stage(const EvaluateStageOptions& o) {
  DatasetRegistry storage;
  const auto& reg = load_registry(o.registry, storage);
  const auto policy = ThresholdPolicy::parse(o.threshold, o.threshold_scope);
  const auto groups = o.groups ? groups_from_json(config_section(read_json_file(*o.groups), "evaluate"))
                               : default_groups(reg);

  std::vector<PredictionRecord> preds;
  for_each_jsonl(o.preds, [&](const json& j, std::size_t line) {
    try {
      preds.push_back(prediction_from_json(j));
    } catch (const DataError& e) {
      throw DataError(o.preds + ":" + std::to_string(line) + ": " + e.what());
    }
  });

  auto report = evaluate(preds, groups, policy, reg.names());
  for (const auto& g : groups) {
    if (!report.group(g.name)) log::warn("group has no predictions; omitted", {{"group", g.name}});
  }
  if (o.baseline) {
    const auto baseline = EvaluationReport::from_json(read_json_file(*o.baseline));
    report.baseline_deltas = delta_report(report, baseline);
    for (const auto& k : report.baseline_deltas->skipped) {
      log::warn("key missing from baseline; skipped", {{"key", k}});
    }
  }
  write_file_atomic(o.out, report.to_json().dump(2) + "\n");
  if (o.table) write_file_atomic(*o.table, report.render_table());
  return kExitOk;
}

int run_stats_stage(const StatsStageOptions& o) {
  std::optional<MetaLearnerModel> model;
  if (o.model) model = load_model(*o.model);
  std::vector<PoolRow> pool;
  for (auto& a : read_annotations(o.in)) pool.push_back({a.lang, std::move(a.probabilities), a.raw_label});
  const auto summary = pool_statistics(pool, model ? &*model : nullptr);
  write_file_atomic(o.out, summary.to_json().dump(2) + "\n");
  if (o.table) write_file_atomic(*o.table, summary.render_table());
  return kExitOk;
}

}  // namespace hatelab
