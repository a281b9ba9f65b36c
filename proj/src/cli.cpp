#include "hatelab/cli.hpp"

#include <iostream>

#include "CLI11.hpp"

#include "hatelab/error.hpp"
#include "hatelab/log.hpp"
#include "hatelab/stages.hpp"

namespace hatelab {

namespace {

std::map<std::string, std::uint64_t> parse_quotas(const std::vector<std::string>& items) {
  std::map<std::string, std::uint64_t> out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw CLI::ValidationError("--quota", "expected lang=count, got '" + item + "'");
    }
    const std::string count = item.substr(eq + 1);
    if (count.find_first_not_of("0123456789") != std::string::npos) {
      throw CLI::ValidationError("--quota", "count must be a nonnegative integer: '" + item + "'");
    }
    out[item.substr(0, eq)] = std::stoull(count);
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& argv) {
  CLI::App app{"Batch toolkit for LLM-ensemble hate-speech annotation and evaluation", "hatelab"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::optional<std::uint64_t> global_seed;
  std::string log_level = "info";
  app.add_option("--seed", global_seed, "Default seed for seeded stages");
  app.add_option("--log-level", log_level, "debug|info|warn|error|off");

  FilterStageOptions filter;
  std::vector<std::string> quotas;
  std::optional<std::uint64_t> filter_seed;
  auto* f = app.add_subcommand("filter", "Keep conversational web records");
  f->add_option("--in", filter.in, "Web records (JSON lines, - for stdin)")->required();
  f->add_option("--out", filter.out, "Kept records (JSON lines, - for stdout)")->required();
  f->add_option("--config", filter.config, "Run config with a \"filter\" section");
  f->add_option("--stats", filter.stats, "Write the stats object here instead of stderr");
  f->add_option("--seed", filter_seed, "Seed for per-language sub-sampling");
  f->add_option("--quota", quotas, "Per-language cap, lang=count (repeatable)");

  IngestStageOptions ingest;
  auto* i = app.add_subcommand("ingest", "Map a labelled dataset onto Hate/Neutral");
  i->add_option("--dataset", ingest.dataset, "Dataset name from the registry")->required();
  i->add_option("--in", ingest.in, "CSV, TSV or JSON-lines file")->required();
  i->add_option("--out", ingest.out, "Labelled examples (JSON lines)")->required();
  i->add_option("--registry", ingest.registry, "Dataset registry (default: built-in)");
  i->add_option("--format", ingest.format, "csv|tsv|jsonl (default: by extension)");
  i->add_option("--id-col", ingest.id_column);
  i->add_option("--text-col", ingest.text_column);
  i->add_option("--label-col", ingest.label_column);

  AnnotateStageOptions annotate;
  std::optional<std::uint64_t> annotate_seed;
  auto* a = app.add_subcommand("annotate", "Collect label probabilities from four LLM endpoints");
  a->add_option("--in", annotate.in, "Texts (JSON lines with id, text)")->required();
  a->add_option("--endpoints", annotate.endpoints, "Endpoint config")->required();
  a->add_option("--out", annotate.out, "Annotations (JSON lines)")->required();
  a->add_option("--dead-letter", annotate.dead_letter, "Quarantined texts (JSON lines)")->required();
  a->add_option("--seed", annotate_seed, "Seed for retry jitter");

  TrainMetaStageOptions train;
  auto* t = app.add_subcommand("train-meta", "Train the boosted-tree meta-learner");
  t->add_option("--features", train.features, "Annotations of labelled texts")->required();
  t->add_option("--labels", train.labels, "Labelled examples (JSON lines)")->required();
  t->add_option("--out", train.out, "Model file")->required();
  t->add_option("--config", train.config, "Run config with a \"meta\" section");
  t->add_option("--seed", train.seed);

  EnsembleStageOptions ensemble;
  auto* e = app.add_subcommand("ensemble", "Label annotations with vote, mean or lgb");
  e->add_option("--strategy", ensemble.strategy)->required()->check(CLI::IsMember({"vote", "mean", "lgb"}));
  e->add_option("--in", ensemble.in, "Annotations (JSON lines)")->required();
  e->add_option("--model", ensemble.model, "Meta-learner model (lgb)");
  e->add_option("--labels", ensemble.labels, "Labelled examples to attach dataset and gold");
  e->add_option("--out", ensemble.out, "Predictions (JSON lines)");

  EvaluateStageOptions evaluate;
  auto* v = app.add_subcommand("evaluate", "Score predictions per dataset and pooled per group");
  v->add_option("--preds", evaluate.preds, "Predictions with dataset, score_hate, gold")->required();
  v->add_option("--groups", evaluate.groups, "Group config (default: language, 7-Set, Rest, All)");
  v->add_option("--threshold", evaluate.threshold, "mean|fixed:<v>");
  v->add_option("--threshold-scope", evaluate.threshold_scope, "group|dataset|global")
      ->check(CLI::IsMember({"group", "dataset", "global"}));
  v->add_option("--baseline", evaluate.baseline, "Baseline report for signed deltas");
  v->add_option("--registry", evaluate.registry, "Dataset registry (default: built-in)");
  v->add_option("--out", evaluate.out, "Report (JSON)")->required();
  v->add_option("--table", evaluate.table, "Also write an aligned text table");

  StatsStageOptions stats;
  auto* s = app.add_subcommand("stats", "Per-language pool statistics");
  s->add_option("--in", stats.in, "Annotations (JSON lines)")->required();
  s->add_option("--model", stats.model, "Meta-learner model, adds the lgb row");
  s->add_option("--out", stats.out, "Summary (JSON)")->required();
  s->add_option("--table", stats.table, "Also write an aligned text table");

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    std::cout << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& err) {
    std::cerr << "error: " << err.what() << "\n\n";
    const auto subs = app.get_subcommands();
    std::cerr << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  try {
    log::set_level(log::parse_level(log_level));
    filter.quotas = parse_quotas(quotas);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitUsage;
  }
  filter.seed = filter_seed.value_or(global_seed.value_or(0));
  annotate.seed = annotate_seed.value_or(global_seed.value_or(0));
  if (!train.seed) train.seed = global_seed;

  try {
    if (f->parsed()) return run_filter_stage(filter);
    if (i->parsed()) return run_ingest_stage(ingest);
    if (a->parsed()) return run_annotate_stage(annotate);
    if (t->parsed()) return run_train_meta_stage(train);
    if (e->parsed()) return run_ensemble_stage(ensemble);
    if (v->parsed()) return run_evaluate_stage(evaluate);
    if (s->parsed()) return run_stats_stage(stats);
  } catch (const ConfigError& err) {
    log::error(err.what());
    return kExitUsage;
  } catch (const DataError& err) {
    log::error(err.what());
    return kExitDataError;
  } catch (const std::exception& err) {
    log::error(err.what());
    return kExitDataError;
  }
  return kExitUsage;
}

int run_cli(int argc, char** argv) { return run_cli(std::vector<std::string>(argv, argv + argc)); }

}  // namespace hatelab
