#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace hatelab {

// Exit statuses shared by every stage.
enum ExitStatus : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitDataError = 2,
  kExitPartialFailure = 3,
};

// Each stage reads its inputs, writes outputs atomically and returns an exit
// status. Errors propagate as hatelab::Error subclasses; run_cli maps them.

struct FilterStageOptions {
  std::string in{"-"};
  std::string out{"-"};
  std::optional<std::string> config;
  std::optional<std::string> stats;  // default: one JSON line on stderr
  std::uint64_t seed{0};
  std::map<std::string, std::uint64_t> quotas;
};
int run_filter_stage(const FilterStageOptions& o);

struct IngestStageOptions {
  std::string dataset;
  std::string in;
  std::string out{"-"};
  std::optional<std::string> registry;
  std::optional<std::string> format;
  std::optional<std::string> id_column;
  std::optional<std::string> text_column;
  std::optional<std::string> label_column;
};
int run_ingest_stage(const IngestStageOptions& o);

struct AnnotateStageOptions {
  std::string in;
  std::string endpoints;
  std::string out{"-"};
  std::string dead_letter;
  std::uint64_t seed{0};
};
int run_annotate_stage(const AnnotateStageOptions& o);

struct TrainMetaStageOptions {
  std::string features;
  std::string labels;
  std::string out;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
};
int run_train_meta_stage(const TrainMetaStageOptions& o);

struct EnsembleStageOptions {
  std::string strategy{"vote"};
  std::string in;
  std::optional<std::string> model;
  std::optional<std::string> labels;
  std::string out{"-"};
};
int run_ensemble_stage(const EnsembleStageOptions& o);

struct EvaluateStageOptions {
  std::string preds;
  std::optional<std::string> groups;
  std::string threshold{"mean"};
  std::string threshold_scope{"group"};
  std::optional<std::string> baseline;
  std::optional<std::string> registry;
  std::string out{"-"};
  std::optional<std::string> table;
};
int run_evaluate_stage(const EvaluateStageOptions& o);

struct StatsStageOptions {
  std::string in;
  std::optional<std::string> model;
  std::string out{"-"};
  std::optional<std::string> table;
};
int run_stats_stage(const StatsStageOptions& o);

}  // namespace hatelab
