#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "hatelab/probability_vector.hpp"
#include "hatelab/prompt.hpp"

namespace hatelab {

struct AnnotatorEndpoint {
  std::string model_id;
  std::string base_url;  // http://host:port
  std::string path{"/v1/completions"};
  std::optional<std::string> auth_token;
  int max_in_flight{4};
  std::chrono::milliseconds timeout{30000};
  // Retries after the first attempt; a request is tried retry_limit + 1 times.
  int retry_limit{3};
  std::chrono::milliseconds backoff{200};
  int top_logprobs{20};

  void validate() const;

  // Reads {"model_id","base_url","path"?,"auth_token"?,"auth_token_env"?,
  // "max_in_flight"?,"timeout_ms"?,"retry_limit"?,"backoff_ms"?,"logprobs"?}.
  // A nonempty variable named by auth_token_env overrides auth_token.
  static AnnotatorEndpoint from_json(const nlohmann::json& j);
};

// Request body for one completion: {model, prompt, max_tokens: 1, logprobs: k}.
nlohmann::json completion_request(const AnnotatorEndpoint& endpoint, const std::string& prompt);

// Pulls the first position's top-k table out of a completions response and
// converts log-probabilities to probabilities. Throws DataError for a
// malformed body or missing log-probabilities.
TokenWeights parse_completion_response(std::string_view body);

// A text to annotate. lang, dataset and raw_label are carried through to the
// output untouched.
struct AnnotationInput {
  std::string id;
  std::string text;
  std::string lang;
  std::optional<std::string> dataset;
  std::optional<std::string> raw_label;
};

AnnotationInput annotation_input_from_json(const nlohmann::json& j);

// One output line of the annotate stage.
struct AnnotationRecord {
  std::string id;
  std::string lang;
  std::optional<std::string> dataset;
  std::optional<std::string> raw_label;
  ProbabilityVector probabilities;            // slots sorted by model id
  std::map<std::string, TokenWeights> raw;    // per model, top-k weights as received

  // {"id","lang","models":{"<model>":{"hate","neutral","raw"}}} plus
  // "dataset"/"raw_label" when set.
  nlohmann::json to_json() const;
  static AnnotationRecord from_json(const nlohmann::json& j);
};

struct QuarantinedText {
  AnnotationInput input;
  std::map<std::string, std::string> errors;  // model id -> last error

  nlohmann::json to_json() const;
};

struct AnnotateResult {
  std::vector<AnnotationRecord> annotated;  // input order, quarantined texts omitted
  std::vector<QuarantinedText> quarantined;  // input order
};

struct AnnotateOptions {
  // Seeds the backoff jitter only; outputs do not depend on it.
  std::uint64_t seed{0};
};

// Queries every endpoint for every text, at most max_in_flight requests in
// flight per endpoint. A text whose request to any endpoint still fails after
// retries (or whose response lacks both label tokens) goes to `quarantined`
// instead of `annotated`. Throws ConfigError unless there are exactly four
// endpoints with distinct model ids.
AnnotateResult annotate_batch(std::span<const AnnotationInput> texts,
                              std::span<const AnnotatorEndpoint> endpoints,
                              const PromptTemplate& tmpl, const AnnotateOptions& options = {});

}  // namespace hatelab
