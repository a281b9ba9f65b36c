#include "hatelab/annotator_gateway.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <set>
#include <thread>

#include "httplib.h"

#include "hatelab/error.hpp"
#include "hatelab/log.hpp"
#include "hatelab/rng.hpp"

namespace hatelab {

using nlohmann::json;

namespace {

std::optional<std::string> optional_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw DataError(std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

struct Outcome {
  std::optional<LabelProbability> probability;
  TokenWeights raw;
  std::string error;
};

class EndpointWorker {
 public:
  EndpointWorker(const AnnotatorEndpoint& ep, const PromptTemplate& tmpl, std::uint64_t seed)
      : ep_(ep), tmpl_(tmpl), client_(ep.base_url), rng_(seed) {
    client_.set_connection_timeout(ep.timeout);
    client_.set_read_timeout(ep.timeout);
    client_.set_write_timeout(ep.timeout);
    client_.set_keep_alive(true);
    if (ep.auth_token) client_.set_bearer_token_auth(*ep.auth_token);
  }

  Outcome annotate(const AnnotationInput& in) {
    Outcome out;
    const std::string context = "text " + in.id + ", model " + ep_.model_id;
    std::string body;
    try {
      body = completion_request(ep_, render_prompt(tmpl_, in.text)).dump();
    } catch (const Error& e) {
      out.error = e.what();
      return out;
    }
    for (int attempt = 0; attempt <= ep_.retry_limit; ++attempt) {
      if (attempt > 0) sleep_backoff(attempt);
      auto res = client_.Post(ep_.path, body, "application/json");
      if (!res) {
        out.error = "request failed: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        out.error = "HTTP " + std::to_string(res->status);
        continue;
      }
      try {
        out.raw = parse_completion_response(res->body);
      } catch (const DataError& e) {
        out.error = std::string(e.what()) + " (" + context + ")";
        continue;
      }
      try {
        out.probability = extract_label_probabilities(out.raw, tmpl_, context);
        out.error.clear();
      } catch (const DataError& e) {
        // Same prompt gives the same distribution; retrying will not help.
        out.error = e.what();
      }
      return out;
    }
    return out;
  }

 private:
  void sleep_backoff(int attempt) {
    const double base = static_cast<double>(ep_.backoff.count()) * std::ldexp(1.0, attempt - 1);
    const double jittered = base * (0.5 + uniform_unit(rng_));
    std::this_thread::sleep_for(std::chrono::microseconds(static_cast<std::int64_t>(jittered * 1000.0)));
  }

  const AnnotatorEndpoint& ep_;
  const PromptTemplate& tmpl_;
  httplib::Client client_;
  Rng rng_;
};

json weights_to_json(const TokenWeights& w) {
  json j = json::object();
  for (const auto& [k, v] : w) j[k] = v;
  return j;
}

}  // namespace

void AnnotatorEndpoint::validate() const {
  if (model_id.empty()) throw ConfigError("endpoint: empty model_id");
  if (!base_url.starts_with("http://")) {
    throw ConfigError("endpoint " + model_id + ": base_url must be an http:// URL, got '" + base_url + "'");
  }
  if (max_in_flight < 1) throw ConfigError("endpoint " + model_id + ": max_in_flight must be >= 1");
  if (timeout.count() <= 0) throw ConfigError("endpoint " + model_id + ": timeout must be > 0");
  if (retry_limit < 0) throw ConfigError("endpoint " + model_id + ": retry_limit must be >= 0");
  if (top_logprobs < 1) throw ConfigError("endpoint " + model_id + ": logprobs must be >= 1");
}

AnnotatorEndpoint AnnotatorEndpoint::from_json(const json& j) {
  AnnotatorEndpoint ep;
  try {
    ep.model_id = j.at("model_id").get<std::string>();
    ep.base_url = j.at("base_url").get<std::string>();
    ep.path = j.value("path", ep.path);
    if (j.contains("auth_token")) ep.auth_token = j.at("auth_token").get<std::string>();
    if (j.contains("auth_token_env")) {
      const auto var = j.at("auth_token_env").get<std::string>();
      if (const char* v = std::getenv(var.c_str()); v && *v) ep.auth_token = v;
    }
    ep.max_in_flight = j.value("max_in_flight", ep.max_in_flight);
    ep.timeout = std::chrono::milliseconds(j.value("timeout_ms", static_cast<long>(ep.timeout.count())));
    ep.retry_limit = j.value("retry_limit", ep.retry_limit);
    ep.backoff = std::chrono::milliseconds(j.value("backoff_ms", static_cast<long>(ep.backoff.count())));
    ep.top_logprobs = j.value("logprobs", ep.top_logprobs);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("endpoint config: ") + e.what());
  }
  ep.validate();
  return ep;
}

json completion_request(const AnnotatorEndpoint& endpoint, const std::string& prompt) {
  return json{{"model", endpoint.model_id},
              {"prompt", prompt},
              {"max_tokens", 1},
              {"logprobs", endpoint.top_logprobs}};
}

TokenWeights parse_completion_response(std::string_view body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DataError("malformed response: not a JSON object");
  auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    throw DataError("malformed response: no choices");
  }
  const json& choice = (*choices)[0];
  auto lp = choice.find("logprobs");
  if (lp == choice.end() || !lp->is_object()) throw DataError("missing log-probabilities in response");
  auto top = lp->find("top_logprobs");
  if (top == lp->end() || !top->is_array() || top->empty() || !(*top)[0].is_object()) {
    throw DataError("missing log-probabilities in response");
  }
  TokenWeights w;
  for (const auto& [tok, v] : (*top)[0].items()) {
    if (!v.is_number()) throw DataError("malformed response: log-probability for '" + tok + "' is not a number");
    w[tok] += std::exp(v.get<double>());
  }
  return w;
}

AnnotationInput annotation_input_from_json(const json& j) {
  AnnotationInput in;
  auto id = optional_string(j, "id");
  auto text = optional_string(j, "text");
  if (!id || id->empty()) throw DataError("input record without id");
  if (!text) throw DataError("input record " + *id + " without text");
  in.id = *id;
  in.text = *text;
  in.lang = optional_string(j, "lang").value_or("other");
  in.dataset = optional_string(j, "dataset");
  in.raw_label = optional_string(j, "raw_label");
  return in;
}

json AnnotationRecord::to_json() const {
  json models = json::object();
  for (const auto& e : probabilities.entries()) {
    json m{{"hate", e.p_hate}, {"neutral", e.p_neutral}};
    if (auto it = raw.find(e.model_id); it != raw.end()) m["raw"] = weights_to_json(it->second);
    models[e.model_id] = std::move(m);
  }
  json j{{"id", id}, {"lang", lang}, {"models", std::move(models)}};
  if (dataset) j["dataset"] = *dataset;
  if (raw_label) j["raw_label"] = *raw_label;
  return j;
}

AnnotationRecord AnnotationRecord::from_json(const json& j) {
  AnnotationRecord r;
  auto id = optional_string(j, "id");
  if (!id || id->empty()) throw DataError("annotation without id");
  r.id = *id;
  r.lang = optional_string(j, "lang").value_or("other");
  r.dataset = optional_string(j, "dataset");
  r.raw_label = optional_string(j, "raw_label");
  auto models = j.find("models");
  if (models == j.end() || !models->is_object()) throw DataError("annotation " + r.id + " without models");
  std::vector<ModelScore> entries;
  try {
    for (const auto& [model, m] : models->items()) {
      entries.push_back({model, m.at("hate").get<double>(), m.at("neutral").get<double>()});
      if (auto raw = m.find("raw"); raw != m.end() && raw->is_object()) {
        auto& w = r.raw[model];
        for (const auto& [tok, v] : raw->items()) w[tok] = v.get<double>();
      }
    }
  } catch (const json::exception& e) {
    throw DataError("annotation " + r.id + ": " + e.what());
  }
  try {
    r.probabilities = ProbabilityVector(std::move(entries));
  } catch (const DataError& e) {
    throw DataError("annotation " + r.id + ": " + e.what());
  }
  return r;
}

json QuarantinedText::to_json() const {
  json j{{"id", input.id}, {"text", input.text}, {"lang", input.lang}, {"errors", errors}};
  if (input.dataset) j["dataset"] = *input.dataset;
  if (input.raw_label) j["raw_label"] = *input.raw_label;
  return j;
}

AnnotateResult annotate_batch(std::span<const AnnotationInput> texts,
                              std::span<const AnnotatorEndpoint> endpoints, const PromptTemplate& tmpl,
                              const AnnotateOptions& options) {
  if (endpoints.size() != kNumAnnotators) {
    throw ConfigError("annotate needs exactly 4 endpoints, got " + std::to_string(endpoints.size()));
  }
  tmpl.validate();
  std::vector<const AnnotatorEndpoint*> eps;
  std::set<std::string> ids;
  for (const auto& ep : endpoints) {
    ep.validate();
    if (!ids.insert(ep.model_id).second) throw ConfigError("duplicate endpoint model_id " + ep.model_id);
    eps.push_back(&ep);
  }
  std::sort(eps.begin(), eps.end(),
            [](const AnnotatorEndpoint* a, const AnnotatorEndpoint* b) { return a->model_id < b->model_id; });

  AnnotateResult result;
  const std::size_t n = texts.size();
  if (n == 0) return result;

  // outcomes[text][slot]; each cell is written by exactly one worker thread.
  std::vector<std::array<Outcome, kNumAnnotators>> outcomes(n);
  std::array<std::atomic<std::size_t>, kNumAnnotators> next{};
  std::vector<std::jthread> workers;
  for (std::size_t slot = 0; slot < kNumAnnotators; ++slot) {
    const auto& ep = *eps[slot];
    const auto threads = std::min<std::size_t>(static_cast<std::size_t>(ep.max_in_flight), n);
    for (std::size_t t = 0; t < threads; ++t) {
      const std::uint64_t seed = derive_seed(options.seed + t, ep.model_id);
      workers.emplace_back([&, slot, seed] {
        EndpointWorker worker(*eps[slot], tmpl, seed);
        for (std::size_t i = next[slot]++; i < n; i = next[slot]++) {
          outcomes[i][slot] = worker.annotate(texts[i]);
        }
      });
    }
  }
  workers.clear();  // joins

  for (std::size_t i = 0; i < n; ++i) {
    QuarantinedText q{texts[i], {}};
    std::vector<ModelScore> scores;
    AnnotationRecord rec;
    for (std::size_t slot = 0; slot < kNumAnnotators; ++slot) {
      auto& o = outcomes[i][slot];
      const auto& model = eps[slot]->model_id;
      if (!o.probability) {
        q.errors[model] = o.error;
        continue;
      }
      scores.push_back({model, o.probability->p_hate, o.probability->p_neutral});
      rec.raw[model] = std::move(o.raw);
    }
    if (!q.errors.empty()) {
      log::warn("text quarantined", {{"id", texts[i].id}, {"failed_models", std::to_string(q.errors.size())}});
      result.quarantined.push_back(std::move(q));
      continue;
    }
    rec.id = texts[i].id;
    rec.lang = texts[i].lang;
    rec.dataset = texts[i].dataset;
    rec.raw_label = texts[i].raw_label;
    rec.probabilities = ProbabilityVector(std::move(scores));
    result.annotated.push_back(std::move(rec));
  }
  return result;
}

}  // namespace hatelab
