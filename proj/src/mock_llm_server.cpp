#include "hatelab/mock_llm_server.hpp"

#include <chrono>
#include <cmath>

#include "httplib.h"

#include "hatelab/error.hpp"

namespace hatelab {

using nlohmann::json;

MockLlmServer::MockLlmServer(json fixture, PromptTemplate tmpl, std::string path)
    : fixture_(std::move(fixture)), tmpl_(std::move(tmpl)), path_(std::move(path)),
      server_(std::make_unique<httplib::Server>()) {
  if (!fixture_.contains("models") || !fixture_.at("models").is_object()) {
    throw ConfigError("mock fixture needs a \"models\" object");
  }
  for (const auto& [model, _] : fixture_.at("models").items()) {
    counters_.emplace(model, std::make_unique<Counters>());
  }
  server_->new_task_queue = [] { return new httplib::ThreadPool(32); };
  install_routes();
}

MockLlmServer::~MockLlmServer() { stop(); }

void MockLlmServer::install_routes() {
  server_->Post(path_, [this](const httplib::Request& req, httplib::Response& res) {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.contains("model") || !body.contains("prompt")) {
      res.status = 400;
      res.set_content(R"({"error":"bad request"})", "application/json");
      return;
    }
    const auto model = body["model"].get<std::string>();
    auto c = counters_.find(model);
    if (c == counters_.end()) {
      res.status = 404;
      res.set_content(R"({"error":"unknown model"})", "application/json");
      return;
    }
    Counters& k = *c->second;
    ++k.requests;
    const long now = ++k.in_flight;
    long prev = k.max_in_flight.load();
    while (now > prev && !k.max_in_flight.compare_exchange_weak(prev, now)) {
    }
    int status = 200;
    json out = completion(model, body["prompt"].get<std::string>(), status);
    const json& spec = fixture_.at("models").at(model);
    if (auto d = spec.value("delay_ms", 0); d > 0) std::this_thread::sleep_for(std::chrono::milliseconds(d));
    --k.in_flight;
    res.status = status;
    res.set_content(out.dump(), "application/json");
  });

  server_->Get("/probe", [this](const httplib::Request& req, httplib::Response& res) {
    const auto p = probe(req.get_param_value("model"));
    res.set_content(json{{"requests", p.requests}, {"max_in_flight", p.max_in_flight}}.dump(),
                    "application/json");
  });

  server_->Post("/reset", [this](const httplib::Request&, httplib::Response& res) {
    reset_counters();
    res.set_content("{}", "application/json");
  });
}

json MockLlmServer::completion(const std::string& model, const std::string& prompt, int& status) {
  const json& spec = fixture_.at("models").at(model);
  std::string comment;
  if (!extract_comment(tmpl_, prompt, comment)) comment = prompt;

  if (spec.contains("fail_status")) {
    status = spec["fail_status"].get<int>();
    return json{{"error", "scripted failure"}};
  }
  if (auto n = spec.value("fail_first", 0L); n > 0) {
    std::lock_guard lock(mu_);
    if (attempts_[{model, comment}]++ < n) {
      status = 503;
      return json{{"error", "scripted transient failure"}};
    }
  }
  if (spec.value("malformed", false)) {
    return json{{"choices", json::array({json{{"index", 0}, {"text", "1"}}})}};
  }

  json weights = spec.value("default", json::object());
  if (auto by = spec.find("by_comment"); by != spec.end() && by->contains(comment)) {
    weights = (*by)[comment];
  }
  json top = json::object();
  std::string best;
  double best_lp = -INFINITY;
  for (const auto& [tok, w] : weights.items()) {
    const double p = w.get<double>();
    if (p <= 0.0) continue;
    const double lp = std::log(p);
    top[tok] = lp;
    if (lp > best_lp) {
      best_lp = lp;
      best = tok;
    }
  }
  json logprobs{{"tokens", json::array({best})},
                {"token_logprobs", json::array({best_lp})},
                {"top_logprobs", json::array({top})}};
  json choice{{"index", 0}, {"text", best}, {"logprobs", logprobs}, {"finish_reason", "length"}};
  return json{{"id", "mock-completion"},
              {"object", "text_completion"},
              {"model", model},
              {"choices", json::array({choice})}};
}

int MockLlmServer::start(const std::string& host, int port) {
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (port_ < 0) throw ConfigError("mock server: cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

bool MockLlmServer::listen(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  return server_->listen(host, port);
}

void MockLlmServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockLlmServer::base_url() const { return "http://" + host_ + ":" + std::to_string(port_); }

MockLlmServer::Probe MockLlmServer::probe(const std::string& model) const {
  auto it = counters_.find(model);
  if (it == counters_.end()) return {};
  return {it->second->requests.load(), it->second->max_in_flight.load()};
}

void MockLlmServer::reset_counters() {
  for (auto& [_, c] : counters_) {
    c->requests = 0;
    c->in_flight = 0;
    c->max_in_flight = 0;
  }
  std::lock_guard lock(mu_);
  attempts_.clear();
}

}  // namespace hatelab
