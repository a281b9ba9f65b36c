#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "json.hpp"

#include "hatelab/prompt.hpp"

namespace httplib {
class Server;
}

namespace hatelab {

// Completions endpoint that replays scripted next-token distributions.
//
// Fixture:
//   {"models": {
//      "<model_id>": {
//        "default":    {"1": 0.6, "2": 0.3},        token -> probability
//        "by_comment": {"<comment>": {"1": 0.9}},   per-comment override
//        "fail_status": 500,                        answer every request with this status
//        "fail_first": 2,                           fail the first N requests per comment
//        "malformed": true,                         answer with a body lacking logprobs
//        "delay_ms": 20 }}}
//
// POST <path> answers completions; GET /probe?model=<id> reports
// {"requests", "max_in_flight"} observed for that model; POST /reset clears
// the counters.
class MockLlmServer {
 public:
  explicit MockLlmServer(nlohmann::json fixture, PromptTemplate tmpl = {},
                         std::string path = "/v1/completions");
  ~MockLlmServer();

  MockLlmServer(const MockLlmServer&) = delete;
  MockLlmServer& operator=(const MockLlmServer&) = delete;

  // Binds (port 0 = any free port), starts serving on a background thread,
  // and returns the bound port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  void stop();

  // Blocks serving on the calling thread (for the standalone binary).
  bool listen(const std::string& host, int port);

  std::string base_url() const;

  struct Probe {
    long requests{0};
    long max_in_flight{0};
  };
  Probe probe(const std::string& model) const;
  void reset_counters();

 private:
  struct Counters {
    std::atomic<long> requests{0};
    std::atomic<long> in_flight{0};
    std::atomic<long> max_in_flight{0};
  };

  void install_routes();
  nlohmann::json completion(const std::string& model, const std::string& prompt, int& status);

  nlohmann::json fixture_;
  PromptTemplate tmpl_;
  std::string path_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_{0};
  std::map<std::string, std::unique_ptr<Counters>> counters_;
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, long> attempts_;  // (model, comment)
};

}  // namespace hatelab
