// Standalone mock completions server for local pipeline runs.
#include <iostream>

#include "CLI11.hpp"

#include "hatelab/jsonl.hpp"
#include "hatelab/mock_llm_server.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Mock LLM completions endpoint replaying fixture weights", "hatelab-mock-llm"};
  std::string fixture;
  std::string host = "127.0.0.1";
  int port = 8080;
  app.add_option("--fixture", fixture, "Fixture JSON")->required();
  app.add_option("--host", host);
  app.add_option("--port", port);
  CLI11_PARSE(app, argc, argv);

  try {
    hatelab::MockLlmServer server(hatelab::read_json_file(fixture));
    std::cerr << "listening on http://" << host << ":" << port << '\n';
    return server.listen(host, port) ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
