#include "hatelab/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <sstream>

#include "hatelab/error.hpp"

namespace hatelab::log {

namespace {

std::atomic<Level> g_level{Level::Info};
std::mutex g_mu;

std::string_view name(Level l) {
  switch (l) {
    case Level::Debug: return "debug";
    case Level::Info: return "info";
    case Level::Warn: return "warn";
    case Level::Error: return "error";
    case Level::Off: return "off";
  }
  return "?";
}

void quoted(std::ostream& os, std::string_view v) {
  bool plain = !v.empty() && v.find_first_of(" \"=\t\n") == std::string_view::npos;
  if (plain) {
    os << v;
    return;
  }
  os << '"';
  for (char c : v) {
    if (c == '"' || c == '\\') os << '\\';
    if (c == '\n') {
      os << "\\n";
      continue;
    }
    os << c;
  }
  os << '"';
}

}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

Level parse_level(std::string_view s) {
  for (Level l : {Level::Debug, Level::Info, Level::Warn, Level::Error, Level::Off}) {
    if (name(l) == s) return l;
  }
  throw ConfigError("unknown log level: " + std::string(s));
}

void write(Level lvl, std::string_view msg, std::initializer_list<Field> fields) {
  if (lvl < g_level.load()) return;
  std::ostringstream os;
  os << "level=" << name(lvl) << " msg=";
  quoted(os, msg);
  for (const auto& [k, v] : fields) {
    os << ' ' << k << '=';
    quoted(os, v);
  }
  os << '\n';
  std::lock_guard lock(g_mu);
  std::cerr << os.str();
}

}  // namespace hatelab::log
