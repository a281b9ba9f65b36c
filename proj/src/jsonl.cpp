#include "hatelab/jsonl.hpp"

#include <iostream>
#include <sstream>

#include <unistd.h>

#include "hatelab/error.hpp"

namespace hatelab {

namespace {

bool is_blank(const std::string& s) {
  return s.find_first_not_of(" \t\r\n") == std::string::npos;
}

void scan_lines(std::istream& in, const std::string& name,
                const std::function<void(const json&, std::size_t)>& fn) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_blank(line)) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) {
      throw DataError(name + ":" + std::to_string(lineno) +
                      ": not a JSON object");
    }
    fn(j, lineno);
  }
}

}  // namespace

void for_each_jsonl(const std::string& path,
                    const std::function<void(const json&, std::size_t)>& fn) {
  if (path == "-") {
    scan_lines(std::cin, "<stdin>", fn);
    return;
  }
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  scan_lines(in, path, fn);
}

std::vector<json> read_jsonl(const std::string& path) {
  std::vector<json> out;
  for_each_jsonl(path, [&](const json& j, std::size_t) { out.push_back(j); });
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::string& path) {
  json j = json::parse(read_text_file(path), nullptr, false);
  if (j.is_discarded()) throw ConfigError(path + ": invalid JSON");
  return j;
}

std::string dump_line(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

AtomicWriter::AtomicWriter(std::string path) : path_(std::move(path)) {
  if (path_ == "-") return;
  std::filesystem::path target(path_);
  tmp_ = target;
  tmp_ += ".tmp." + std::to_string(::getpid());
  file_ = std::make_unique<std::ofstream>(tmp_, std::ios::binary | std::ios::trunc);
  if (!*file_) throw ConfigError("cannot write " + tmp_.string());
}

AtomicWriter::~AtomicWriter() {
  if (file_ && !committed_) {
    file_->close();
    std::error_code ec;
    std::filesystem::remove(tmp_, ec);
  }
}

std::ostream& AtomicWriter::stream() {
  return file_ ? static_cast<std::ostream&>(*file_) : std::cout;
}

void AtomicWriter::write_line(const json& j) {
  stream() << dump_line(j) << '\n';
}

void AtomicWriter::write(std::string_view text) { stream() << text; }

void AtomicWriter::commit() {
  if (committed_) return;
  if (!file_) {
    std::cout.flush();
    committed_ = true;
    return;
  }
  file_->close();
  if (!*file_) throw Error("write failed: " + tmp_.string());
  std::filesystem::rename(tmp_, path_);
  committed_ = true;
}

void write_file_atomic(const std::string& path, std::string_view text) {
  AtomicWriter w(path);
  w.write(text);
  w.commit();
}

}  // namespace hatelab
