#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

namespace hatelab {

using json = nlohmann::json;

// Calls `fn(object, line_number)` for every non-blank line of a JSON-lines
// source. `path` may be "-" for stdin. Throws DataError on a line that is not
// a JSON object, naming the file and line.
void for_each_jsonl(const std::string& path,
                    const std::function<void(const json&, std::size_t)>& fn);

std::vector<json> read_jsonl(const std::string& path);

json read_json_file(const std::string& path);

std::string read_text_file(const std::string& path);

// Serialises a JSON value on one line. Keys come out sorted, doubles in
// shortest round-trip form, so equal values always give equal bytes.
std::string dump_line(const json& j);

// Output file that only becomes visible on commit(): data goes to a sibling
// temporary which is renamed over the target. "-" writes straight to stdout.
class AtomicWriter {
 public:
  explicit AtomicWriter(std::string path);
  ~AtomicWriter();

  AtomicWriter(const AtomicWriter&) = delete;
  AtomicWriter& operator=(const AtomicWriter&) = delete;

  std::ostream& stream();
  void write_line(const json& j);
  void write(std::string_view text);
  void commit();

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::filesystem::path tmp_;
  std::unique_ptr<std::ofstream> file_;
  bool committed_{false};
};

// Convenience: write a whole document atomically.
void write_file_atomic(const std::string& path, std::string_view text);

}  // namespace hatelab
