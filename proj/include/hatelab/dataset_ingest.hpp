#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hatelab/binary_label.hpp"

namespace hatelab {

// One human-labelled corpus and how its native labels collapse onto
// Hate/Neutral. Vocabulary and positive labels are stored normalised
// (trimmed, lowercased).
struct DatasetSpec {
  std::string name;
  std::string language;  // eng | deu | spa | vie
  bool seven_set{false};
  std::string id_column;
  std::string text_column;
  std::string label_column;
  std::set<std::string> vocabulary;
  std::set<std::string> positive;
};

// Trim and lowercase a raw label before lookup.
std::string normalize_raw_label(std::string_view raw);

// Throws LabelMappingError naming dataset and label when `raw` is outside the
// declared vocabulary.
BinaryLabel map_label(const DatasetSpec& spec, std::string_view raw);

class DatasetRegistry {
 public:
  // Validates every entry: known language, positive set inside the
  // vocabulary, both classes reachable. Throws ConfigError.
  static DatasetRegistry from_json(const nlohmann::json& j);
  static DatasetRegistry from_file(const std::string& path);
  // The registry shipped with the toolkit (data/datasets.json).
  static const DatasetRegistry& builtin();

  const DatasetSpec& get(std::string_view name) const;
  bool contains(std::string_view name) const;
  // Names in declaration order.
  const std::vector<std::string>& names() const { return order_; }
  std::set<std::string> name_set() const { return {order_.begin(), order_.end()}; }

 private:
  std::map<std::string, DatasetSpec, std::less<>> specs_;
  std::vector<std::string> order_;
};

struct LabeledExample {
  std::string id;
  std::string dataset;
  std::string text;
  BinaryLabel gold{BinaryLabel::Neutral};

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

nlohmann::json to_json(const LabeledExample& e);
// Parses {"id","dataset","text","gold"}; text may be absent.
LabeledExample labeled_example_from_json(const nlohmann::json& j);

struct DatasetStats {
  std::uint64_t count{0};
  double hate_fraction{0.0};
  // Set when the input was empty and hate_fraction fell back to 0.
  bool empty_warning{false};
};

DatasetStats dataset_stats(std::span<const LabeledExample> examples);

enum class TrainingConfigName { SevenSet, Eng, Deu, Spa, SixteenMix };

std::string_view to_string(TrainingConfigName name);
// Accepts "7-Set"/"SevenSet", "Eng", "Deu", "Spa", "16-Mix"/"SixteenMix".
TrainingConfigName parse_training_config_name(std::string_view s);

struct TrainingConfig {
  TrainingConfigName name;
  std::set<std::string> members;
};

TrainingConfig build_training_config(TrainingConfigName name,
                                     const DatasetRegistry& registry = DatasetRegistry::builtin());

enum class InputFormat { Csv, Tsv, Jsonl };

struct IngestOptions {
  std::optional<InputFormat> format;  // guessed from the extension when unset
  std::optional<std::string> id_column;
  std::optional<std::string> text_column;
  std::optional<std::string> label_column;
};

// RFC 4180 reader: quoted fields, doubled quotes, embedded newlines.
// First row is the header.
std::vector<std::map<std::string, std::string>> read_delimited(std::string_view content,
                                                               char delimiter);

// Loads one dataset file and maps every row. Rows without an id column value
// get "<dataset>-<row>" (1-based). Unknown labels are fatal.
std::vector<LabeledExample> ingest_dataset(const DatasetSpec& spec, const std::string& path,
                                           const IngestOptions& options = {});

}  // namespace hatelab
