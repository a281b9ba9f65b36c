#include "hatelab/dataset_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "hatelab/error.hpp"
#include "hatelab/jsonl.hpp"

namespace hatelab {

// Generated from data/datasets.json at configure time.
extern const char* const kBuiltinRegistryJson;

namespace {

const std::set<std::string> kLanguages{"eng", "deu", "spa", "vie"};

std::string json_scalar_to_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_null()) return "";
  return v.dump();
}

}  // namespace

std::string normalize_raw_label(std::string_view raw) {
  auto b = raw.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = raw.find_last_not_of(" \t\r\n");
  std::string out(raw.substr(b, e - b + 1));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

BinaryLabel map_label(const DatasetSpec& spec, std::string_view raw) {
  const std::string key = normalize_raw_label(raw);
  if (!spec.vocabulary.count(key)) {
    throw LabelMappingError("dataset " + spec.name + ": unknown label '" + std::string(raw) + "'");
  }
  return spec.positive.count(key) ? BinaryLabel::Hate : BinaryLabel::Neutral;
}

DatasetRegistry DatasetRegistry::from_json(const json& j) {
  DatasetRegistry reg;
  if (!j.is_object() || !j.contains("datasets") || !j.at("datasets").is_array()) {
    throw ConfigError("registry: expected {\"datasets\": [...]}");
  }
  try {
    for (const auto& d : j.at("datasets")) {
      DatasetSpec s;
      s.name = d.at("name").get<std::string>();
      s.language = d.at("language").get<std::string>();
      s.seven_set = d.value("seven_set", false);
      s.id_column = d.value("id_column", std::string("id"));
      s.text_column = d.value("text_column", std::string("text"));
      s.label_column = d.value("label_column", std::string("label"));
      for (const auto& v : d.at("vocabulary")) s.vocabulary.insert(normalize_raw_label(v.get<std::string>()));
      for (const auto& v : d.at("positive")) s.positive.insert(normalize_raw_label(v.get<std::string>()));

      if (s.name.empty()) throw ConfigError("registry: dataset with empty name");
      if (!kLanguages.count(s.language)) {
        throw ConfigError("registry: " + s.name + ": unsupported language " + s.language);
      }
      for (const auto& p : s.positive) {
        if (!s.vocabulary.count(p)) {
          throw ConfigError("registry: " + s.name + ": positive label '" + p + "' not in vocabulary");
        }
      }
      if (s.positive.empty() || s.positive.size() == s.vocabulary.size()) {
        throw ConfigError("registry: " + s.name + ": mapping must reach both Hate and Neutral");
      }
      if (reg.specs_.count(s.name)) throw ConfigError("registry: duplicate dataset " + s.name);
      reg.order_.push_back(s.name);
      reg.specs_.emplace(s.name, std::move(s));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("registry: ") + e.what());
  }
  return reg;
}

DatasetRegistry DatasetRegistry::from_file(const std::string& path) {
  return from_json(read_json_file(path));
}

const DatasetRegistry& DatasetRegistry::builtin() {
  static const DatasetRegistry reg = from_json(json::parse(kBuiltinRegistryJson));
  return reg;
}

const DatasetSpec& DatasetRegistry::get(std::string_view name) const {
  auto it = specs_.find(name);
  if (it == specs_.end()) throw DataError("unknown dataset: " + std::string(name));
  return it->second;
}

bool DatasetRegistry::contains(std::string_view name) const { return specs_.find(name) != specs_.end(); }

json to_json(const LabeledExample& e) {
  return json{{"id", e.id}, {"dataset", e.dataset}, {"text", e.text}, {"gold", to_string(e.gold)}};
}

LabeledExample labeled_example_from_json(const json& j) {
  LabeledExample e;
  try {
    e.id = j.at("id").get<std::string>();
    e.dataset = j.at("dataset").get<std::string>();
    e.text = j.value("text", std::string());
    e.gold = parse_binary_label(j.at("gold").get<std::string>());
  } catch (const json::exception& ex) {
    throw DataError(std::string("labeled example: ") + ex.what());
  }
  if (e.id.empty()) throw DataError("labeled example with empty id");
  return e;
}

DatasetStats dataset_stats(std::span<const LabeledExample> examples) {
  DatasetStats s;
  s.count = examples.size();
  if (examples.empty()) {
    s.empty_warning = true;
    return s;
  }
  auto hate = std::count_if(examples.begin(), examples.end(),
                            [](const LabeledExample& e) { return e.gold == BinaryLabel::Hate; });
  s.hate_fraction = static_cast<double>(hate) / static_cast<double>(s.count);
  return s;
}

std::string_view to_string(TrainingConfigName name) {
  switch (name) {
    case TrainingConfigName::SevenSet: return "7-Set";
    case TrainingConfigName::Eng: return "Eng";
    case TrainingConfigName::Deu: return "Deu";
    case TrainingConfigName::Spa: return "Spa";
    case TrainingConfigName::SixteenMix: return "16-Mix";
  }
  return "?";
}

TrainingConfigName parse_training_config_name(std::string_view s) {
  if (s == "7-Set" || s == "SevenSet") return TrainingConfigName::SevenSet;
  if (s == "Eng") return TrainingConfigName::Eng;
  if (s == "Deu") return TrainingConfigName::Deu;
  if (s == "Spa") return TrainingConfigName::Spa;
  if (s == "16-Mix" || s == "SixteenMix") return TrainingConfigName::SixteenMix;
  throw ConfigError("unknown training configuration: " + std::string(s));
}

TrainingConfig build_training_config(TrainingConfigName name, const DatasetRegistry& registry) {
  TrainingConfig cfg{name, {}};
  for (const auto& n : registry.names()) {
    const auto& spec = registry.get(n);
    bool in = false;
    switch (name) {
      case TrainingConfigName::SevenSet: in = spec.seven_set; break;
      case TrainingConfigName::Eng: in = spec.language == "eng"; break;
      case TrainingConfigName::Deu: in = spec.language == "deu"; break;
      case TrainingConfigName::Spa: in = spec.language == "spa"; break;
      case TrainingConfigName::SixteenMix: in = true; break;
    }
    if (in) cfg.members.insert(n);
    if (name == TrainingConfigName::SevenSet && in && spec.language == "spa") {
      throw ConfigError("registry marks Spanish dataset " + n + " as part of 7-Set");
    }
  }
  return cfg;
}

std::vector<std::map<std::string, std::string>> read_delimited(std::string_view content,
                                                               char delim) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < content.size(); ++i) {
    char c = content[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == delim) {
      end_field();
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      end_row();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) throw DataError("unterminated quoted field");
  if (field_started || !row.empty()) end_row();

  std::vector<std::map<std::string, std::string>> out;
  if (rows.empty()) return out;
  const auto& header = rows.front();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != header.size()) {
      throw DataError("row " + std::to_string(r + 1) + " has " + std::to_string(rows[r].size()) +
                      " fields, header has " + std::to_string(header.size()));
    }
    std::map<std::string, std::string> m;
    for (std::size_t c = 0; c < header.size(); ++c) m[header[c]] = rows[r][c];
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<LabeledExample> ingest_dataset(const DatasetSpec& spec, const std::string& path,
                                           const IngestOptions& options) {
  InputFormat fmt = InputFormat::Csv;
  if (options.format) {
    fmt = *options.format;
  } else if (path.ends_with(".jsonl") || path.ends_with(".json") || path == "-") {
    fmt = InputFormat::Jsonl;
  } else if (path.ends_with(".tsv")) {
    fmt = InputFormat::Tsv;
  }
  const std::string id_col = options.id_column.value_or(spec.id_column);
  const std::string text_col = options.text_column.value_or(spec.text_column);
  const std::string label_col = options.label_column.value_or(spec.label_column);

  std::vector<LabeledExample> out;
  auto add = [&](std::size_t rowno, std::string id, std::string text, const std::string& raw) {
    LabeledExample e;
    e.id = id.empty() ? spec.name + "-" + std::to_string(rowno) : std::move(id);
    e.dataset = spec.name;
    e.text = std::move(text);
    e.gold = map_label(spec, raw);
    out.push_back(std::move(e));
  };

  if (fmt == InputFormat::Jsonl) {
    std::size_t rowno = 0;
    for_each_jsonl(path, [&](const json& j, std::size_t line) {
      ++rowno;
      auto t = j.find(text_col);
      auto l = j.find(label_col);
      if (t == j.end() || l == j.end()) {
        throw DataError(path + ":" + std::to_string(line) + ": missing column '" +
                        (t == j.end() ? text_col : label_col) + "'");
      }
      auto i = j.find(id_col);
      add(rowno, i == j.end() ? std::string() : json_scalar_to_string(*i), json_scalar_to_string(*t),
          json_scalar_to_string(*l));
    });
    return out;
  }

  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto rows = read_delimited(ss.str(), fmt == InputFormat::Tsv ? '\t' : ',');
  std::size_t rowno = 0;
  for (const auto& row : rows) {
    ++rowno;
    auto t = row.find(text_col);
    auto l = row.find(label_col);
    if (t == row.end() || l == row.end()) {
      throw DataError(path + ": missing column '" + (t == row.end() ? text_col : label_col) + "'");
    }
    auto i = row.find(id_col);
    add(rowno, i == row.end() ? std::string() : i->second, t->second, l->second);
  }
  return out;
}

}  // namespace hatelab
