#include "hatelab/corpus_filter.hpp"

#include <algorithm>
#include <cctype>

#include "hatelab/error.hpp"

namespace hatelab {

using nlohmann::json;

namespace {

const std::string& require_string(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw DataError(std::string("record field '") + key + "' missing or not a string");
  }
  return it->get_ref<const std::string&>();
}

bool is_scheme_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string percent_decode(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '%' && i + 2 < s.size()) {
      int hi = hex_value(s[i + 1]);
      int lo = hex_value(s[i + 2]);
      if (hi >= 0 && lo >= 0) {
        out.push_back(static_cast<char>(hi * 16 + lo));
        i += 2;
        continue;
      }
    }
    out.push_back(s[i]);
  }
  return out;
}

std::string ascii_lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool has_upper(std::string_view s) {
  return std::any_of(s.begin(), s.end(),
                     [](char c) { return std::isupper(static_cast<unsigned char>(c)); });
}

std::string_view schema_type_name(std::string_view t) {
  for (std::string_view prefix : {"http://schema.org/", "https://schema.org/"}) {
    if (t.starts_with(prefix)) return t.substr(prefix.size());
  }
  if (t.find('/') != std::string_view::npos || t.find(':') != std::string_view::npos) {
    return {};
  }
  return t;
}

}  // namespace

WebRecord web_record_from_json(const json& j) {
  WebRecord r;
  r.id = require_string(j, "id");
  r.url = require_string(j, "url");
  r.language = require_string(j, "lang");
  r.text = require_string(j, "text");
  if (r.id.empty()) throw DataError("record id is empty");
  if (r.text.empty()) throw DataError("record " + r.id + " has empty text");
  auto it = j.find("schema_types");
  if (it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw DataError("record " + r.id + ": schema_types is not a list");
    for (const auto& t : *it) {
      if (!t.is_string()) throw DataError("record " + r.id + ": schema type is not a string");
      r.schema_types.push_back(t.get<std::string>());
    }
  }
  return r;
}

json to_json(const WebRecord& r) {
  return json{{"id", r.id},
              {"url", r.url},
              {"lang", r.language},
              {"schema_types", r.schema_types},
              {"text", r.text}};
}

void FilterConfig::validate() const {
  if (url_keywords.empty()) throw ConfigError("filter: url_keywords is empty");
  if (schema_whitelist.empty()) throw ConfigError("filter: schema_whitelist is empty");
  for (const auto& k : url_keywords) {
    if (k.empty()) throw ConfigError("filter: empty keyword");
    if (has_upper(k)) throw ConfigError("filter: keyword '" + k + "' is not lowercase");
  }
}

std::vector<std::string> FilterConfig::effective_keywords() const {
  std::vector<std::string> out;
  auto add = [&](std::string k) {
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(std::move(k));
  };
  for (const auto& k : url_keywords) {
    add(k);
    if (keyword_separator_variants && k.find(' ') != std::string::npos) {
      for (char sep : {'-', '_'}) {
        std::string v = k;
        std::replace(v.begin(), v.end(), ' ', sep);
        add(std::move(v));
      }
    }
  }
  return out;
}

FilterConfig FilterConfig::from_json(const json& j) {
  FilterConfig c;
  if (!j.is_object()) throw ConfigError("filter config must be a JSON object");
  try {
    if (j.contains("url_keywords")) c.url_keywords = j.at("url_keywords").get<std::vector<std::string>>();
    if (j.contains("schema_whitelist")) {
      c.schema_whitelist = j.at("schema_whitelist").get<std::set<std::string>>();
    }
    if (j.contains("keyword_separator_variants")) {
      c.keyword_separator_variants = j.at("keyword_separator_variants").get<bool>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("filter config: ") + e.what());
  }
  c.validate();
  return c;
}

FilterStats& FilterStats::merge(const FilterStats& o) {
  records_seen += o.records_seen;
  kept += o.kept;
  dropped_url += o.dropped_url;
  dropped_schema += o.dropped_schema;
  url_parse_errors += o.url_parse_errors;
  for (const auto& [lang, n] : o.kept_by_language) kept_by_language[lang] += n;
  return *this;
}

bool FilterStats::consistent() const {
  std::uint64_t by_lang = 0;
  for (const auto& [_, n] : kept_by_language) by_lang += n;
  return kept + dropped_url + dropped_schema == records_seen && by_lang == kept &&
         url_parse_errors <= dropped_url;
}

json FilterStats::to_json() const {
  return json{{"records_seen", records_seen},
              {"kept", kept},
              {"dropped_url", dropped_url},
              {"dropped_schema", dropped_schema},
              {"url_parse_errors", url_parse_errors},
              {"kept_by_language", kept_by_language}};
}

std::string normalize_url_path(std::string_view url) {
  auto fail = [&](const char* why) -> UrlParseError {
    return UrlParseError("malformed URL '" + std::string(url) + "': " + why);
  };
  auto colon = url.find(':');
  if (colon == std::string_view::npos || colon == 0) throw fail("no scheme");
  if (!std::isalpha(static_cast<unsigned char>(url[0]))) throw fail("bad scheme");
  for (std::size_t i = 1; i < colon; ++i) {
    if (!is_scheme_char(url[i])) throw fail("bad scheme");
  }
  for (char c : url) {
    if (static_cast<unsigned char>(c) <= 0x20 || c == 0x7f) throw fail("contains whitespace or control character");
  }
  std::string_view rest = url.substr(colon + 1);
  if (!rest.starts_with("//")) throw fail("missing authority");
  rest.remove_prefix(2);
  auto auth_end = rest.find_first_of("/?#");
  std::string_view authority = rest.substr(0, auth_end);
  auto at = authority.rfind('@');
  std::string_view host = at == std::string_view::npos ? authority : authority.substr(at + 1);
  if (host.empty() || host.front() == ':') throw fail("empty host");
  if (auth_end == std::string_view::npos) return "/";
  rest.remove_prefix(auth_end);
  std::string_view path = rest.substr(0, rest.find_first_of("?#"));
  if (path.empty()) return "/";
  return ascii_lower(percent_decode(path));
}

CorpusFilter::CorpusFilter(FilterConfig config)
    : config_(std::move(config)), keywords_(config_.effective_keywords()) {
  config_.validate();
}

bool CorpusFilter::path_matches(std::string_view path) const {
  return std::any_of(keywords_.begin(), keywords_.end(),
                     [&](const std::string& k) { return path.find(k) != std::string_view::npos; });
}

bool url_keyword_match(std::string_view url, const FilterConfig& config) {
  const std::string path = normalize_url_path(url);
  for (const auto& k : config.effective_keywords()) {
    if (path.find(k) != std::string::npos) return true;
  }
  return false;
}

bool schema_type_match(std::span<const std::string> types, const FilterConfig& config) {
  for (const auto& t : types) {
    std::string_view name = schema_type_name(t);
    if (!name.empty() && config.schema_whitelist.count(std::string(name))) return true;
  }
  return false;
}

FilterVerdict CorpusFilter::classify(const WebRecord& record) const {
  if (!path_matches(normalize_url_path(record.url))) return FilterVerdict::DropUrl;
  if (!schema_type_match(record.schema_types, config_)) return FilterVerdict::DropSchema;
  return FilterVerdict::Keep;
}

bool CorpusFilter::offer(const WebRecord& record) {
  ++stats_.records_seen;
  FilterVerdict v;
  try {
    v = classify(record);
  } catch (const UrlParseError&) {
    ++stats_.url_parse_errors;
    v = FilterVerdict::DropUrl;
  }
  switch (v) {
    case FilterVerdict::Keep:
      ++stats_.kept;
      ++stats_.kept_by_language[record.language];
      return true;
    case FilterVerdict::DropUrl:
      ++stats_.dropped_url;
      return false;
    case FilterVerdict::DropSchema:
      ++stats_.dropped_schema;
      return false;
  }
  return false;
}

std::pair<std::vector<WebRecord>, FilterStats> filter_records(std::span<const WebRecord> input,
                                                              const FilterConfig& config) {
  CorpusFilter filter(config);
  std::vector<WebRecord> out;
  for (const auto& r : input) {
    if (filter.offer(r)) out.push_back(r);
  }
  return {std::move(out), filter.stats()};
}

LanguageSampler::LanguageSampler(std::map<std::string, std::uint64_t> quotas, std::uint64_t seed)
    : quotas_(std::move(quotas)), seed_(seed) {}

void LanguageSampler::offer(WebRecord record) {
  const std::uint64_t pos = position_++;
  auto q = quotas_.find(record.language);
  if (q == quotas_.end()) {
    passthrough_.push_back({pos, std::move(record)});
    return;
  }
  auto [it, inserted] = reservoirs_.try_emplace(record.language);
  Reservoir& res = it->second;
  if (inserted) {
    res.quota = q->second;
    res.rng.seed(derive_seed(seed_, record.language));
  }
  const std::uint64_t i = res.seen++;
  if (res.quota == 0) return;
  if (i < res.quota) {
    res.slots.push_back({pos, std::move(record)});
    return;
  }
  const std::uint64_t j = uniform_index(res.rng, i + 1);
  if (j < res.quota) res.slots[j] = {pos, std::move(record)};
}

std::vector<WebRecord> LanguageSampler::take() {
  std::vector<Slot> all = std::move(passthrough_);
  for (auto& [_, res] : reservoirs_) {
    for (auto& s : res.slots) all.push_back(std::move(s));
  }
  std::sort(all.begin(), all.end(),
            [](const Slot& a, const Slot& b) { return a.position < b.position; });
  std::vector<WebRecord> out;
  out.reserve(all.size());
  for (auto& s : all) out.push_back(std::move(s.record));
  passthrough_.clear();
  reservoirs_.clear();
  position_ = 0;
  return out;
}

std::vector<WebRecord> subsample_by_language(std::span<const WebRecord> input,
                                             const std::map<std::string, std::uint64_t>& quotas,
                                             std::uint64_t seed) {
  LanguageSampler sampler(quotas, seed);
  for (const auto& r : input) sampler.offer(r);
  return sampler.take();
}

}  // namespace hatelab
