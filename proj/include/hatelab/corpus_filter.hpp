#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "hatelab/rng.hpp"

namespace hatelab {

// One exported web-index item.
struct WebRecord {
  std::string id;
  std::string url;
  std::string language;  // eng | deu | spa | vie | other
  std::vector<std::string> schema_types;
  std::string text;

  friend bool operator==(const WebRecord&, const WebRecord&) = default;
};

// JSON object {"id","url","lang","schema_types","text"}. Throws DataError when
// a field is missing, mistyped, or id/text is empty.
WebRecord web_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const WebRecord& r);

struct FilterConfig {
  std::vector<std::string> url_keywords{"thread", "forum", "reply",
                                        "post",   "status update", "quote"};
  std::set<std::string> schema_whitelist{
      "DiscussionForumPosting", "SocialMediaPosting", "BlogPosting", "Article",
      "Comment",                "UserComments",       "QAPage",      "Question",
      "Review",                 "Blog"};
  // Multi-word keywords also match with '-' and '_' in place of spaces.
  bool keyword_separator_variants{true};

  // Throws ConfigError when an invariant is broken.
  void validate() const;

  // Keywords actually searched for, variants included, deduplicated in order.
  std::vector<std::string> effective_keywords() const;

  // Reads {"url_keywords":[...], "schema_whitelist":[...],
  // "keyword_separator_variants":bool}; absent keys keep defaults.
  static FilterConfig from_json(const nlohmann::json& j);
};

struct FilterStats {
  std::uint64_t records_seen{0};
  std::uint64_t kept{0};
  std::uint64_t dropped_url{0};
  std::uint64_t dropped_schema{0};
  // Subset of dropped_url: records whose URL did not parse.
  std::uint64_t url_parse_errors{0};
  std::map<std::string, std::uint64_t> kept_by_language;

  FilterStats& merge(const FilterStats& other);
  bool consistent() const;
  nlohmann::json to_json() const;
};

// Lowercased, percent-decoded path of an absolute URL, without query or
// fragment. An empty path normalises to "/". Throws UrlParseError.
std::string normalize_url_path(std::string_view url);

bool url_keyword_match(std::string_view url, const FilterConfig& config);

// Accepts "http://schema.org/T", "https://schema.org/T" and bare "T".
// Type names compare case-sensitively.
bool schema_type_match(std::span<const std::string> types, const FilterConfig& config);

enum class FilterVerdict { Keep, DropUrl, DropSchema };

// Streaming filter. The URL rule is checked before the schema rule so each
// dropped record has exactly one reason.
class CorpusFilter {
 public:
  explicit CorpusFilter(FilterConfig config);

  FilterVerdict classify(const WebRecord& record) const;

  // Classifies and records the outcome in stats(). Returns true if kept.
  bool offer(const WebRecord& record);

  const FilterStats& stats() const { return stats_; }
  const FilterConfig& config() const { return config_; }

 private:
  bool path_matches(std::string_view path) const;

  FilterConfig config_;
  std::vector<std::string> keywords_;
  FilterStats stats_;
};

std::pair<std::vector<WebRecord>, FilterStats> filter_records(
    std::span<const WebRecord> input, const FilterConfig& config);

// Seeded reservoir sampling per language. Languages without a quota pass
// through untouched. Each language draws from its own generator seeded by
// derive_seed(seed, language), so a language's sample depends only on its own
// subsequence of the input. Output preserves input order.
class LanguageSampler {
 public:
  LanguageSampler(std::map<std::string, std::uint64_t> quotas, std::uint64_t seed);

  void offer(WebRecord record);
  std::vector<WebRecord> take();

 private:
  struct Slot {
    std::uint64_t position;
    WebRecord record;
  };
  struct Reservoir {
    std::uint64_t quota{0};
    std::uint64_t seen{0};
    Rng rng;
    std::vector<Slot> slots;
  };

  std::map<std::string, std::uint64_t> quotas_;
  std::uint64_t seed_;
  std::uint64_t position_{0};
  std::map<std::string, Reservoir> reservoirs_;
  std::vector<Slot> passthrough_;
};

std::vector<WebRecord> subsample_by_language(
    std::span<const WebRecord> input,
    const std::map<std::string, std::uint64_t>& quotas, std::uint64_t seed);

}  // namespace hatelab
