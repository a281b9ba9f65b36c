#include "hatelab/prompt.hpp"

#include <algorithm>
#include <cmath>

#include "hatelab/error.hpp"
#include "hatelab/jsonl.hpp"

namespace hatelab {

namespace {

std::size_t count_occurrences(std::string_view s, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string_view::npos; pos = s.find(needle, pos + needle.size())) ++n;
  return n;
}

double label_weight(const TokenWeights& w, const std::string& token, const std::vector<std::string>& aliases) {
  double total = 0.0;
  auto add = [&](const std::string& t) {
    auto it = w.find(t);
    if (it != w.end()) total += it->second;
  };
  add(token);
  for (const auto& a : aliases) {
    if (a != token) add(a);
  }
  return total;
}

}  // namespace

void PromptTemplate::validate() const {
  if (count_occurrences(text, kCommentPlaceholder) != 1) {
    throw ConfigError("prompt template must contain exactly one {comment} placeholder");
  }
  if (hate_token.empty() || neutral_token.empty() || hate_token == neutral_token) {
    throw ConfigError("prompt label tokens must be nonempty and distinct");
  }
  auto in = [](const std::vector<std::string>& v, const std::string& t) {
    return std::find(v.begin(), v.end(), t) != v.end();
  };
  for (const auto& a : hate_aliases) {
    if (a == neutral_token || in(neutral_aliases, a)) throw ConfigError("alias '" + a + "' used for both labels");
  }
  for (const auto& a : neutral_aliases) {
    if (a == hate_token) throw ConfigError("alias '" + a + "' used for both labels");
  }
}

std::string_view PromptTemplate::prefix() const {
  std::string_view t = text;
  return t.substr(0, t.find(kCommentPlaceholder));
}

std::string_view PromptTemplate::suffix() const {
  std::string_view t = text;
  return t.substr(t.find(kCommentPlaceholder) + kCommentPlaceholder.size());
}

PromptTemplate PromptTemplate::from_json(const nlohmann::json& j) {
  PromptTemplate t;
  try {
    if (j.contains("template_file")) t.text = read_text_file(j.at("template_file").get<std::string>());
    if (j.contains("hate_token")) t.hate_token = j.at("hate_token").get<std::string>();
    if (j.contains("neutral_token")) t.neutral_token = j.at("neutral_token").get<std::string>();
    if (j.contains("hate_aliases")) t.hate_aliases = j.at("hate_aliases").get<std::vector<std::string>>();
    if (j.contains("neutral_aliases")) t.neutral_aliases = j.at("neutral_aliases").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("prompt config: ") + e.what());
  }
  t.validate();
  return t;
}

std::string render_prompt(const PromptTemplate& tmpl, std::string_view comment) {
  if (comment.empty()) throw DataError("cannot render prompt for an empty comment");
  std::string out;
  out.reserve(tmpl.text.size() + comment.size());
  out.append(tmpl.prefix());
  out.append(comment);
  out.append(tmpl.suffix());
  return out;
}

bool extract_comment(const PromptTemplate& tmpl, std::string_view prompt, std::string& comment) {
  auto pre = tmpl.prefix();
  auto suf = tmpl.suffix();
  if (prompt.size() < pre.size() + suf.size() || !prompt.starts_with(pre) || !prompt.ends_with(suf)) return false;
  comment.assign(prompt.substr(pre.size(), prompt.size() - pre.size() - suf.size()));
  return true;
}

LabelProbability extract_label_probabilities(const TokenWeights& weights, const PromptTemplate& tmpl,
                                             std::string_view context) {
  for (const auto& [tok, w] : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw DataError("token weight for '" + tok + "' is negative or not finite" +
                      (context.empty() ? "" : " (" + std::string(context) + ")"));
    }
  }
  const double wh = label_weight(weights, tmpl.hate_token, tmpl.hate_aliases);
  const double wn = label_weight(weights, tmpl.neutral_token, tmpl.neutral_aliases);
  if (!(wh + wn > 0.0)) {
    throw ExtractionError("neither label token present in the response" +
                          (context.empty() ? "" : " (" + std::string(context) + ")"));
  }
  LabelProbability p;
  p.p_hate = wh / (wh + wn);
  p.p_neutral = 1.0 - p.p_hate;
  return p;
}

}  // namespace hatelab
