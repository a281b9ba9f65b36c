#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace hatelab {

// Zero-shot annotation prompt. `{comment}` marks where the text goes.
inline constexpr std::string_view kAnnotationPrompt =
    "You are tasked with annotating speech. Your response must be a single valid number:\n"
    "1 for Hate/Offensive/Sexism/Toxic/Political/COVID-related Hate Speech,\n"
    "2 for Neutral Speech.\n"
    "\n"
    "Provide only the number corresponding to the category. Do not include any explanation or "
    "additional text.\n"
    "Do you think the following comment is Hate/Offensive/Sexism/Toxic/Political/COVID-related "
    "Hate Speech, speech or Neutral speech?\n"
    "\n"
    "\"{comment}\"\n"
    "\n"
    "Your Answer:";

inline constexpr std::string_view kCommentPlaceholder = "{comment}";

struct PromptTemplate {
  std::string text{kAnnotationPrompt};
  std::string hate_token{"1"};
  std::string neutral_token{"2"};
  // Tokenizer-specific spellings (e.g. " 1") whose weight is added to the
  // canonical label token.
  std::vector<std::string> hate_aliases;
  std::vector<std::string> neutral_aliases;

  // Throws ConfigError: exactly one placeholder, distinct label tokens,
  // aliases not shared between the classes.
  void validate() const;

  // The part of `text` before / after the placeholder.
  std::string_view prefix() const;
  std::string_view suffix() const;

  // Reads {"template_file"?, "hate_token"?, "neutral_token"?, "hate_aliases"?,
  // "neutral_aliases"?}.
  static PromptTemplate from_json(const nlohmann::json& j);
};

// Substitutes the comment verbatim (no escaping). Throws DataError on an empty
// comment.
std::string render_prompt(const PromptTemplate& tmpl, std::string_view comment);

// Inverse of render_prompt for prompts built from `tmpl`; returns false when
// `prompt` does not have the template's shape.
bool extract_comment(const PromptTemplate& tmpl, std::string_view prompt, std::string& comment);

using TokenWeights = std::map<std::string, double>;

struct LabelProbability {
  double p_hate{0.0};
  double p_neutral{0.0};
};

// Renormalises the label-token weights: p_hate = w(hate) / (w(hate) + w(neutral)),
// missing tokens counting as zero. Throws ExtractionError when both label
// weights are zero or absent, mentioning `context` (text id / model), and
// DataError on negative or non-finite weights.
LabelProbability extract_label_probabilities(const TokenWeights& weights, const PromptTemplate& tmpl,
                                             std::string_view context = {});

}  // namespace hatelab
