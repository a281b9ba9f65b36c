#pragma once

#include <string>
#include <string_view>

namespace hatelab {

enum class BinaryLabel { Neutral = 0, Hate = 1 };

inline constexpr std::string_view to_string(BinaryLabel l) {
  return l == BinaryLabel::Hate ? "Hate" : "Neutral";
}

// Accepts "Hate"/"Neutral" (any case). Throws DataError otherwise.
BinaryLabel parse_binary_label(std::string_view s);

inline BinaryLabel flip(BinaryLabel l) {
  return l == BinaryLabel::Hate ? BinaryLabel::Neutral : BinaryLabel::Hate;
}

}  // namespace hatelab
