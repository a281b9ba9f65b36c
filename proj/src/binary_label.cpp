#include "hatelab/binary_label.hpp"

#include "hatelab/dataset_ingest.hpp"
#include "hatelab/error.hpp"

namespace hatelab {

BinaryLabel parse_binary_label(std::string_view s) {
  const std::string l = normalize_raw_label(s);
  if (l == "hate") return BinaryLabel::Hate;
  if (l == "neutral") return BinaryLabel::Neutral;
  throw DataError("not a binary label: '" + std::string(s) + "'");
}

}  // namespace hatelab
