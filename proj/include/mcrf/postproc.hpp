#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "mcrf/crf.hpp"
#include "mcrf/schemes.hpp"

namespace mcrf {

enum class Legality { kLegal, kIllegal };

// Typed token span [start, end).
struct Segment {
  int type = 0;  // entity-type ordinal in the tagset
  std::size_t start = 0;
  std::size_t end = 0;
  Legality legality = Legality::kLegal;

  bool legal() const { return legality == Legality::kLegal; }
  bool same_span(const Segment& o) const { return type == o.type && start == o.start && end == o.end; }
  friend bool operator==(const Segment&, const Segment&) = default;
};

enum class Strategy { kNone, kRetain, kDiscard };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

// Chunks of a tag sequence under the CoNLL-2000 convention: an I-X that does
// not continue an X chunk opens a new chunk. A chunk is illegal when the tag
// opening it is reached through a forbidden transition or is a forbidden
// first tag. Under BIOES a chunk left open by a forbidden transition (B-X or
// I-X not followed by I-X/E-X) is illegal as well and ends at that point.
std::vector<Segment> extract_segments(std::span<const int> tags, const Tagset& tagset);

// retain: rewrite each illegal chunk into well-formed tags (B-X I-X... under
// BIO; B-X I-X... E-X or S-X under BIOES), keeping its span.
// discard: overwrite each illegal chunk with O.
// none: identity.
Path repair_tags(std::span<const int> tags, const Tagset& tagset, Strategy strategy);

}  // namespace mcrf
