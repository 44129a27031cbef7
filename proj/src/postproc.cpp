#include "mcrf/postproc.hpp"

#include <optional>
#include <string>

#include "mcrf/error.hpp"

namespace mcrf {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kNone: return "none";
    case Strategy::kRetain: return "retain";
    case Strategy::kDiscard: return "discard";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "none") return Strategy::kNone;
  if (name == "retain") return Strategy::kRetain;
  if (name == "discard") return Strategy::kDiscard;
  throw ConfigError("unknown strategy '" + std::string(name) + "' (expected retain, discard or none)");
}

std::vector<Segment> extract_segments(std::span<const int> tags, const Tagset& tagset) {
  const bool bioes = tagset.scheme() == Scheme::kBioes;
  const auto d = static_cast<int>(tagset.size());
  std::vector<Segment> out;

  std::optional<Segment> open;
  // Under BIOES a chunk opened by B or I stays open until E.
  bool awaiting_end = false;
  auto close = [&](std::size_t end) {
    if (!open) return;
    open->end = end;
    out.push_back(*open);
    open.reset();
    awaiting_end = false;
  };

  for (std::size_t t = 0; t < tags.size(); ++t) {
    const int tag = tags[t];
    MCRF_EXPECT(tag >= 0 && tag < d, "tag index out of range");
    const bool entered_illegally =
        t == 0 ? !is_legal_start(tagset, tag) : !is_legal_transition(tagset, tags[t - 1], tag);
    if (entered_illegally && awaiting_end && open) open->legality = Legality::kIllegal;

    const Prefix p = tagset.prefix(tag);
    const int type = tagset.type_of(tag);
    const Legality entry = entered_illegally ? Legality::kIllegal : Legality::kLegal;
    const bool continues = open && open->type == type && (bioes ? awaiting_end : true);

    switch (p) {
      case Prefix::kO:
        close(t);
        break;
      case Prefix::kB:
        close(t);
        open = Segment{type, t, t, entry};
        awaiting_end = bioes;
        break;
      case Prefix::kI:
        if (!continues) {
          close(t);
          open = Segment{type, t, t, Legality::kIllegal};
          awaiting_end = bioes;
        }
        break;
      case Prefix::kE:
        if (continues) {
          close(t + 1);
        } else {
          close(t);
          out.push_back(Segment{type, t, t + 1, Legality::kIllegal});
        }
        break;
      case Prefix::kS:
        close(t);
        out.push_back(Segment{type, t, t + 1, entry});
        break;
    }
  }
  close(tags.size());
  return out;
}

Path repair_tags(std::span<const int> tags, const Tagset& tagset, Strategy strategy) {
  Path out(tags.begin(), tags.end());
  if (strategy == Strategy::kNone) return out;
  const bool bioes = tagset.scheme() == Scheme::kBioes;
  for (const Segment& s : extract_segments(tags, tagset)) {
    if (s.legal()) continue;
    for (std::size_t t = s.start; t < s.end; ++t) {
      if (strategy == Strategy::kDiscard) {
        out[t] = 0;
        continue;
      }
      Prefix p = Prefix::kI;
      if (bioes && s.end - s.start == 1) {
        p = Prefix::kS;
      } else if (t == s.start) {
        p = Prefix::kB;
      } else if (bioes && t + 1 == s.end) {
        p = Prefix::kE;
      }
      out[t] = tagset.index_of(p, s.type);
    }
  }
  return out;
}

}  // namespace mcrf
