#include "mcrf/schemes.hpp"

#include <algorithm>
#include <array>
#include <unordered_set>

#include "mcrf/error.hpp"

namespace mcrf {

namespace {

constexpr std::array<Prefix, 2> kBioPrefixes = {Prefix::kB, Prefix::kI};
constexpr std::array<Prefix, 4> kBioesPrefixes = {Prefix::kB, Prefix::kI, Prefix::kE, Prefix::kS};

}  // namespace

std::string_view to_string(Scheme scheme) {
  return scheme == Scheme::kBio ? "BIO" : "BIOES";
}

std::string_view to_string(Prefix prefix) {
  switch (prefix) {
    case Prefix::kO: return "O";
    case Prefix::kB: return "B";
    case Prefix::kI: return "I";
    case Prefix::kE: return "E";
    case Prefix::kS: return "S";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "bio" || name == "BIO") return Scheme::kBio;
  if (name == "bioes" || name == "BIOES") return Scheme::kBioes;
  throw ConfigError("unknown tagging scheme '" + std::string(name) + "' (expected bio or bioes)");
}

std::span<const Prefix> entity_prefixes(Scheme scheme) {
  if (scheme == Scheme::kBio) return kBioPrefixes;
  return kBioesPrefixes;
}

Tagset::Tagset(Scheme scheme, std::vector<std::string> entity_types)
    : scheme_(scheme), types_(std::move(entity_types)) {
  if (types_.empty()) throw ConfigError("at least one entity type is required");
  std::unordered_set<std::string> seen;
  for (const auto& t : types_) {
    if (t.empty()) throw ConfigError("entity type names must be non-empty");
    if (!seen.insert(t).second) throw ConfigError("duplicate entity type '" + t + "'");
  }

  tags_.push_back("O");
  prefixes_.push_back(Prefix::kO);
  type_ids_.push_back(-1);
  for (std::size_t k = 0; k < types_.size(); ++k) {
    for (Prefix p : entity_prefixes(scheme_)) {
      tags_.push_back(std::string(to_string(p)) + "-" + types_[k]);
      prefixes_.push_back(p);
      type_ids_.push_back(static_cast<int>(k));
    }
  }
  for (std::size_t i = 0; i < tags_.size(); ++i) index_.emplace(tags_[i], static_cast<int>(i));
}

const std::string& Tagset::tag(int index) const {
  MCRF_EXPECT(index >= 0 && static_cast<std::size_t>(index) < tags_.size(), "tag index out of range");
  return tags_[static_cast<std::size_t>(index)];
}

std::optional<int> Tagset::find(std::string_view tag) const {
  auto it = index_.find(std::string(tag));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Prefix Tagset::prefix(int index) const {
  MCRF_EXPECT(index >= 0 && static_cast<std::size_t>(index) < tags_.size(), "tag index out of range");
  return prefixes_[static_cast<std::size_t>(index)];
}

int Tagset::type_of(int index) const {
  MCRF_EXPECT(index >= 0 && static_cast<std::size_t>(index) < tags_.size(), "tag index out of range");
  return type_ids_[static_cast<std::size_t>(index)];
}

int Tagset::index_of(Prefix prefix, int type) const {
  if (prefix == Prefix::kO) return 0;
  MCRF_EXPECT(type >= 0 && static_cast<std::size_t>(type) < types_.size(), "entity type out of range");
  const auto prefixes = entity_prefixes(scheme_);
  auto it = std::find(prefixes.begin(), prefixes.end(), prefix);
  MCRF_EXPECT(it != prefixes.end(), "prefix not part of the scheme");
  return 1 + type * static_cast<int>(prefixes.size()) + static_cast<int>(it - prefixes.begin());
}

std::optional<int> Tagset::type_index(std::string_view entity_type) const {
  auto it = std::find(types_.begin(), types_.end(), entity_type);
  if (it == types_.end()) return std::nullopt;
  return static_cast<int>(it - types_.begin());
}

Tagset build_tagset(Scheme scheme, std::vector<std::string> entity_types) {
  return Tagset(scheme, std::move(entity_types));
}

TransitionRuleSet::TransitionRuleSet(std::size_t num_tags, std::vector<std::pair<int, int>> omega,
                                     std::vector<int> illegal_starts)
    : num_tags_(num_tags),
      omega_(std::move(omega)),
      illegal_starts_(std::move(illegal_starts)),
      forbidden_(num_tags * num_tags, 0),
      start_forbidden_(num_tags, 0) {
  std::sort(omega_.begin(), omega_.end());
  omega_.erase(std::unique(omega_.begin(), omega_.end()), omega_.end());
  std::sort(illegal_starts_.begin(), illegal_starts_.end());
  illegal_starts_.erase(std::unique(illegal_starts_.begin(), illegal_starts_.end()), illegal_starts_.end());
  for (auto [i, j] : omega_) {
    MCRF_EXPECT(i >= 0 && j >= 0 && static_cast<std::size_t>(i) < num_tags &&
                    static_cast<std::size_t>(j) < num_tags,
                "omega entry out of range");
    forbidden_[static_cast<std::size_t>(i) * num_tags + static_cast<std::size_t>(j)] = 1;
  }
  for (int j : illegal_starts_) {
    MCRF_EXPECT(j >= 0 && static_cast<std::size_t>(j) < num_tags, "illegal start out of range");
    start_forbidden_[static_cast<std::size_t>(j)] = 1;
  }
}

bool TransitionRuleSet::is_legal(std::span<const int> path) const {
  return !find_violation(*this, path).has_value();
}

bool is_legal_transition(const Tagset& tagset, int from, int to) {
  const int d = static_cast<int>(tagset.size());
  MCRF_EXPECT(from >= 0 && from < d && to >= 0 && to < d, "tag index out of range");
  const Prefix pf = tagset.prefix(from);
  const Prefix pt = tagset.prefix(to);
  const bool same_type = tagset.type_of(from) == tagset.type_of(to);

  if (tagset.scheme() == Scheme::kBio) {
    if (pt != Prefix::kI) return true;
    return (pf == Prefix::kB || pf == Prefix::kI) && same_type;
  }

  // BIOES: an open chunk (after B or I) must continue with I or E of its type;
  // otherwise only O, B and S may follow.
  if (pf == Prefix::kB || pf == Prefix::kI) {
    return (pt == Prefix::kI || pt == Prefix::kE) && same_type;
  }
  return pt == Prefix::kO || pt == Prefix::kB || pt == Prefix::kS;
}

bool is_legal_start(const Tagset& tagset, int tag) {
  const Prefix p = tagset.prefix(tag);
  return !(p == Prefix::kI || p == Prefix::kE);
}

TransitionRuleSet illegal_transition_set(const Tagset& tagset) {
  const int d = static_cast<int>(tagset.size());
  std::vector<std::pair<int, int>> omega;
  std::vector<int> starts;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (!is_legal_transition(tagset, i, j)) omega.emplace_back(i, j);
    }
  }
  for (int j = 0; j < d; ++j) {
    if (!is_legal_start(tagset, j)) starts.push_back(j);
  }
  return {tagset.size(), std::move(omega), std::move(starts)};
}

TagParts decompose_tag(const Tagset& tagset, int index) {
  const std::string& tag = tagset.tag(index);
  if (index == 0) return {Prefix::kO, std::nullopt};
  const auto dash = tag.find('-');
  return {tagset.prefix(index), tag.substr(dash + 1)};
}

std::optional<Violation> find_violation(const TransitionRuleSet& rules, std::span<const int> path) {
  if (path.empty()) return std::nullopt;
  if (rules.forbids_start(path[0])) return Violation{0, -1, path[0]};
  for (std::size_t t = 1; t < path.size(); ++t) {
    if (rules.forbids(path[t - 1], path[t])) return Violation{t, path[t - 1], path[t]};
  }
  return std::nullopt;
}

std::string describe_violation(const Tagset& tagset, const Violation& v) {
  const std::string& to = tagset.tag(v.to);
  if (v.from < 0) return to + " cannot start a sentence";
  const std::string& from = tagset.tag(v.from);
  const Prefix pt = tagset.prefix(v.to);
  const Prefix pf = tagset.prefix(v.from);
  std::string rule;
  if (tagset.scheme() == Scheme::kBio) {
    const std::string& type = tagset.entity_types()[static_cast<std::size_t>(tagset.type_of(v.to))];
    rule = to + " must follow B-" + type + " or I-" + type;
  } else if (pf == Prefix::kB || pf == Prefix::kI) {
    const std::string& type = tagset.entity_types()[static_cast<std::size_t>(tagset.type_of(v.from))];
    rule = from + " must be followed by I-" + type + " or E-" + type;
  } else {
    rule = std::string(to_string(pt)) + "-* must follow B-* or I-* of the same type";
  }
  return from + " -> " + to + " violates the " + std::string(to_string(tagset.scheme())) +
         " scheme (" + rule + ")";
}

}  // namespace mcrf
