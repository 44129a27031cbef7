#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mcrf {

enum class Scheme { kBio, kBioes };

enum class Prefix { kO, kB, kI, kE, kS };

std::string_view to_string(Scheme scheme);
std::string_view to_string(Prefix prefix);
// Accepts "bio"/"BIO" and "bioes"/"BIOES"; throws ConfigError otherwise.
Scheme parse_scheme(std::string_view name);

// The non-O prefixes of a scheme, in tag-inventory order.
std::span<const Prefix> entity_prefixes(Scheme scheme);

struct TagParts {
  Prefix prefix;
  std::optional<std::string> entity_type;

  friend bool operator==(const TagParts&, const TagParts&) = default;
};

// Tag inventory for a scheme and an ordered list of entity types.
//
// Tags are laid out as O, then one block per entity type holding the scheme's
// prefixes in fixed order (B, I for BIO; B, I, E, S for BIOES). The layout is
// part of the model file format.
class Tagset {
 public:
  Tagset(Scheme scheme, std::vector<std::string> entity_types);

  Scheme scheme() const { return scheme_; }
  std::size_t size() const { return tags_.size(); }
  const std::vector<std::string>& tags() const { return tags_; }
  const std::vector<std::string>& entity_types() const { return types_; }

  const std::string& tag(int index) const;
  std::optional<int> find(std::string_view tag) const;

  Prefix prefix(int index) const;
  // Entity-type ordinal, or -1 for O.
  int type_of(int index) const;
  // Tag index for (prefix, type ordinal); prefix must belong to the scheme.
  int index_of(Prefix prefix, int type) const;
  std::optional<int> type_index(std::string_view entity_type) const;

  friend bool operator==(const Tagset& a, const Tagset& b) {
    return a.scheme_ == b.scheme_ && a.types_ == b.types_;
  }

 private:
  Scheme scheme_;
  std::vector<std::string> types_;
  std::vector<std::string> tags_;
  std::vector<Prefix> prefixes_;
  std::vector<int> type_ids_;
  std::unordered_map<std::string, int> index_;
};

Tagset build_tagset(Scheme scheme, std::vector<std::string> entity_types);

// Illegal transitions (omega) and tags that may not open a sentence.
class TransitionRuleSet {
 public:
  TransitionRuleSet() = default;
  TransitionRuleSet(std::size_t num_tags, std::vector<std::pair<int, int>> omega,
                    std::vector<int> illegal_starts);

  static TransitionRuleSet none(std::size_t num_tags) { return {num_tags, {}, {}}; }

  std::size_t num_tags() const { return num_tags_; }
  // Sorted lexicographically.
  const std::vector<std::pair<int, int>>& omega() const { return omega_; }
  const std::vector<int>& illegal_starts() const { return illegal_starts_; }

  bool forbids(int from, int to) const {
    return forbidden_[static_cast<std::size_t>(from) * num_tags_ + static_cast<std::size_t>(to)] != 0;
  }
  bool forbids_start(int tag) const { return start_forbidden_[static_cast<std::size_t>(tag)] != 0; }

  // A path is legal iff it uses no pair from omega and does not open with an illegal start.
  bool is_legal(std::span<const int> path) const;

  TransitionRuleSet without_starts() const { return {num_tags_, omega_, {}}; }

 private:
  std::size_t num_tags_ = 0;
  std::vector<std::pair<int, int>> omega_;
  std::vector<int> illegal_starts_;
  std::vector<char> forbidden_;
  std::vector<char> start_forbidden_;
};

bool is_legal_transition(const Tagset& tagset, int from, int to);
bool is_legal_start(const Tagset& tagset, int tag);
TransitionRuleSet illegal_transition_set(const Tagset& tagset);
TagParts decompose_tag(const Tagset& tagset, int index);

// First position at which a path breaks the scheme.
struct Violation {
  std::size_t position;  // 0-based; 0 means an illegal start
  int from;              // -1 for an illegal start
  int to;
};
std::optional<Violation> find_violation(const TransitionRuleSet& rules, std::span<const int> path);

// Human-readable statement of the rule a transition breaks, e.g.
// "I-LOC must follow B-LOC or I-LOC".
std::string describe_violation(const Tagset& tagset, const Violation& v);

}  // namespace mcrf
