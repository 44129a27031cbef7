#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "mcrf/error.hpp"
#include "mcrf/masking.hpp"
#include "mcrf/postproc.hpp"
#include "oracles.hpp"

using namespace mcrf;

namespace {

Path to_path(const Tagset& ts, const std::vector<std::string>& tags) {
  Path p;
  for (const auto& t : tags) p.push_back(*ts.find(t));
  return p;
}

std::vector<std::string> to_tags(const Tagset& ts, const Path& p) {
  std::vector<std::string> out;
  for (int j : p) out.push_back(ts.tag(j));
  return out;
}

}  // namespace

TEST_CASE("retain and discard on a sentence with two illegal chunks") {
  const Tagset ts = build_tagset(Scheme::kBio, {"LOC", "MISC", "PER"});
  const Path raw = to_path(ts, {"O", "I-PER", "O", "B-LOC", "I-MISC"});
  CHECK(to_tags(ts, repair_tags(raw, ts, Strategy::kRetain)) ==
        std::vector<std::string>{"O", "B-PER", "O", "B-LOC", "B-MISC"});
  CHECK(to_tags(ts, repair_tags(raw, ts, Strategy::kDiscard)) ==
        std::vector<std::string>{"O", "O", "O", "B-LOC", "O"});
  CHECK(repair_tags(raw, ts, Strategy::kNone) == raw);
}

TEST_CASE("segments follow the chunking convention") {
  const Tagset ts = build_tagset(Scheme::kBio, {"LOC", "MISC", "PER"});
  const auto segs = extract_segments(to_path(ts, {"O", "I-PER", "O", "B-LOC", "I-MISC"}), ts);
  REQUIRE(segs.size() == 3);
  CHECK(segs[0] == Segment{2, 1, 2, Legality::kIllegal});
  CHECK(segs[1] == Segment{0, 3, 4, Legality::kLegal});
  CHECK(segs[2] == Segment{1, 4, 5, Legality::kIllegal});

  const auto chain = extract_segments(to_path(ts, {"B-LOC", "I-LOC", "I-LOC", "B-LOC", "O", "I-LOC", "I-LOC"}), ts);
  REQUIRE(chain.size() == 3);
  CHECK(chain[0] == Segment{0, 0, 3, Legality::kLegal});
  CHECK(chain[1] == Segment{0, 3, 4, Legality::kLegal});
  CHECK(chain[2] == Segment{0, 5, 7, Legality::kIllegal});
  CHECK(extract_segments(to_path(ts, {"I-LOC"}), ts)[0].legality == Legality::kIllegal);
}

TEST_CASE("BIOES segments") {
  const Tagset ts = build_tagset(Scheme::kBioes, {"X", "Y"});
  const auto segs = extract_segments(to_path(ts, {"B-X", "I-X", "E-X", "S-Y", "O", "B-Y", "O"}), ts);
  REQUIRE(segs.size() == 3);
  CHECK(segs[0] == Segment{0, 0, 3, Legality::kLegal});
  CHECK(segs[1] == Segment{1, 3, 4, Legality::kLegal});
  CHECK(segs[2].start == 5);
  CHECK(segs[2].end == 6);
  CHECK_FALSE(segs[2].legal());

  const Path bad = to_path(ts, {"O", "E-X", "O", "B-X", "I-X"});
  const auto tail = extract_segments(bad, ts);
  REQUIRE(tail.size() == 2);
  CHECK_FALSE(tail[0].legal());
  CHECK(tail[1].legal());
  CHECK(to_tags(ts, repair_tags(bad, ts, Strategy::kRetain)) ==
        std::vector<std::string>{"O", "S-X", "O", "B-X", "I-X"});
  CHECK(to_tags(ts, repair_tags(bad, ts, Strategy::kDiscard)) ==
        std::vector<std::string>{"O", "O", "O", "B-X", "I-X"});
}

TEST_CASE("repair output is legal and repair is a fixed point on legal input") {
  for (Scheme scheme : {Scheme::kBio, Scheme::kBioes}) {
    const Tagset ts = build_tagset(scheme, {"X", "Y"});
    const bool bioes = scheme == Scheme::kBioes;
    const auto rules = illegal_transition_set(ts);
    std::mt19937_64 rng(static_cast<std::uint64_t>(scheme) + 1);
    std::uniform_int_distribution<int> tag(0, static_cast<int>(ts.size()) - 1);
    for (int k = 0; k < 2000; ++k) {
      Path p(1 + rng() % 8);
      for (int& t : p) t = tag(rng);
      for (Strategy s : {Strategy::kRetain, Strategy::kDiscard}) {
        const Path r = repair_tags(p, ts, s);
        // Only the end of an open BIOES chunk may remain unclosed.
        CHECK(rules.is_legal(r));
        CHECK(repair_tags(r, ts, s) == r);
        if (oracle::legal_path(ts.tags(), p, bioes)) CHECK(r == p);
      }
      const auto segs = extract_segments(repair_tags(p, ts, Strategy::kRetain), ts);
      for (const auto& seg : segs) CHECK(seg.legal());
    }
  }
}

TEST_CASE("strategy names") {
  CHECK(parse_strategy("retain") == Strategy::kRetain);
  CHECK(to_string(Strategy::kDiscard) == "discard");
  CHECK_THROWS_AS(parse_strategy("keep"), ConfigError);
}
