#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mcrf/conll.hpp"
#include "mcrf/schemes.hpp"

namespace mcrf {

// Knobs of the synthetic tagging corpus.
//
// Sentences mix filler words with typed entity spans of one to three tokens.
// Each type owns a pool of "head" words (any position in a span), a pool of
// "tail" words that normally appear only after the first token of a span,
// and a few trigger words that tend to precede its spans. A small fraction of
// head words is shared between two types, and tail words occasionally appear
// as single-token entities, so resolving a token's tag sometimes needs its
// neighbours.
struct SyntheticConfig {
  std::vector<std::string> entity_types = {"LOC", "ORG", "PER"};
  Scheme scheme = Scheme::kBio;
  std::size_t vocab_size = 300;       // filler words
  std::size_t words_per_type = 40;    // head words per type
  std::size_t tails_per_type = 10;
  std::size_t sentences = 1000;
  std::size_t min_length = 4;
  std::size_t max_length = 20;
  double entity_density = 0.15;       // chance an eligible position opens a span
  double noise_rate = 0.02;           // chance a token is replaced by a random filler word
  double shared_word_rate = 0.1;      // fraction of head words shared with the next type
  double trigger_rate = 0.5;          // chance a span is preceded by one of its type's triggers
  double tail_singleton_rate = 0.03;  // chance a one-token span uses a tail word
};

// Default entity-type names for `count` types (LOC, ORG, PER, MISC, then T5, T6, ...).
std::vector<std::string> default_entity_types(std::size_t count);

Corpus generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

struct Split {
  Corpus train;
  Corpus dev;
};

// Seeded shuffle, then the first `dev_fraction` of sentences become dev.
Split split_train_dev(const Corpus& corpus, double dev_fraction, std::uint64_t seed);
// Seeded random subset of round(fraction * size) sentences, original order kept.
Corpus sample_fraction(const Corpus& corpus, double fraction, std::uint64_t seed);

}  // namespace mcrf
