#include "mcrf/synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

#include "mcrf/error.hpp"

namespace mcrf {

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

struct TypeLexicon {
  std::vector<std::string> heads;
  std::vector<std::string> tails;
  std::vector<std::string> triggers;
};

std::vector<TypeLexicon> build_lexicon(const SyntheticConfig& cfg) {
  const std::size_t k = cfg.entity_types.size();
  std::vector<TypeLexicon> lex(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::string stem = lower(cfg.entity_types[i]);
    for (std::size_t w = 0; w < cfg.words_per_type; ++w) lex[i].heads.push_back(stem + "_" + std::to_string(w));
    for (std::size_t w = 0; w < cfg.tails_per_type; ++w) lex[i].tails.push_back(stem + "_t" + std::to_string(w));
    for (std::size_t w = 0; w < 3; ++w) lex[i].triggers.push_back("pre_" + stem + std::to_string(w));
  }
  if (k > 1) {
    const auto shared = static_cast<std::size_t>(std::round(cfg.shared_word_rate * static_cast<double>(cfg.words_per_type)));
    for (std::size_t i = 0; i < k; ++i) {
      const auto& next = lex[(i + 1) % k].heads;
      for (std::size_t w = 0; w < shared && w < lex[i].heads.size(); ++w) {
        lex[i].heads[lex[i].heads.size() - 1 - w] = next[w];
      }
    }
  }
  return lex;
}

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> u(0, v.size() - 1);
  return v[u(rng)];
}

}  // namespace

std::vector<std::string> default_entity_types(std::size_t count) {
  static const std::vector<std::string> kNames = {"LOC", "ORG", "PER", "MISC"};
  std::vector<std::string> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(i < kNames.size() ? kNames[i] : "T" + std::to_string(i + 1));
  }
  return out;
}

Corpus generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
  if (cfg.entity_types.empty()) throw ConfigError("synthetic corpus needs at least one entity type");
  if (cfg.min_length < 1 || cfg.max_length < cfg.min_length) throw ConfigError("invalid sentence length range");
  if (cfg.vocab_size < 1 || cfg.words_per_type < 1 || cfg.tails_per_type < 1) {
    throw ConfigError("word pools must be non-empty");
  }
  const Tagset tagset = build_tagset(cfg.scheme, cfg.entity_types);
  const auto lex = build_lexicon(cfg);
  std::vector<std::string> fillers;
  for (std::size_t w = 0; w < cfg.vocab_size; ++w) fillers.push_back("w" + std::to_string(w));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> length_dist(cfg.min_length, cfg.max_length);
  std::uniform_int_distribution<int> type_dist(0, static_cast<int>(cfg.entity_types.size()) - 1);
  const bool bioes = cfg.scheme == Scheme::kBioes;

  Corpus corpus;
  corpus.reserve(cfg.sentences);
  for (std::size_t n = 0; n < cfg.sentences; ++n) {
    const std::size_t len = length_dist(rng);
    LabeledSentence s;
    std::size_t t = 0;
    while (t < len) {
      if (coin(rng) >= cfg.entity_density) {
        s.tokens.push_back(pick(fillers, rng));
        s.gold.push_back(0);
        ++t;
        continue;
      }
      const int type = type_dist(rng);
      const auto& words = lex[static_cast<std::size_t>(type)];
      if (coin(rng) < cfg.trigger_rate && t + 1 < len) {
        s.tokens.push_back(pick(words.triggers, rng));
        s.gold.push_back(0);
        ++t;
      }
      const double r = coin(rng);
      std::size_t span = r < 0.5 ? 1 : (r < 0.8 ? 2 : 3);
      span = std::min(span, len - t);
      for (std::size_t i = 0; i < span; ++i) {
        if (span == 1) {
          s.tokens.push_back(coin(rng) < cfg.tail_singleton_rate ? pick(words.tails, rng) : pick(words.heads, rng));
        } else if (i == 0) {
          s.tokens.push_back(pick(words.heads, rng));
        } else {
          s.tokens.push_back(coin(rng) < 0.5 ? pick(words.tails, rng) : pick(words.heads, rng));
        }
        Prefix p = i == 0 ? Prefix::kB : Prefix::kI;
        if (bioes && span == 1) p = Prefix::kS;
        if (bioes && span > 1 && i + 1 == span) p = Prefix::kE;
        s.gold.push_back(tagset.index_of(p, type));
      }
      t += span;
      // Keep consecutive spans apart so chunk boundaries stay recoverable.
      if (t < len) {
        s.tokens.push_back(pick(fillers, rng));
        s.gold.push_back(0);
        ++t;
      }
    }
    for (auto& tok : s.tokens) {
      if (coin(rng) < cfg.noise_rate) tok = pick(fillers, rng);
    }
    corpus.push_back(std::move(s));
  }
  return corpus;
}

Split split_train_dev(const Corpus& corpus, double dev_fraction, std::uint64_t seed) {
  MCRF_EXPECT(dev_fraction >= 0.0 && dev_fraction <= 1.0, "dev fraction must lie in [0, 1]");
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_dev = static_cast<std::size_t>(std::round(dev_fraction * static_cast<double>(corpus.size())));
  Split out;
  for (std::size_t i = 0; i < order.size(); ++i) (i < n_dev ? out.dev : out.train).push_back(corpus[order[i]]);
  return out;
}

Corpus sample_fraction(const Corpus& corpus, double fraction, std::uint64_t seed) {
  MCRF_EXPECT(fraction > 0.0 && fraction <= 1.0, "sample fraction must lie in (0, 1]");
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto keep = static_cast<std::size_t>(std::round(fraction * static_cast<double>(corpus.size())));
  order.resize(keep);
  std::sort(order.begin(), order.end());
  Corpus out;
  out.reserve(keep);
  for (std::size_t i : order) out.push_back(corpus[i]);
  return out;
}

}  // namespace mcrf
