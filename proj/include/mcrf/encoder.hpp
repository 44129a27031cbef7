#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mcrf/crf.hpp"
#include "mcrf/matrix.hpp"
#include "mcrf/schemes.hpp"

namespace mcrf {

// Token <-> index map. Index 0 is the padding symbol used at sentence
// boundaries, index 1 stands for every unknown token.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnknown = 1;

  Vocabulary();

  int add(const std::string& token);
  int lookup(std::string_view token) const;
  std::vector<int> lookup(std::span<const std::string> tokens) const;
  const std::string& token(int index) const { return tokens_.at(static_cast<std::size_t>(index)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Window-of-three linear emission model:
//   logits[t] = [E(x_{t-1}); E(x_t); E(x_{t+1})] * P + b
// with E(pad) outside the sentence.
struct EncoderWeights {
  Matrix embeddings;  // V x e
  Matrix projection;  // 3e x d
  std::vector<double> bias;

  std::size_t width() const { return embeddings.cols(); }
  std::size_t num_tags() const { return bias.size(); }

  static EncoderWeights zeros(std::size_t vocab_size, std::size_t width, std::size_t num_tags);
  static EncoderWeights random(std::size_t vocab_size, std::size_t width, std::size_t num_tags,
                               std::mt19937_64& rng, double scale = 0.1);
  void set_zero();

  friend bool operator==(const EncoderWeights&, const EncoderWeights&) = default;
};

EmissionSequence encode(std::span<const int> tokens, const EncoderWeights& weights);

EncoderWeights encoder_backward(std::span<const int> tokens, const Matrix& d_logits,
                                const EncoderWeights& weights);
// Adds the gradient into `grad` (same shapes as `weights`).
void encoder_backward_accumulate(std::span<const int> tokens, const Matrix& d_logits,
                                 const EncoderWeights& weights, EncoderWeights& grad);

// Precomputed emission scores, one matrix per sentence.
//
// File layout: a header line "d=<int>\ttags=<comma-separated tags>", then for
// each sentence T lines of d tab-separated numbers, sentences separated by a
// single blank line.
std::vector<EmissionSequence> read_logits(const std::filesystem::path& path,
                                          std::vector<std::string>* tags_out = nullptr);
void write_logits(const std::filesystem::path& path, const Tagset& tagset,
                  std::span<const EmissionSequence> sequences);

// Reads a logits file and checks it against the tagset and, when given, the
// sentence lengths of the companion CoNLL file.
std::vector<EmissionSequence> load_external_logits(const std::filesystem::path& path, const Tagset& tagset,
                                                   std::span<const std::size_t> sentence_lengths = {});

}  // namespace mcrf
