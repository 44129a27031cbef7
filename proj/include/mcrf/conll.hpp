#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mcrf/crf.hpp"
#include "mcrf/schemes.hpp"

namespace mcrf {

struct LabeledSentence {
  std::vector<std::string> tokens;
  Path gold;

  friend bool operator==(const LabeledSentence&, const LabeledSentence&) = default;
};

using Corpus = std::vector<LabeledSentence>;

struct ConllReadOptions {
  // Column holding the tag; negative values count from the end (-1 = last).
  int tag_column = -1;
  // Reject gold paths that break the scheme.
  bool validate_legality = true;
};

// One token per line, whitespace-separated columns, token first; a blank line
// ends a sentence. Lines may end in LF or CRLF. Errors carry line numbers.
Corpus read_conll(std::istream& in, const Tagset& tagset, const ConllReadOptions& opts = {});
Corpus read_conll(const std::filesystem::path& path, const Tagset& tagset, const ConllReadOptions& opts = {});

// Writes "token gold [prediction]" lines separated by single spaces.
void write_conll(std::ostream& out, const Tagset& tagset, std::span<const LabeledSentence> sentences,
                 std::span<const Path> predictions = {});
void write_conll(const std::filesystem::path& path, const Tagset& tagset, std::span<const LabeledSentence> sentences,
                 std::span<const Path> predictions = {});

std::vector<std::size_t> sentence_lengths(std::span<const LabeledSentence> corpus);

}  // namespace mcrf
