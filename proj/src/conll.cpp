#include "mcrf/conll.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "mcrf/error.hpp"
#include "mcrf/text.hpp"

namespace mcrf {

Corpus read_conll(std::istream& in, const Tagset& tagset, const ConllReadOptions& opts) {
  const TransitionRuleSet rules = illegal_transition_set(tagset);
  Corpus corpus;
  LabeledSentence current;
  std::vector<std::size_t> lines;  // source line of each token in `current`
  std::size_t line_no = 0;

  auto finish_sentence = [&] {
    if (current.tokens.empty()) return;
    if (opts.validate_legality) {
      if (auto v = find_violation(rules, current.gold)) {
        throw FormatError(lines[v->position], "sentence " + std::to_string(corpus.size()) + ", position " +
                                                  std::to_string(v->position) + ": " +
                                                  describe_violation(tagset, *v));
      }
    }
    corpus.push_back(std::move(current));
    current = {};
    lines.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    const auto cols = split_whitespace(line);
    if (cols.empty()) {
      finish_sentence();
      continue;
    }
    const int n = static_cast<int>(cols.size());
    const int col = opts.tag_column < 0 ? n + opts.tag_column : opts.tag_column;
    if (n < 2 || col < 1 || col >= n) {
      throw FormatError(line_no, "expected a token and a tag column, got '" + line + "'");
    }
    const auto tag = tagset.find(cols[static_cast<std::size_t>(col)]);
    if (!tag) throw FormatError(line_no, "unknown tag '" + cols[static_cast<std::size_t>(col)] + "'");
    current.tokens.push_back(cols[0]);
    current.gold.push_back(*tag);
    lines.push_back(line_no);
  }
  finish_sentence();
  return corpus;
}

Corpus read_conll(const std::filesystem::path& path, const Tagset& tagset, const ConllReadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_conll(in, tagset, opts);
}

void write_conll(std::ostream& out, const Tagset& tagset, std::span<const LabeledSentence> sentences,
                 std::span<const Path> predictions) {
  MCRF_EXPECT(predictions.empty() || predictions.size() == sentences.size(),
              "prediction count differs from sentence count");
  for (std::size_t n = 0; n < sentences.size(); ++n) {
    const auto& s = sentences[n];
    MCRF_EXPECT(s.tokens.size() == s.gold.size(), "token and gold lengths differ");
    if (!predictions.empty()) MCRF_EXPECT(predictions[n].size() == s.tokens.size(), "prediction length mismatch");
    for (std::size_t t = 0; t < s.tokens.size(); ++t) {
      out << s.tokens[t] << ' ' << tagset.tag(s.gold[t]);
      if (!predictions.empty()) out << ' ' << tagset.tag(predictions[n][t]);
      out << '\n';
    }
    out << '\n';
  }
}

void write_conll(const std::filesystem::path& path, const Tagset& tagset, std::span<const LabeledSentence> sentences,
                 std::span<const Path> predictions) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_conll(out, tagset, sentences, predictions);
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<std::size_t> sentence_lengths(std::span<const LabeledSentence> corpus) {
  std::vector<std::size_t> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back(s.tokens.size());
  return out;
}

}  // namespace mcrf
