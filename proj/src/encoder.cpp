#include "mcrf/encoder.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "mcrf/error.hpp"
#include "mcrf/text.hpp"

namespace mcrf {

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
}

int Vocabulary::add(const std::string& token) {
  auto [it, inserted] = index_.emplace(token, static_cast<int>(tokens_.size()));
  if (inserted) tokens_.push_back(token);
  return it->second;
}

int Vocabulary::lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnknown : it->second;
}

std::vector<int> Vocabulary::lookup(std::span<const std::string> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(lookup(t));
  return ids;
}

EncoderWeights EncoderWeights::zeros(std::size_t vocab_size, std::size_t width, std::size_t num_tags) {
  return {Matrix(vocab_size, width), Matrix(3 * width, num_tags), std::vector<double>(num_tags, 0.0)};
}

EncoderWeights EncoderWeights::random(std::size_t vocab_size, std::size_t width, std::size_t num_tags,
                                      std::mt19937_64& rng, double scale) {
  EncoderWeights w = zeros(vocab_size, width, num_tags);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& v : w.embeddings.values()) v = u(rng);
  for (double& v : w.projection.values()) v = u(rng);
  return w;
}

void EncoderWeights::set_zero() {
  embeddings.fill(0.0);
  projection.fill(0.0);
  bias.assign(bias.size(), 0.0);
}

namespace {

void check_weights(std::span<const int> tokens, const EncoderWeights& w) {
  MCRF_EXPECT(!tokens.empty(), "empty token sequence");
  MCRF_EXPECT(w.projection.rows() == 3 * w.width(), "projection rows must be 3 * embedding width");
  MCRF_EXPECT(w.projection.cols() == w.bias.size(), "projection columns differ from bias length");
  for (int tok : tokens) {
    MCRF_EXPECT(tok >= 0 && static_cast<std::size_t>(tok) < w.embeddings.rows(), "token index out of range");
  }
}

int window_token(std::span<const int> tokens, std::ptrdiff_t pos) {
  if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(tokens.size())) return Vocabulary::kPad;
  return tokens[static_cast<std::size_t>(pos)];
}

}  // namespace

EmissionSequence encode(std::span<const int> tokens, const EncoderWeights& w) {
  check_weights(tokens, w);
  const std::size_t T = tokens.size();
  const std::size_t e = w.width();
  const std::size_t d = w.num_tags();
  EmissionSequence out(T, d);
  for (std::size_t t = 0; t < T; ++t) {
    auto row = out.row(t);
    for (std::size_t j = 0; j < d; ++j) row[j] = w.bias[j];
    for (std::size_t slot = 0; slot < 3; ++slot) {
      const int tok = window_token(tokens, static_cast<std::ptrdiff_t>(t + slot) - 1);
      const auto emb = w.embeddings.row(static_cast<std::size_t>(tok));
      for (std::size_t k = 0; k < e; ++k) {
        const double x = emb[k];
        if (x == 0.0) continue;
        const auto proj = w.projection.row(slot * e + k);
        for (std::size_t j = 0; j < d; ++j) row[j] += x * proj[j];
      }
    }
  }
  return out;
}

void encoder_backward_accumulate(std::span<const int> tokens, const Matrix& d_logits,
                                 const EncoderWeights& w, EncoderWeights& grad) {
  check_weights(tokens, w);
  const std::size_t T = tokens.size();
  const std::size_t e = w.width();
  const std::size_t d = w.num_tags();
  MCRF_EXPECT(d_logits.rows() == T && d_logits.cols() == d, "d_logits shape mismatch");
  MCRF_EXPECT(grad.embeddings.rows() == w.embeddings.rows() && grad.width() == e && grad.num_tags() == d,
              "gradient buffer shape mismatch");

  for (std::size_t t = 0; t < T; ++t) {
    const auto g = d_logits.row(t);
    for (std::size_t j = 0; j < d; ++j) grad.bias[j] += g[j];
    for (std::size_t slot = 0; slot < 3; ++slot) {
      const auto tok = static_cast<std::size_t>(window_token(tokens, static_cast<std::ptrdiff_t>(t + slot) - 1));
      const auto emb = w.embeddings.row(tok);
      auto d_emb = grad.embeddings.row(tok);
      for (std::size_t k = 0; k < e; ++k) {
        const auto proj = w.projection.row(slot * e + k);
        auto d_proj = grad.projection.row(slot * e + k);
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          d_proj[j] += emb[k] * g[j];
          acc += proj[j] * g[j];
        }
        d_emb[k] += acc;
      }
    }
  }
}

EncoderWeights encoder_backward(std::span<const int> tokens, const Matrix& d_logits, const EncoderWeights& w) {
  EncoderWeights grad = EncoderWeights::zeros(w.embeddings.rows(), w.width(), w.num_tags());
  encoder_backward_accumulate(tokens, d_logits, w, grad);
  return grad;
}

std::vector<EmissionSequence> read_logits(const std::filesystem::path& path, std::vector<std::string>* tags_out) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open logits file " + path.string());

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw FormatError(1, "missing header in logits file");
  ++line_no;
  strip_cr(line);
  const auto header = split(line, '\t');
  if (header.size() != 2 || !header[0].starts_with("d=") || !header[1].starts_with("tags=")) {
    throw FormatError(line_no, "expected header 'd=<int>\\ttags=<tags>'");
  }
  std::size_t d = 0;
  {
    const std::string_view num = std::string_view(header[0]).substr(2);
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), d);
    if (ec != std::errc() || ptr != num.data() + num.size() || d == 0) {
      throw FormatError(line_no, "invalid tag count '" + std::string(num) + "'");
    }
  }
  const auto tags = split(std::string_view(header[1]).substr(5), ',');
  if (tags.size() != d) throw FormatError(line_no, "header lists " + std::to_string(tags.size()) +
                                                       " tags but d=" + std::to_string(d));
  if (tags_out) *tags_out = tags;

  std::vector<EmissionSequence> out;
  std::vector<double> rows;
  auto flush = [&] {
    if (rows.empty()) return;
    EmissionSequence m(rows.size() / d, d);
    std::copy(rows.begin(), rows.end(), m.values().begin());
    out.push_back(std::move(m));
    rows.clear();
  };
  while (std::getline(in, line)) {
    ++line_no;
    strip_cr(line);
    if (line.empty()) {
      flush();
      continue;
    }
    const auto fields = split(line, '\t');
    if (fields.size() != d) {
      throw FormatError(line_no, "expected " + std::to_string(d) + " values, found " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      const auto v = parse_double(f);
      if (!v) throw FormatError(line_no, "non-numeric value '" + f + "'");
      rows.push_back(*v);
    }
  }
  flush();
  return out;
}

void write_logits(const std::filesystem::path& path, const Tagset& tagset,
                  std::span<const EmissionSequence> sequences) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write logits file " + path.string());
  out << "d=" << tagset.size() << "\ttags=" << join(tagset.tags(), ",") << "\n";
  for (std::size_t n = 0; n < sequences.size(); ++n) {
    const auto& m = sequences[n];
    MCRF_EXPECT(m.cols() == tagset.size(), "logits width differs from the tagset");
    if (n > 0) out << "\n";
    for (std::size_t t = 0; t < m.rows(); ++t) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (j > 0) out << '\t';
        out << format_double(m(t, j));
      }
      out << "\n";
    }
  }
  if (!out) throw Error("failed writing logits file " + path.string());
}

std::vector<EmissionSequence> load_external_logits(const std::filesystem::path& path, const Tagset& tagset,
                                                   std::span<const std::size_t> sentence_lengths) {
  std::vector<std::string> tags;
  auto seqs = read_logits(path, &tags);
  if (tags.size() != tagset.size()) {
    throw FormatError(1, "logits width d=" + std::to_string(tags.size()) + " does not match the tagset (d=" +
                             std::to_string(tagset.size()) + ")");
  }
  if (tags != tagset.tags()) throw FormatError(1, "logits tag order does not match the tagset");
  if (!sentence_lengths.empty()) {
    if (seqs.size() != sentence_lengths.size()) {
      throw FormatError(1, "logits file has " + std::to_string(seqs.size()) + " sentences but the corpus has " +
                               std::to_string(sentence_lengths.size()));
    }
    std::size_t line_no = 2;
    for (std::size_t n = 0; n < seqs.size(); ++n) {
      if (seqs[n].rows() != sentence_lengths[n]) {
        throw FormatError(line_no, "sentence " + std::to_string(n) + " has " + std::to_string(seqs[n].rows()) +
                                       " rows but " + std::to_string(sentence_lengths[n]) + " tokens");
      }
      line_no += seqs[n].rows() + 1;
    }
  }
  return seqs;
}

}  // namespace mcrf
