#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "mcrf/encoder.hpp"
#include "mcrf/error.hpp"
#include "oracles.hpp"

using namespace mcrf;

namespace {

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("mcrf_encoder_" + name);
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

}  // namespace

TEST_CASE("vocabulary reserves padding and unknown") {
  Vocabulary v;
  CHECK(v.size() == 2);
  CHECK(v.token(Vocabulary::kPad) == "<pad>");
  CHECK(v.token(Vocabulary::kUnknown) == "<unk>");
  const int a = v.add("paris");
  CHECK(a == 2);
  CHECK(v.add("paris") == 2);
  CHECK(v.lookup("paris") == 2);
  CHECK(v.lookup("berlin") == Vocabulary::kUnknown);
  const std::vector<std::string> toks = {"paris", "rome"};
  CHECK(v.lookup(toks) == std::vector<int>{2, Vocabulary::kUnknown});
}

TEST_CASE("encode concatenates the left, centre and right embeddings") {
  std::mt19937_64 rng(1);
  const EncoderWeights w = EncoderWeights::random(5, 2, 3, rng, 0.5);
  const std::vector<int> tokens = {2, 4, 3};
  const EmissionSequence em = encode(tokens, w);
  REQUIRE(em.rows() == 3);
  REQUIRE(em.cols() == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    const int ctx[3] = {t == 0 ? Vocabulary::kPad : tokens[t - 1], tokens[t], t == 2 ? Vocabulary::kPad : tokens[t + 1]};
    for (std::size_t j = 0; j < 3; ++j) {
      double s = w.bias[j];
      for (std::size_t k = 0; k < 3; ++k) {
        for (std::size_t e = 0; e < 2; ++e) s += w.embeddings(static_cast<std::size_t>(ctx[k]), e) * w.projection(k * 2 + e, j);
      }
      CHECK(em(t, j) == doctest::Approx(s).epsilon(1e-14));
    }
  }
}

TEST_CASE("encoder backward matches central differences of a linear functional") {
  std::mt19937_64 rng(2);
  EncoderWeights w = EncoderWeights::random(6, 3, 4, rng, 0.5);
  const std::vector<int> tokens = {2, 5, 5, 1};
  Matrix g(4, 4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& x : g.values()) x = u(rng);
  auto f = [&] {
    const auto em = encode(tokens, w);
    double s = 0.0;
    for (std::size_t i = 0; i < em.values().size(); ++i) s += em.values()[i] * g.values()[i];
    return s;
  };
  const EncoderWeights grad = encoder_backward(tokens, g, w);
  for (std::size_t i = 0; i < w.embeddings.values().size(); ++i) {
    CHECK(oracle::rel_err(grad.embeddings.values()[i], oracle::derivative(f, w.embeddings.values()[i])) <= 1e-6);
  }
  for (std::size_t i = 0; i < w.projection.values().size(); ++i) {
    CHECK(oracle::rel_err(grad.projection.values()[i], oracle::derivative(f, w.projection.values()[i])) <= 1e-6);
  }
  for (std::size_t i = 0; i < w.bias.size(); ++i) {
    CHECK(oracle::rel_err(grad.bias[i], oracle::derivative(f, w.bias[i])) <= 1e-6);
  }
}

TEST_CASE("logits files round-trip exactly") {
  const Tagset ts = build_tagset(Scheme::kBio, {"LOC"});
  std::mt19937_64 rng(3);
  std::vector<EmissionSequence> seqs;
  for (std::size_t T : {2, 1, 4}) {
    EmissionSequence em(T, 3);
    for (double& v : em.values()) v = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
    seqs.push_back(em);
  }
  const auto path = std::filesystem::temp_directory_path() / "mcrf_encoder_roundtrip.logits";
  write_logits(path, ts, seqs);
  std::vector<std::string> tags;
  CHECK(read_logits(path, &tags) == seqs);
  CHECK(tags == ts.tags());
  const std::vector<std::size_t> lengths = {2, 1, 4};
  CHECK(load_external_logits(path, ts, lengths) == seqs);
  const std::vector<std::size_t> wrong = {2, 2, 4};
  CHECK_THROWS_AS(load_external_logits(path, ts, wrong), FormatError);
  CHECK_THROWS_AS(load_external_logits(path, build_tagset(Scheme::kBio, {"PER"}), lengths), FormatError);
}

TEST_CASE("malformed logits report the line") {
  const auto path = temp_file("bad.logits", "d=2\ttags=O,X\n0.5\t1\n0.25\tfoo\n");
  try {
    read_logits(path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).rfind("line 3: ", 0) == 0);
  }
  CHECK_THROWS_AS(read_logits(temp_file("short.logits", "d=2\ttags=O,X\n0.5\n")), FormatError);
  CHECK_THROWS_AS(read_logits(temp_file("nohead.logits", "0.5\t1\n")), FormatError);
}
