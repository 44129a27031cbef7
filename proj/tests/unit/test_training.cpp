#include <doctest.h>

#include <cmath>
#include <vector>

#include "mcrf/error.hpp"
#include "mcrf/synthetic.hpp"
#include "mcrf/training.hpp"

using namespace mcrf;

namespace {

struct Fixture {
  Tagset tagset = build_tagset(Scheme::kBio, {"LOC", "ORG", "PER"});
  Corpus train_set;
  Corpus dev_set;

  Fixture() {
    SyntheticConfig cfg;
    cfg.sentences = 240;
    const Corpus all = generate_synthetic(cfg, 5);
    train_set.assign(all.begin(), all.begin() + 200);
    dev_set.assign(all.begin() + 200, all.end());
  }
};

TrainConfig small_config(TrainMode mode) {
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.epochs = 2;
  cfg.batch_size = 16;
  cfg.eval_every = 5;
  cfg.embedding_width = 8;
  cfg.adam.learning_rate = 0.01;
  return cfg;
}

}  // namespace

TEST_CASE("one Adam step by hand") {
  std::vector<double> x = {1.0, 2.0};
  const std::vector<double> g = {0.5, -3.0};
  const std::vector<char> frozen = {0, 1};
  std::vector<ParamBlock> blocks = {{x, g, frozen}};
  OptimizerState state;
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  adam_step(state, blocks, cfg);
  // m = 0.05, v = 2.5e-4; bias-corrected m = 0.5, v = 0.25.
  CHECK(x[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)).epsilon(1e-15));
  CHECK(x[1] == 2.0);
  CHECK(state.step == 1);
  CHECK(state.moments[0].m[1] == 0.0);
  CHECK(state.moments[0].v[1] == 0.0);

  adam_step(state, blocks, cfg);
  const double m = 0.9 * 0.05 + 0.1 * 0.5;
  const double v = 0.999 * 2.5e-4 + 0.001 * 0.25;
  const double mhat = m / (1 - 0.81);
  const double vhat = v / (1 - 0.999 * 0.999);
  CHECK(x[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8) - 0.1 * mhat / (std::sqrt(vhat) + 1e-8)).epsilon(1e-14));
}

TEST_CASE("masked training keeps every omega entry at c after every step") {
  Fixture f;
  TrainConfig cfg = small_config(TrainMode::kMcrfTrain);
  cfg.mask_value = -1234.5;
  const MaskSpec spec = make_mask_spec(f.tagset, cfg.mask_value);
  std::size_t steps = 0;
  bool intact = true;
  const auto result = train(f.train_set, f.dev_set, f.tagset, cfg, std::nullopt,
                            [&](std::size_t, const TransitionMatrix& tr) {
                              ++steps;
                              for (auto [i, j] : spec.rules.omega()) {
                                if (tr.a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) != cfg.mask_value) intact = false;
                              }
                              for (int j : spec.rules.illegal_starts()) {
                                if (tr.start[static_cast<std::size_t>(j)] != cfg.mask_value) intact = false;
                              }
                            });
  CHECK(intact);
  CHECK(steps == 2 * 13);
  CHECK(result.model.mode == TrainMode::kMcrfTrain);
  CHECK(apply_mask(result.model.transitions, spec) == result.model.transitions);
  CHECK(result.report.records.back().illegal_pct == 0.0);
}

TEST_CASE("decode-only masking trains exactly like the plain CRF") {
  Fixture f;
  const auto crf = train(f.train_set, f.dev_set, f.tagset, small_config(TrainMode::kCrf));
  const auto dec = train(f.train_set, f.dev_set, f.tagset, small_config(TrainMode::kMcrfDecode));
  CHECK(crf.model.transitions == dec.model.transitions);
  CHECK(crf.model.encoder == dec.model.encoder);
  REQUIRE(crf.report.records.size() == dec.report.records.size());
  for (std::size_t i = 0; i < crf.report.records.size(); ++i) {
    CHECK(crf.report.records[i].train_nll == dec.report.records[i].train_nll);
    CHECK(crf.report.records[i].dev_nll == dec.report.records[i].dev_nll);
  }
}

TEST_CASE("training is deterministic for a seed") {
  Fixture f;
  const auto a = train(f.train_set, f.dev_set, f.tagset, small_config(TrainMode::kMcrfTrain));
  const auto b = train(f.train_set, f.dev_set, f.tagset, small_config(TrainMode::kMcrfTrain));
  CHECK(a.report.to_table() == b.report.to_table());
  CHECK(a.model == b.model);
  TrainConfig other = small_config(TrainMode::kMcrfTrain);
  other.seed = 2;
  CHECK_FALSE(train(f.train_set, f.dev_set, f.tagset, other).model == a.model);
}

TEST_CASE("report table layout and iteration cap") {
  Fixture f;
  TrainConfig cfg = small_config(TrainMode::kCrf);
  cfg.max_iterations = 12;
  const auto r = train(f.train_set, f.dev_set, f.tagset, cfg);
  REQUIRE(r.report.records.size() == 3);
  CHECK(r.report.records[0].iteration == 5);
  CHECK(r.report.records[2].iteration == 12);
  const std::string table = r.report.to_table();
  CHECK(table.rfind("iteration\ttrain_nll\tdev_nll\tdev_f1\tillegal_pct\n", 0) == 0);
  CHECK(table.find("\n12\t") != std::string::npos);
}

TEST_CASE("frozen transitions give a per-token tagger") {
  Fixture f;
  TrainConfig cfg = small_config(TrainMode::kCrf);
  cfg.freeze_transitions = true;
  const auto r = train(f.train_set, f.dev_set, f.tagset, cfg);
  CHECK(r.model.transitions == TransitionMatrix::zeros(f.tagset.size()));
}

TEST_CASE("masked objective never exceeds the full objective on the same weights") {
  Fixture f;
  const auto r = train(f.train_set, f.dev_set, f.tagset, small_config(TrainMode::kCrf));
  const MaskSpec spec = make_mask_spec(f.tagset);
  std::vector<EmissionSequence> em;
  for (const auto& s : f.dev_set) em.push_back(model_emissions(r.model, s.tokens));
  std::vector<SampleRef> batch;
  for (std::size_t n = 0; n < em.size(); ++n) batch.push_back({em[n], f.dev_set[n].gold});
  CHECK(masked_nll(batch, r.model.transitions, spec) <= nll_loss(batch, r.model.transitions));
}

TEST_CASE("evaluate_model reproduces the final report row") {
  Fixture f;
  const auto r = train(f.train_set, f.dev_set, f.tagset, small_config(TrainMode::kMcrfTrain));
  const EvalSummary s = evaluate_model(r.model, f.dev_set);
  CHECK(s.f1 == r.report.records.back().dev_f1);
  CHECK(s.nll == doctest::Approx(r.report.records.back().dev_nll).epsilon(1e-12));
}

TEST_CASE("invalid configurations and data are rejected") {
  Fixture f;
  TrainConfig cfg = small_config(TrainMode::kMcrfTrain);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(train(f.train_set, f.dev_set, f.tagset, cfg), ConfigError);
  cfg = small_config(TrainMode::kMcrfTrain);
  cfg.mask_value = 1.0;
  CHECK_THROWS_AS(train(f.train_set, f.dev_set, f.tagset, cfg), ConfigError);
  Corpus bad = f.train_set;
  bad[3].gold[0] = *f.tagset.find("I-LOC");
  CHECK_THROWS_AS(train(bad, f.dev_set, f.tagset, small_config(TrainMode::kMcrfTrain)), DataError);
  CHECK_THROWS_AS(train(Corpus{}, f.dev_set, f.tagset, small_config(TrainMode::kCrf)), DataError);
}

TEST_CASE("external emissions replace the encoder") {
  Fixture f;
  std::vector<EmissionSequence> tr;
  std::vector<EmissionSequence> dv;
  for (const auto& s : f.train_set) tr.push_back(EmissionSequence(s.tokens.size(), f.tagset.size()));
  for (const auto& s : f.dev_set) dv.push_back(EmissionSequence(s.tokens.size(), f.tagset.size()));
  for (std::size_t n = 0; n < f.train_set.size(); ++n) {
    for (std::size_t t = 0; t < f.train_set[n].gold.size(); ++t) tr[n](t, static_cast<std::size_t>(f.train_set[n].gold[t])) = 2.0;
  }
  const auto r = train(f.train_set, f.dev_set, f.tagset, small_config(TrainMode::kMcrfTrain), ExternalEmissions{tr, dv});
  CHECK(r.model.external_emissions);
  CHECK(r.report.records.back().train_nll < r.report.records.front().train_nll);
}
