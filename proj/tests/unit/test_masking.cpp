#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mcrf/error.hpp"
#include "mcrf/masking.hpp"
#include "mcrf/verify.hpp"
#include "oracles.hpp"

using namespace mcrf;

namespace {

const Tagset& bio3() {
  static const Tagset ts = build_tagset(Scheme::kBio, {"LOC", "ORG", "PER"});
  return ts;
}

}  // namespace

TEST_CASE("apply_mask writes c to omega and illegal starts only") {
  const MaskSpec spec = make_mask_spec(bio3(), -50.0);
  std::mt19937_64 rng(1);
  const auto inst = random_instance(rng, 3, bio3().size(), 2.0);
  const TransitionMatrix m = apply_mask(inst.transitions, spec);
  std::size_t changed = 0;
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      const bool illegal = !oracle::legal_step(bio3().tag(i), bio3().tag(j), false);
      const double v = m.a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (illegal) {
        CHECK(v == -50.0);
        ++changed;
      } else {
        CHECK(v == inst.transitions.a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      }
    }
    const bool bad_start = !oracle::legal_step("", bio3().tag(i), false);
    CHECK(m.start[static_cast<std::size_t>(i)] == (bad_start ? -50.0 : inst.transitions.start[static_cast<std::size_t>(i)]));
  }
  CHECK(changed == 15);

  const MaskSpec no_start = make_mask_spec(bio3(), -50.0, false);
  CHECK(apply_mask(inst.transitions, no_start).start == inst.transitions.start);
}

TEST_CASE("mask is idempotent and leaves legal path scores unchanged") {
  const MaskSpec spec = make_mask_spec(bio3());
  std::mt19937_64 rng(2);
  for (int k = 0; k < 100; ++k) {
    const auto inst = random_instance(rng, 1 + rng() % 8, bio3().size(), 3.0, &spec.rules);
    const TransitionMatrix once = apply_mask(inst.transitions, spec);
    CHECK(apply_mask(once, spec) == once);
    CHECK(path_score(inst.emissions, once, inst.gold) == path_score(inst.emissions, inst.transitions, inst.gold));
    TransitionMatrix drifted = once;
    drifted.a(0, 2) += 0.25;
    reapply_mask_in_place(drifted, spec);
    CHECK(drifted == once);
  }
}

TEST_CASE("constrained viterbi is the legal argmax") {
  const Tagset ts = build_tagset(Scheme::kBio, {"X", "Y"});
  const MaskSpec spec = make_mask_spec(ts);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 200; ++k) {
    const auto inst = random_instance(rng, 1 + rng() % 5, ts.size(), 4.0);
    const Path p = constrained_viterbi(inst.emissions, inst.transitions, spec);
    CHECK(oracle::legal_path(ts.tags(), p, false));
    const auto [ref, top] = oracle::best(inst.emissions, inst.transitions, &ts.tags(), false);
    CHECK(std::abs(path_score(inst.emissions, inst.transitions, p) - top) <= 1e-12);
    CHECK(p == ref);
  }
}

TEST_CASE("constrained viterbi under BIOES") {
  const Tagset ts = build_tagset(Scheme::kBioes, {"X"});
  const MaskSpec spec = make_mask_spec(ts);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 100; ++k) {
    const auto inst = random_instance(rng, 1 + rng() % 5, ts.size(), 4.0);
    const Path p = constrained_viterbi(inst.emissions, inst.transitions, spec);
    const auto [ref, top] = oracle::best(inst.emissions, inst.transitions, &ts.tags(), true);
    CHECK(p == ref);
  }
}

TEST_CASE("mask guard rejects a weak constant") {
  const MaskSpec weak = make_mask_spec(bio3(), -5.0);
  EmissionSequence em(4, 7, 3.0);
  const TransitionMatrix tr = TransitionMatrix::zeros(7);
  CHECK(mask_guard_threshold(em, tr, weak) == doctest::Approx(-(4 * 3.0 + 1000.0)));
  CHECK_THROWS_AS(check_mask_guard(em, tr, weak), ConfigError);
  CHECK_THROWS_AS(constrained_viterbi(em, tr, weak), ConfigError);
  CHECK_NOTHROW(check_mask_guard(em, tr, make_mask_spec(bio3())));
}

TEST_CASE("illegal gold is rejected with its position") {
  const MaskSpec spec = make_mask_spec(bio3());
  EmissionSequence em(3, 7);
  const std::vector<int> gold = {0, 4, 0};
  const std::vector<SampleRef> batch = {{em, gold}};
  try {
    validate_gold(batch, spec);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("sentence 0") != std::string::npos);
    CHECK(msg.find("position 1") != std::string::npos);
  }
}

TEST_CASE("restricted loss bounds the full loss and the masked loss approaches it") {
  const Tagset ts = build_tagset(Scheme::kBio, {"X", "Y"});
  const MaskSpec spec = make_mask_spec(ts);
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const auto inst = random_instance(rng, 1 + rng() % 5, ts.size(), 2.0, &spec.rules);
    const std::vector<SampleRef> batch = {{inst.emissions, inst.gold}};
    const double restricted = restricted_nll_exact(batch, inst.transitions, spec);
    const double full = nll_loss(batch, inst.transitions);
    const double ref = oracle::log_z_legal(inst.emissions, inst.transitions, ts.tags(), false) -
                       oracle::score(inst.emissions, inst.transitions, inst.gold);
    CHECK(restricted == doctest::Approx(ref).epsilon(1e-12));
    CHECK(restricted <= full);
    CHECK(std::abs(masked_nll(batch, inst.transitions, spec) - restricted) <= 1e-8);
  }
}

TEST_CASE("gap to the restricted objective vanishes with an empty rule set") {
  const Tagset ts = build_tagset(Scheme::kBio, {"X"});
  std::mt19937_64 rng(6);
  const auto inst = random_instance(rng, 4, ts.size(), 1.0, nullptr);
  const std::vector<SampleRef> batch = {{inst.emissions, inst.gold}};
  const MaskGap g = mask_gap(batch, inst.transitions, MaskSpec{TransitionRuleSet::none(ts.size()), -5.0, true});
  CHECK(g.loss_gap == 0.0);
  CHECK(g.grad_gap == 0.0);
}

TEST_CASE("gap shrinks as the mask deepens") {
  const Tagset ts = build_tagset(Scheme::kBio, {"X", "Y"});
  const auto rules = illegal_transition_set(ts);
  std::mt19937_64 rng(7);
  const auto inst = random_instance(rng, 4, ts.size(), 0.5, &rules);
  const std::vector<SampleRef> batch = {{inst.emissions, inst.gold}};
  double prev = INFINITY;
  for (double c : {-5.0, -10.0, -20.0, -30.0}) {
    const MaskGap g = mask_gap(batch, inst.transitions, MaskSpec{rules, c, true});
    CHECK(g.loss_gap < prev);
    prev = g.loss_gap;
  }
  CHECK(prev <= 1e-8);
}
