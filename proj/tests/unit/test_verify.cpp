#include <doctest.h>

#include <random>

#include "mcrf/schemes.hpp"
#include "mcrf/verify.hpp"
#include "oracles.hpp"

using namespace mcrf;

TEST_CASE("the default self-check suite passes") {
  const auto checks = run_verification(VerifyOptions{});
  CHECK(checks.size() >= 15);
  for (const auto& c : checks) {
    INFO(c.name << " value=" << c.value << " " << c.detail);
    CHECK(c.passed);
  }
  CHECK(format_checks(checks).find("FAIL") == std::string::npos);
}

TEST_CASE("other seeds pass as well") {
  for (std::uint64_t seed : {2, 3}) {
    VerifyOptions opts;
    opts.seed = seed;
    opts.constrained_trials = 1000;
    for (const auto& c : run_verification(opts)) {
      INFO(c.name);
      CHECK(c.passed);
    }
  }
}

TEST_CASE("random legal paths are legal") {
  const Tagset ts = build_tagset(Scheme::kBioes, {"A", "B"});
  const auto rules = illegal_transition_set(ts);
  std::mt19937_64 rng(1);
  for (int k = 0; k < 500; ++k) CHECK(oracle::legal_path(ts.tags(), random_legal_path(rng, 1 + rng() % 9, rules), true));
}

TEST_CASE("relative error floor") {
  CHECK(relative_error(1e-9, 2e-9) == doctest::Approx(1e-5));
  CHECK(relative_error(2.0, 1.0) == doctest::Approx(0.5));
}
