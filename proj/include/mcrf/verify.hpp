#pragma once

// Numerical self-checks: dynamic programs against enumeration, analytic
// gradients against finite differences, and the behaviour of the masked
// objective as the mask constant decreases.

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mcrf/crf.hpp"
#include "mcrf/encoder.hpp"
#include "mcrf/masking.hpp"

namespace mcrf {

struct CheckResult {
  std::string name;
  double value = 0.0;      // measured error or count
  double tolerance = 0.0;  // pass when value <= tolerance (and any extra condition holds)
  bool passed = false;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::size_t instances = 200;           // enumeration comparisons
  std::size_t max_length = 6;
  std::size_t max_tags = 5;
  std::size_t gradient_instances = 50;
  std::size_t gap_instances = 20;
  std::size_t constrained_trials = 10000;
};

std::vector<CheckResult> run_verification(const VerifyOptions& options);
std::string format_checks(const std::vector<CheckResult>& checks);

// Random helpers shared with the test suites.
struct RandomInstance {
  EmissionSequence emissions;
  TransitionMatrix transitions;
  Path gold;
};

// Entries uniform in [-scale, scale]; gold uniform over all paths, or over
// legal paths when `rules` is given.
RandomInstance random_instance(std::mt19937_64& rng, std::size_t length, std::size_t num_tags, double scale,
                               const TransitionRuleSet* rules = nullptr);
Path random_legal_path(std::mt19937_64& rng, std::size_t length, const TransitionRuleSet& rules);

// |a - b| / max(|a|, |b|, 1e-4); the floor keeps rounding noise on
// near-zero gradient entries from dominating.
double relative_error(double a, double b);

// Central difference of `loss` with respect to every entry of `params`
// (perturbed in place and restored).
std::vector<double> central_difference(const std::function<double()>& loss, std::span<double> params, double h);

// Largest relative error between loss_and_gradients and central differences
// (h = 1e-5) over emissions, transitions and start scores. With `mask`, the
// loss is evaluated on the masked matrix, as in masked training.
double crf_gradient_error(std::span<const RandomInstance> batch, const MaskSpec* mask = nullptr);

// Same for the composite encoder -> CRF loss, over embeddings, projection and bias.
double encoder_gradient_error(const std::vector<std::vector<int>>& tokens, const std::vector<Path>& gold,
                              const EncoderWeights& weights, const TransitionMatrix& trans);

}  // namespace mcrf
