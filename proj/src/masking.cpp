#include "mcrf/masking.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mcrf/error.hpp"

namespace mcrf {

MaskSpec make_mask_spec(const Tagset& tagset, double c, bool enforce_start) {
  return {illegal_transition_set(tagset), c, enforce_start};
}

TransitionMatrix apply_mask(const TransitionMatrix& trans, const MaskSpec& spec) {
  TransitionMatrix out = trans;
  reapply_mask_in_place(out, spec);
  return out;
}

void reapply_mask_in_place(TransitionMatrix& trans, const MaskSpec& spec) {
  MCRF_EXPECT(spec.rules.num_tags() == trans.num_tags() || spec.rules.omega().empty(),
              "mask rules sized for a different tagset");
  for (auto [i, j] : spec.rules.omega()) trans.a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = spec.c;
  if (spec.enforce_start) {
    for (int j : spec.rules.illegal_starts()) trans.start[static_cast<std::size_t>(j)] = spec.c;
  }
}

double mask_guard_threshold(const EmissionSequence& emissions, const TransitionMatrix& trans,
                            const MaskSpec& spec) {
  const std::size_t d = trans.num_tags();
  const double T = static_cast<double>(emissions.rows());
  double max_l = 0.0;
  for (double v : emissions.values()) max_l = std::max(max_l, std::abs(v));
  double max_a = 0.0;
  double max_start = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (!spec.masks_start(static_cast<int>(i))) max_start = std::max(max_start, std::abs(trans.start[i]));
    for (std::size_t j = 0; j < d; ++j) {
      if (!spec.masks(static_cast<int>(i), static_cast<int>(j))) max_a = std::max(max_a, std::abs(trans.a(i, j)));
    }
  }
  return -(T * max_l + T * max_a + max_start + 1e3);
}

void check_mask_guard(const EmissionSequence& emissions, const TransitionMatrix& trans,
                      const MaskSpec& spec) {
  const double threshold = mask_guard_threshold(emissions, trans, spec);
  if (spec.c > threshold) {
    std::ostringstream msg;
    msg << "mask constant " << spec.c << " is too weak for score magnitudes in this sentence; use c <= "
        << std::floor(threshold);
    throw ConfigError(msg.str());
  }
}

Path constrained_viterbi(const EmissionSequence& emissions, const TransitionMatrix& trans,
                         const MaskSpec& spec) {
  const TransitionMatrix masked = apply_mask(trans, spec);
  if (!spec.rules.omega().empty() || (spec.enforce_start && !spec.rules.illegal_starts().empty())) {
    check_mask_guard(emissions, masked, spec);
  }
  return viterbi(emissions, masked);
}

void validate_gold(std::span<const SampleRef> batch, const MaskSpec& spec) {
  const TransitionRuleSet rules = spec.effective_rules();
  for (std::size_t n = 0; n < batch.size(); ++n) {
    if (auto v = find_violation(rules, batch[n].gold)) {
      std::ostringstream msg;
      msg << "illegal gold path in sentence " << n << " at position " << v->position << " (";
      if (v->from < 0) {
        msg << "illegal start tag " << v->to;
      } else {
        msg << "transition " << v->from << " -> " << v->to;
      }
      msg << ")";
      throw DataError(msg.str());
    }
  }
}

double masked_nll(std::span<const SampleRef> batch, const TransitionMatrix& trans, const MaskSpec& spec) {
  validate_gold(batch, spec);
  return nll_loss(batch, apply_mask(trans, spec));
}

double restricted_nll_exact(std::span<const SampleRef> batch, const TransitionMatrix& trans,
                            const MaskSpec& spec) {
  validate_gold(batch, spec);
  return brute_force_loss_and_gradients(batch, trans, true, spec.effective_rules()).loss;
}

MaskGap mask_gap(std::span<const SampleRef> batch, const TransitionMatrix& trans,
                         const MaskSpec& spec) {
  validate_gold(batch, spec);
  const TransitionRuleSet rules = spec.effective_rules();
  const TransitionMatrix masked = apply_mask(trans, spec);
  const LossAndGradients full = brute_force_loss_and_gradients(batch, masked, false, rules);
  const LossAndGradients restricted = brute_force_loss_and_gradients(batch, trans, true, rules);

  MaskGap gap;
  gap.loss_gap = std::abs(full.loss - restricted.loss);
  auto track = [&gap](double x, double y) { gap.grad_gap = std::max(gap.grad_gap, std::abs(x - y)); };
  for (std::size_t n = 0; n < batch.size(); ++n) {
    const auto a = full.grads.d_logits[n].values();
    const auto b = restricted.grads.d_logits[n].values();
    for (std::size_t k = 0; k < a.size(); ++k) track(a[k], b[k]);
  }
  const std::size_t d = trans.num_tags();
  for (std::size_t i = 0; i < d; ++i) {
    if (!spec.masks_start(static_cast<int>(i))) track(full.grads.d_start[i], restricted.grads.d_start[i]);
    for (std::size_t j = 0; j < d; ++j) {
      if (!spec.masks(static_cast<int>(i), static_cast<int>(j))) track(full.grads.d_a(i, j), restricted.grads.d_a(i, j));
    }
  }
  return gap;
}

}  // namespace mcrf
