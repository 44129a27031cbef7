#pragma once

#include <span>

#include "mcrf/crf.hpp"
#include "mcrf/schemes.hpp"

namespace mcrf {

inline constexpr double kDefaultMaskValue = -1e4;

// Which transitions to mask and with what constant.
struct MaskSpec {
  TransitionRuleSet rules;
  double c = kDefaultMaskValue;
  bool enforce_start = true;

  // Rules defining the legal path set P/I under this spec: omega, plus the
  // illegal starts only when enforce_start is set.
  TransitionRuleSet effective_rules() const { return enforce_start ? rules : rules.without_starts(); }
  // True if entry (i, j) of the transition matrix is held at c.
  bool masks(int from, int to) const { return rules.forbids(from, to); }
  bool masks_start(int tag) const { return enforce_start && rules.forbids_start(tag); }
};

MaskSpec make_mask_spec(const Tagset& tagset, double c = kDefaultMaskValue, bool enforce_start = true);

// Copy of `trans` with every omega entry (and, if enforced, every illegal start) set to c.
TransitionMatrix apply_mask(const TransitionMatrix& trans, const MaskSpec& spec);
// Restores masked entries to exactly c after an optimizer step.
void reapply_mask_in_place(TransitionMatrix& trans, const MaskSpec& spec);

// Most negative score any legal path can contribute, relaxed into
//   -(T * max|l| + T * max|a_legal| + max|start_legal| + 1000).
// A mask constant at or below this cannot be outscored by a legal path.
double mask_guard_threshold(const EmissionSequence& emissions, const TransitionMatrix& trans,
                            const MaskSpec& spec);
// Throws ConfigError when spec.c is above the guard threshold.
void check_mask_guard(const EmissionSequence& emissions, const TransitionMatrix& trans,
                      const MaskSpec& spec);

// Viterbi over the masked matrix: the argmax over legal paths only.
Path constrained_viterbi(const EmissionSequence& emissions, const TransitionMatrix& trans,
                         const MaskSpec& spec);

// Throws DataError naming the sentence and position of the first illegal gold path.
void validate_gold(std::span<const SampleRef> batch, const MaskSpec& spec);

// CRF loss on the masked matrix; approaches the legal-path-normalized loss as c -> -inf.
double masked_nll(std::span<const SampleRef> batch, const TransitionMatrix& trans, const MaskSpec& spec);
// Loss normalized over legal paths only, by enumeration.
double restricted_nll_exact(std::span<const SampleRef> batch, const TransitionMatrix& trans,
                            const MaskSpec& spec);

struct MaskGap {
  double loss_gap = 0.0;
  double grad_gap = 0.0;
};

// Distance between the CRF objective on the masked matrix and the
// legal-path-normalized objective on the unmasked one, for loss and for the
// gradients w.r.t. emissions, legal transitions and legal start scores. Both
// sides are evaluated by exhaustive enumeration so that the result isolates
// the effect of the mask constant.
MaskGap mask_gap(std::span<const SampleRef> batch, const TransitionMatrix& trans,
                         const MaskSpec& spec);

}  // namespace mcrf
