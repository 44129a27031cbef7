#pragma once

#include <string>
#include <vector>

#include "mcrf/conll.hpp"
#include "mcrf/crf.hpp"
#include "mcrf/schemes.hpp"
#include "mcrf/training.hpp"

namespace mcrf {

// Hand-built emissions on which plain Viterbi emits an illegal path while
// constrained Viterbi recovers a legal one. Both expectations are checked
// against the enumeration oracles when the fixture is built.
struct AdversarialInstance {
  EmissionSequence emissions;
  TransitionMatrix transitions;
  Path expected_illegal;  // unconstrained argmax
  Path expected_legal;    // argmax over legal paths
};

// Five tokens, O everywhere except a strong I-X in the middle, X being the
// first entity type (a stand-alone word only ever seen inside a chunk).
AdversarialInstance build_adversarial_instance(const Tagset& tagset);

// Three-token chunk tagged (B-Y, I-X, I-X) by the emissions, X and Y being the
// first two entity types. The legal argmax is a single consistent chunk.
AdversarialInstance build_mixed_type_instance(const Tagset& tagset);

struct SystemRow {
  std::string name;
  double f1 = 0.0;
  double illegal_pct = 0.0;  // before post-processing
};

// Trains a tagger (transitions frozen at zero), a CRF and an MCRF on the same
// data and seed, and scores the six systems
//   tagger-retain, tagger-discard, CRF-retain, CRF-discard, MCRF-decoding, MCRF-training
// on `test_set`.
std::vector<SystemRow> compare_systems(const Corpus& train_set, const Corpus& dev_set, const Corpus& test_set,
                                       const Tagset& tagset, const TrainConfig& config);

std::string format_comparison(const std::vector<SystemRow>& rows);

}  // namespace mcrf
