#include "mcrf/diagnostics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "mcrf/error.hpp"
#include "mcrf/eval.hpp"
#include "mcrf/masking.hpp"
#include "mcrf/postproc.hpp"
#include "mcrf/text.hpp"

namespace mcrf {

namespace {

// Confirms the fixture against the decoders and, when small enough, the enumeration oracles.
void verify_fixture(const AdversarialInstance& inst, const Tagset& tagset) {
  const MaskSpec spec = make_mask_spec(tagset);
  const TransitionRuleSet rules = spec.effective_rules();
  if (viterbi(inst.emissions, inst.transitions) != inst.expected_illegal ||
      constrained_viterbi(inst.emissions, inst.transitions, spec) != inst.expected_legal) {
    throw ContractViolation("adversarial fixture does not separate the decoders");
  }
  if (rules.is_legal(inst.expected_illegal) || !rules.is_legal(inst.expected_legal)) {
    throw ContractViolation("adversarial fixture expectations have the wrong legality");
  }
  const double paths = std::pow(static_cast<double>(tagset.size()), static_cast<double>(inst.emissions.rows()));
  if (paths <= kMaxEnumeratedPaths) {
    const auto free_best = brute_force_best(inst.emissions, inst.transitions, false, rules);
    const auto legal_best = brute_force_best(inst.emissions, inst.transitions, true, rules);
    if (free_best.path != inst.expected_illegal || legal_best.path != inst.expected_legal) {
      throw ContractViolation("adversarial fixture disagrees with the enumeration oracle");
    }
  }
}

}  // namespace

AdversarialInstance build_adversarial_instance(const Tagset& tagset) {
  if (tagset.scheme() != Scheme::kBio) throw ConfigError("the adversarial fixture needs a BIO tagset");
  const std::size_t d = tagset.size();
  const auto b = static_cast<std::size_t>(tagset.index_of(Prefix::kB, 0));
  const auto i = static_cast<std::size_t>(tagset.index_of(Prefix::kI, 0));

  AdversarialInstance inst;
  inst.emissions = EmissionSequence(5, d);
  for (std::size_t t : {0, 1, 3, 4}) inst.emissions(t, 0) = 10.0;
  inst.emissions(2, i) = 10.0;
  inst.emissions(2, b) = 6.0;
  inst.emissions(2, 0) = 3.0;
  inst.transitions = TransitionMatrix::zeros(d);
  inst.expected_illegal = {0, 0, static_cast<int>(i), 0, 0};
  inst.expected_legal = {0, 0, static_cast<int>(b), 0, 0};
  verify_fixture(inst, tagset);
  return inst;
}

AdversarialInstance build_mixed_type_instance(const Tagset& tagset) {
  if (tagset.scheme() != Scheme::kBio) throw ConfigError("the mixed-type fixture needs a BIO tagset");
  if (tagset.entity_types().size() < 2) throw ConfigError("the mixed-type fixture needs two entity types");
  const std::size_t d = tagset.size();
  const auto bx = static_cast<std::size_t>(tagset.index_of(Prefix::kB, 0));
  const auto ix = static_cast<std::size_t>(tagset.index_of(Prefix::kI, 0));
  const auto by = static_cast<std::size_t>(tagset.index_of(Prefix::kB, 1));
  const auto iy = static_cast<std::size_t>(tagset.index_of(Prefix::kI, 1));

  AdversarialInstance inst;
  inst.emissions = EmissionSequence(5, d);
  inst.emissions(0, 0) = 10.0;
  inst.emissions(1, by) = 8.0;
  inst.emissions(1, bx) = 5.5;
  for (std::size_t t : {2, 3}) {
    inst.emissions(t, ix) = 8.0;
    inst.emissions(t, iy) = 7.0;
  }
  inst.emissions(4, 0) = 10.0;
  inst.transitions = TransitionMatrix::zeros(d);
  inst.expected_illegal = {0, static_cast<int>(by), static_cast<int>(ix), static_cast<int>(ix), 0};
  inst.expected_legal = {0, static_cast<int>(by), static_cast<int>(iy), static_cast<int>(iy), 0};
  verify_fixture(inst, tagset);
  return inst;
}

namespace {

struct Scored {
  double f1_retain = 0.0;
  double f1_discard = 0.0;
  double illegal_pct = 0.0;
};

Scored score_model(const ModelState& model, const Corpus& corpus, const Tagset& tagset) {
  std::vector<std::vector<Segment>> gold;
  std::vector<std::vector<Segment>> raw;
  std::vector<std::vector<Segment>> discarded;
  for (const auto& s : corpus) {
    const Path p = decode(model, model_emissions(model, s.tokens));
    gold.push_back(extract_segments(s.gold, tagset));
    raw.push_back(extract_segments(p, tagset));
    discarded.push_back(extract_segments(repair_tags(p, tagset, Strategy::kDiscard), tagset));
  }
  return {chunk_prf(gold, raw).f1, chunk_prf(gold, discarded).f1,
          100.0 * illegal_stats(gold, raw).ratio_illegal_over_total};
}

}  // namespace

std::vector<SystemRow> compare_systems(const Corpus& train_set, const Corpus& dev_set, const Corpus& test_set,
                                       const Tagset& tagset, const TrainConfig& config) {
  TrainConfig tagger_cfg = config;
  tagger_cfg.mode = TrainMode::kCrf;
  tagger_cfg.freeze_transitions = true;
  TrainConfig crf_cfg = config;
  crf_cfg.mode = TrainMode::kCrf;
  crf_cfg.freeze_transitions = false;
  TrainConfig mcrf_cfg = crf_cfg;
  mcrf_cfg.mode = TrainMode::kMcrfTrain;

  const ModelState tagger = train(train_set, dev_set, tagset, tagger_cfg).model;
  const ModelState crf = train(train_set, dev_set, tagset, crf_cfg).model;
  ModelState mcrf_decode = crf;
  mcrf_decode.mode = TrainMode::kMcrfDecode;
  const ModelState mcrf = train(train_set, dev_set, tagset, mcrf_cfg).model;

  const Scored t = score_model(tagger, test_set, tagset);
  const Scored c = score_model(crf, test_set, tagset);
  const Scored md = score_model(mcrf_decode, test_set, tagset);
  const Scored mt = score_model(mcrf, test_set, tagset);
  return {
      {"tagger-retain", t.f1_retain, t.illegal_pct},
      {"tagger-discard", t.f1_discard, t.illegal_pct},
      {"CRF-retain", c.f1_retain, c.illegal_pct},
      {"CRF-discard", c.f1_discard, c.illegal_pct},
      {"MCRF-decoding", md.f1_retain, md.illegal_pct},
      {"MCRF-training", mt.f1_retain, mt.illegal_pct},
  };
}

std::string format_comparison(const std::vector<SystemRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(16) << "system" << std::right << std::setw(8) << "F1" << std::setw(10) << "illegal"
      << "\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(16) << r.name << std::right << std::setw(8) << format_fixed(100.0 * r.f1, 1)
        << std::setw(10) << format_percent(r.illegal_pct / 100.0) << "\n";
  }
  return out.str();
}

}  // namespace mcrf
