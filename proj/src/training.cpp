#include "mcrf/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "mcrf/error.hpp"
#include "mcrf/eval.hpp"
#include "mcrf/text.hpp"

namespace mcrf {

void adam_step(OptimizerState& state, std::span<ParamBlock> blocks, const AdamConfig& cfg) {
  if (state.moments.empty()) {
    for (const auto& b : blocks) state.moments.push_back({std::vector<double>(b.values.size(), 0.0),
                                                          std::vector<double>(b.values.size(), 0.0)});
  }
  MCRF_EXPECT(state.moments.size() == blocks.size(), "optimizer state built for a different parameter set");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(cfg.beta1, t);
  const double correction2 = 1.0 - std::pow(cfg.beta2, t);

  for (std::size_t b = 0; b < blocks.size(); ++b) {
    auto& block = blocks[b];
    auto& mom = state.moments[b];
    MCRF_EXPECT(block.grads.size() == block.values.size() && mom.m.size() == block.values.size(),
                "parameter, gradient and moment sizes differ");
    MCRF_EXPECT(block.frozen.empty() || block.frozen.size() == block.values.size(), "frozen mask size mismatch");
    for (std::size_t i = 0; i < block.values.size(); ++i) {
      if (!block.frozen.empty() && block.frozen[i]) continue;
      const double g = block.grads[i];
      mom.m[i] = cfg.beta1 * mom.m[i] + (1.0 - cfg.beta1) * g;
      mom.v[i] = cfg.beta2 * mom.v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = mom.m[i] / correction1;
      const double v_hat = mom.v[i] / correction2;
      block.values[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
  }
}

std::string TrainReport::to_table() const {
  std::ostringstream out;
  out << "iteration\ttrain_nll\tdev_nll\tdev_f1\tillegal_pct\n";
  for (const auto& r : records) {
    out << r.iteration << '\t' << format_fixed(r.train_nll, 6) << '\t' << format_fixed(r.dev_nll, 6) << '\t'
        << format_fixed(r.dev_f1, 4) << '\t' << format_fixed(r.illegal_pct, 2) << '\n';
  }
  return out.str();
}

Vocabulary build_vocabulary(std::span<const LabeledSentence> corpus) {
  Vocabulary v;
  for (const auto& s : corpus) {
    for (const auto& tok : s.tokens) v.add(tok);
  }
  return v;
}

Initialization initialize(const TrainConfig& cfg, const Tagset& tagset, const Vocabulary& vocabulary,
                          std::uint64_t seed) {
  MCRF_EXPECT(cfg.batch_size >= 1, "batch size must be at least 1");
  MCRF_EXPECT(cfg.adam.learning_rate >= 0.0, "learning rate must be non-negative");
  std::mt19937_64 rng(seed);
  Initialization init;
  init.encoder = EncoderWeights::random(vocabulary.size(), cfg.embedding_width, tagset.size(), rng, cfg.init_scale);
  init.transitions = TransitionMatrix::zeros(tagset.size());
  if (cfg.mode == TrainMode::kMcrfTrain) {
    reapply_mask_in_place(init.transitions, make_mask_spec(tagset, cfg.mask_value, cfg.enforce_start));
  }
  return init;
}

namespace {

struct Encoded {
  std::vector<std::vector<int>> tokens;
};

Encoded encode_tokens(const Corpus& corpus, const Vocabulary& vocab) {
  Encoded e;
  e.tokens.reserve(corpus.size());
  for (const auto& s : corpus) e.tokens.push_back(vocab.lookup(s.tokens));
  return e;
}

void validate_corpus(const Corpus& corpus, const Tagset& tagset, const char* name) {
  const TransitionRuleSet rules = illegal_transition_set(tagset);
  for (std::size_t n = 0; n < corpus.size(); ++n) {
    const auto& s = corpus[n];
    if (s.tokens.empty() || s.tokens.size() != s.gold.size()) {
      throw DataError(std::string(name) + " sentence " + std::to_string(n) + " is empty or misaligned");
    }
    if (auto v = find_violation(rules, s.gold)) {
      throw DataError(std::string(name) + " sentence " + std::to_string(n) + ", position " +
                      std::to_string(v->position) + ": " + describe_violation(tagset, *v));
    }
  }
}

struct DevStats {
  double nll = 0.0;
  double f1 = 0.0;
  double illegal_pct = 0.0;
};

DevStats evaluate(const Corpus& corpus, const std::vector<EmissionSequence>& emissions,
                  const TransitionMatrix& trans, const Tagset& tagset, bool constrained, const MaskSpec& spec) {
  DevStats out;
  if (corpus.empty()) return out;
  std::vector<std::vector<Segment>> gold;
  std::vector<std::vector<Segment>> pred;
  gold.reserve(corpus.size());
  pred.reserve(corpus.size());
  double nll = 0.0;
  for (std::size_t n = 0; n < corpus.size(); ++n) {
    const auto& em = emissions[n];
    nll += log_partition(em, trans) - path_score(em, trans, corpus[n].gold);
    const Path p = constrained ? constrained_viterbi(em, trans, spec) : viterbi(em, trans);
    gold.push_back(extract_segments(corpus[n].gold, tagset));
    pred.push_back(extract_segments(p, tagset));
  }
  out.nll = nll / static_cast<double>(corpus.size());
  out.f1 = chunk_prf(gold, pred).f1;
  out.illegal_pct = 100.0 * illegal_stats(gold, pred).ratio_illegal_over_total;
  return out;
}

}  // namespace

TrainResult train(const Corpus& train_set, const Corpus& dev_set, const Tagset& tagset, const TrainConfig& cfg,
                  std::optional<ExternalEmissions> external, const StepObserver& observer) {
  if (cfg.batch_size < 1) throw ConfigError("batch size must be at least 1");
  if (!(cfg.adam.learning_rate >= 0.0)) throw ConfigError("learning rate must be non-negative");
  if (cfg.mode != TrainMode::kCrf && !(cfg.mask_value < 0.0)) throw ConfigError("mask value must be negative");
  if (train_set.empty()) throw DataError("training corpus is empty");
  validate_corpus(train_set, tagset, "training");
  validate_corpus(dev_set, tagset, "dev");
  if (external) {
    if (external->train.size() != train_set.size() || external->dev.size() != dev_set.size()) {
      throw DataError("external emissions do not align with the corpora");
    }
  }

  const bool use_encoder = !external.has_value();
  const MaskSpec spec = make_mask_spec(tagset, cfg.mask_value, cfg.enforce_start);
  const bool masked_training = cfg.mode == TrainMode::kMcrfTrain;
  const bool constrained = cfg.mode != TrainMode::kCrf;

  ModelState model;
  model.scheme = tagset.scheme();
  model.entity_types = tagset.entity_types();
  model.tags = tagset.tags();
  model.mode = cfg.mode;
  model.mask_value = cfg.mask_value;
  model.enforce_start = cfg.enforce_start;
  model.external_emissions = !use_encoder;
  if (use_encoder) model.vocabulary = build_vocabulary(train_set);

  Initialization init = initialize(cfg, tagset, model.vocabulary, cfg.seed);
  model.encoder = use_encoder ? std::move(init.encoder) : EncoderWeights::zeros(0, 0, 0);
  model.transitions = std::move(init.transitions);
  OptimizerState& opt = init.optimizer;

  const Encoded train_tokens = use_encoder ? encode_tokens(train_set, model.vocabulary) : Encoded{};
  const Encoded dev_tokens = use_encoder ? encode_tokens(dev_set, model.vocabulary) : Encoded{};

  const std::size_t d = tagset.size();
  std::vector<char> frozen_a(d * d, 0);
  std::vector<char> frozen_start(d, 0);
  if (masked_training) {
    for (auto [i, j] : spec.rules.omega()) frozen_a[static_cast<std::size_t>(i) * d + static_cast<std::size_t>(j)] = 1;
    for (int j : spec.rules.illegal_starts()) frozen_start[static_cast<std::size_t>(j)] = spec.enforce_start ? 1 : 0;
  }

  auto dev_emissions = [&] {
    if (!use_encoder) return std::vector<EmissionSequence>(external->dev.begin(), external->dev.end());
    std::vector<EmissionSequence> out;
    out.reserve(dev_set.size());
    for (const auto& toks : dev_tokens.tokens) out.push_back(encode(toks, model.encoder));
    return out;
  };

  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  EncoderWeights enc_grad =
      use_encoder ? EncoderWeights::zeros(model.vocabulary.size(), cfg.embedding_width, d) : EncoderWeights{};
  std::size_t iteration = 0;
  double loss_sum = 0.0;
  std::size_t loss_count = 0;
  const std::size_t batches_per_epoch = (train_set.size() + cfg.batch_size - 1) / cfg.batch_size;
  std::size_t total_iterations = cfg.epochs * batches_per_epoch;
  if (cfg.max_iterations > 0) total_iterations = std::min(total_iterations, cfg.max_iterations);

  auto record = [&] {
    const auto em = dev_emissions();
    const DevStats dev = evaluate(dev_set, em, model.transitions, tagset, constrained, spec);
    result.report.records.push_back({iteration, loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0,
                                     dev.nll, dev.f1, dev.illegal_pct});
    loss_sum = 0.0;
    loss_count = 0;
  };

  std::vector<EmissionSequence> batch_emissions;
  std::vector<SampleRef> batch;
  while (iteration < total_iterations) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t first = 0; first < order.size() && iteration < total_iterations; first += cfg.batch_size) {
      const std::size_t last = std::min(order.size(), first + cfg.batch_size);
      batch_emissions.clear();
      batch.clear();
      for (std::size_t k = first; k < last; ++k) {
        const std::size_t n = order[k];
        batch_emissions.push_back(use_encoder ? encode(train_tokens.tokens[n], model.encoder) : external->train[n]);
      }
      for (std::size_t k = first; k < last; ++k) batch.push_back({batch_emissions[k - first], train_set[order[k]].gold});

      LossAndGradients lg = loss_and_gradients(batch, model.transitions);
      if (!std::isfinite(lg.loss)) {
        throw Error("training loss became " + format_double(lg.loss) + " at iteration " + std::to_string(iteration + 1));
      }
      loss_sum += lg.loss;
      ++loss_count;

      std::vector<ParamBlock> blocks;
      if (use_encoder) {
        enc_grad.set_zero();
        for (std::size_t k = first; k < last; ++k) {
          encoder_backward_accumulate(train_tokens.tokens[order[k]], lg.grads.d_logits[k - first], model.encoder,
                                      enc_grad);
        }
        blocks.push_back({model.encoder.embeddings.values(), enc_grad.embeddings.values()});
        blocks.push_back({model.encoder.projection.values(), enc_grad.projection.values()});
        blocks.push_back({model.encoder.bias, enc_grad.bias});
      }
      if (!cfg.freeze_transitions) {
        blocks.push_back({model.transitions.a.values(), lg.grads.d_a.values(), frozen_a});
        blocks.push_back({model.transitions.start, lg.grads.d_start, frozen_start});
      }
      adam_step(opt, blocks, cfg.adam);
      if (masked_training) reapply_mask_in_place(model.transitions, spec);
      ++iteration;
      if (observer) observer(iteration, model.transitions);
      if ((cfg.eval_every > 0 && iteration % cfg.eval_every == 0) || iteration == total_iterations) record();
    }
  }
  result.model = std::move(model);
  return result;
}

EvalSummary evaluate_model(const ModelState& model, const Corpus& corpus, std::span<const EmissionSequence> external) {
  const Tagset tagset = model.tagset();
  std::vector<EmissionSequence> em;
  if (model.external_emissions) {
    MCRF_EXPECT(external.size() == corpus.size(), "external emissions do not align with the corpus");
    em.assign(external.begin(), external.end());
  } else {
    em.reserve(corpus.size());
    for (const auto& s : corpus) em.push_back(model_emissions(model, s.tokens));
  }
  const DevStats s = evaluate(corpus, em, model.transitions, tagset, model.constrained_decoding(), model.mask_spec());
  return {s.nll, s.f1, s.illegal_pct};
}

}  // namespace mcrf
