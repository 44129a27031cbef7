#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcrf/conll.hpp"
#include "mcrf/crf.hpp"
#include "mcrf/encoder.hpp"
#include "mcrf/masking.hpp"
#include "mcrf/model.hpp"
#include "mcrf/postproc.hpp"
#include "mcrf/schemes.hpp"

namespace mcrf {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  TrainMode mode = TrainMode::kMcrfTrain;
  double mask_value = kDefaultMaskValue;
  bool enforce_start = true;
  AdamConfig adam;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::size_t max_iterations = 0;  // 0: no cap beyond `epochs`
  std::uint64_t seed = 1;
  std::size_t eval_every = 50;     // iterations between report rows; the last iteration is always recorded
  std::size_t embedding_width = 32;
  double init_scale = 0.1;
  // Keeps transitions and start scores at zero; the CRF loss then reduces to
  // per-token softmax cross-entropy (a plain tagger).
  bool freeze_transitions = false;
};

// A trainable tensor with its gradient. Entries flagged in `frozen` keep their
// value and accumulate no optimizer moments.
struct ParamBlock {
  std::span<double> values;
  std::span<const double> grads;
  std::span<const char> frozen = {};
};

struct OptimizerState {
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };
  std::vector<Moments> moments;  // one per ParamBlock, in call order
  std::size_t step = 0;

  friend bool operator==(const OptimizerState& a, const OptimizerState& b) {
    if (a.step != b.step || a.moments.size() != b.moments.size()) return false;
    for (std::size_t i = 0; i < a.moments.size(); ++i) {
      if (a.moments[i].m != b.moments[i].m || a.moments[i].v != b.moments[i].v) return false;
    }
    return true;
  }
};

// One bias-corrected Adam update over all blocks.
void adam_step(OptimizerState& state, std::span<ParamBlock> blocks, const AdamConfig& config);

struct TrainRecord {
  std::size_t iteration = 0;
  double train_nll = 0.0;    // mean batch loss since the previous record
  double dev_nll = 0.0;      // the mode's own objective on dev
  double dev_f1 = 0.0;       // chunk F1 of the mode's decoder, CoNLL-2000 chunking
  double illegal_pct = 0.0;  // illegal predicted chunks / all predicted chunks, in percent
};

struct TrainReport {
  std::vector<TrainRecord> records;

  // Whitespace-separated table with header
  // "iteration train_nll dev_nll dev_f1 illegal_pct".
  std::string to_table() const;
};

struct TrainResult {
  ModelState model;
  TrainReport report;
};

struct Initialization {
  EncoderWeights encoder;
  TransitionMatrix transitions;
  OptimizerState optimizer;
};

Initialization initialize(const TrainConfig& config, const Tagset& tagset, const Vocabulary& vocabulary,
                          std::uint64_t seed);

Vocabulary build_vocabulary(std::span<const LabeledSentence> corpus);

// Emissions supplied from outside; the encoder is then left out of training.
struct ExternalEmissions {
  std::span<const EmissionSequence> train;
  std::span<const EmissionSequence> dev;
};

// Called after each optimizer step (and mask maintenance) with the iteration
// number and the current transition matrix.
using StepObserver = std::function<void(std::size_t iteration, const TransitionMatrix&)>;

TrainResult train(const Corpus& train_set, const Corpus& dev_set, const Tagset& tagset, const TrainConfig& config,
                  std::optional<ExternalEmissions> external = std::nullopt, const StepObserver& observer = {});

// Dev-set statistics for a finished model.
struct EvalSummary {
  double nll = 0.0;
  double f1 = 0.0;
  double illegal_pct = 0.0;
};
EvalSummary evaluate_model(const ModelState& model, const Corpus& corpus,
                           std::span<const EmissionSequence> external = {});

}  // namespace mcrf
