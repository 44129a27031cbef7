#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcrf/crf.hpp"
#include "mcrf/encoder.hpp"
#include "mcrf/masking.hpp"
#include "mcrf/schemes.hpp"

namespace mcrf {

// crf: plain CRF training and decoding.
// mcrf_decode: plain CRF training, constrained decoding.
// mcrf_train: mask maintained during training, constrained decoding.
enum class TrainMode { kCrf, kMcrfDecode, kMcrfTrain };

std::string_view to_string(TrainMode mode);
TrainMode parse_train_mode(std::string_view name);

inline constexpr std::string_view kModelFormatVersion = "mcrf-model-v1";

struct ModelState {
  Scheme scheme = Scheme::kBio;
  std::vector<std::string> entity_types;
  std::vector<std::string> tags;
  TrainMode mode = TrainMode::kCrf;
  double mask_value = kDefaultMaskValue;
  bool enforce_start = true;
  TransitionMatrix transitions;
  // When set, emissions come from a logits file and `encoder` is unused.
  bool external_emissions = false;
  EncoderWeights encoder;
  Vocabulary vocabulary;

  Tagset tagset() const { return build_tagset(scheme, entity_types); }
  MaskSpec mask_spec() const;
  bool constrained_decoding() const { return mode != TrainMode::kCrf; }

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

// JSON document; doubles are written in shortest round-trip form.
void save_model(const std::filesystem::path& path, const ModelState& state);
ModelState load_model(const std::filesystem::path& path);
std::string serialize_model(const ModelState& state);
ModelState parse_model(std::string_view text);

EmissionSequence model_emissions(const ModelState& model, std::span<const std::string> tokens);
// Viterbi, constrained when the model's mode calls for it.
Path decode(const ModelState& model, const EmissionSequence& emissions);

}  // namespace mcrf
