#include "mcrf/model.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mcrf/error.hpp"

namespace mcrf {

using nlohmann::json;

std::string_view to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kCrf: return "crf";
    case TrainMode::kMcrfDecode: return "mcrf-decode";
    case TrainMode::kMcrfTrain: return "mcrf-train";
  }
  return "?";
}

TrainMode parse_train_mode(std::string_view name) {
  if (name == "crf") return TrainMode::kCrf;
  if (name == "mcrf-decode" || name == "mcrf_decode") return TrainMode::kMcrfDecode;
  if (name == "mcrf-train" || name == "mcrf_train") return TrainMode::kMcrfTrain;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected crf, mcrf-decode or mcrf-train)");
}

MaskSpec ModelState::mask_spec() const { return make_mask_spec(tagset(), mask_value, enforce_start); }

namespace {

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.values().begin(), m.values().end())}};
}

Matrix matrix_from_json(const json& j, const char* name) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != rows * cols) throw LoadError(std::string("matrix '") + name + "' has inconsistent size");
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.values().begin());
  return m;
}

}  // namespace

std::string serialize_model(const ModelState& s) {
  json j;
  j["format"] = kModelFormatVersion;
  j["scheme"] = to_string(s.scheme);
  j["entity_types"] = s.entity_types;
  j["tags"] = s.tags;
  j["mode"] = to_string(s.mode);
  j["mask_value"] = s.mask_value;
  j["enforce_start"] = s.enforce_start;
  j["transitions"] = matrix_to_json(s.transitions.a);
  j["start"] = s.transitions.start;
  j["external_emissions"] = s.external_emissions;
  j["encoder"] = {{"embeddings", matrix_to_json(s.encoder.embeddings)},
                  {"projection", matrix_to_json(s.encoder.projection)},
                  {"bias", s.encoder.bias}};
  j["vocabulary"] = s.vocabulary.tokens();
  return j.dump(1) + "\n";
}

ModelState parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw LoadError(std::string("corrupted model file: ") + e.what());
  }
  try {
    if (!j.is_object() || !j.contains("format")) throw LoadError("corrupted model file: missing format tag");
    const auto version = j.at("format").get<std::string>();
    if (version != kModelFormatVersion) {
      throw LoadError("unsupported model format '" + version + "' (expected " + std::string(kModelFormatVersion) + ")");
    }
    ModelState s;
    s.scheme = parse_scheme(j.at("scheme").get<std::string>());
    s.entity_types = j.at("entity_types").get<std::vector<std::string>>();
    s.tags = j.at("tags").get<std::vector<std::string>>();
    if (s.tags != s.tagset().tags()) throw LoadError("tag order inconsistent with scheme and entity types");
    s.mode = parse_train_mode(j.at("mode").get<std::string>());
    s.mask_value = j.at("mask_value").get<double>();
    s.enforce_start = j.at("enforce_start").get<bool>();
    s.transitions.a = matrix_from_json(j.at("transitions"), "transitions");
    s.transitions.start = j.at("start").get<std::vector<double>>();
    const std::size_t d = s.tags.size();
    if (s.transitions.a.rows() != d || s.transitions.a.cols() != d || s.transitions.start.size() != d) {
      throw LoadError("transition shapes inconsistent with the tagset");
    }
    s.external_emissions = j.at("external_emissions").get<bool>();
    const auto& enc = j.at("encoder");
    s.encoder.embeddings = matrix_from_json(enc.at("embeddings"), "embeddings");
    s.encoder.projection = matrix_from_json(enc.at("projection"), "projection");
    s.encoder.bias = enc.at("bias").get<std::vector<double>>();
    for (const auto& tok : j.at("vocabulary").get<std::vector<std::string>>()) s.vocabulary.add(tok);
    if (!s.external_emissions) {
      if (s.encoder.bias.size() != d || s.encoder.projection.rows() != 3 * s.encoder.width() ||
          s.encoder.projection.cols() != d || s.encoder.embeddings.rows() != s.vocabulary.size()) {
        throw LoadError("encoder shapes inconsistent with the tagset or vocabulary");
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw LoadError(std::string("corrupted model file: ") + e.what());
  } catch (const ConfigError& e) {
    throw LoadError(std::string("corrupted model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ModelState& state) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file " + path.string());
  out << serialize_model(state);
  if (!out) throw Error("failed writing model file " + path.string());
}

ModelState load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open model file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

EmissionSequence model_emissions(const ModelState& model, std::span<const std::string> tokens) {
  MCRF_EXPECT(!model.external_emissions, "model expects external emissions");
  const auto ids = model.vocabulary.lookup(tokens);
  return encode(ids, model.encoder);
}

Path decode(const ModelState& model, const EmissionSequence& emissions) {
  if (model.constrained_decoding()) return constrained_viterbi(emissions, model.transitions, model.mask_spec());
  return viterbi(emissions, model.transitions);
}

}  // namespace mcrf
