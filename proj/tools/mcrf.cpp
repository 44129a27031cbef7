#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mcrf/conll.hpp"
#include "mcrf/diagnostics.hpp"
#include "mcrf/encoder.hpp"
#include "mcrf/error.hpp"
#include "mcrf/eval.hpp"
#include "mcrf/model.hpp"
#include "mcrf/postproc.hpp"
#include "mcrf/synthetic.hpp"
#include "mcrf/text.hpp"
#include "mcrf/training.hpp"
#include "mcrf/verify.hpp"

namespace {

using namespace mcrf;

struct UsageError : Error {
  using Error::Error;
};

// Entity types named by the tag column of a CoNLL file, sorted.
std::vector<std::string> infer_entity_types(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::set<std::string> types;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    const auto cols = split_whitespace(line);
    if (cols.size() < 2) continue;
    const std::string_view tag = cols.back();
    const auto dash = tag.find('-');
    if (dash != std::string_view::npos) types.emplace(tag.substr(dash + 1));
  }
  if (types.empty()) throw DataError(path + " contains no entity tags; pass --types");
  return {types.begin(), types.end()};
}

Tagset resolve_tagset(const std::string& scheme, const std::string& types, const std::string& data_path) {
  std::vector<std::string> names;
  if (!types.empty()) {
    for (auto part : split(types, ',')) names.emplace_back(part);
  } else {
    names = infer_entity_types(data_path);
  }
  return build_tagset(parse_scheme(scheme), names);
}

struct TrainFlags {
  std::string scheme = "bio";
  std::string types;
  std::string mode = "mcrf-train";
  double mask_value = kDefaultMaskValue;
  bool no_start_constraint = false;
  double lr = AdamConfig{}.learning_rate;
  std::size_t batch_size = TrainConfig{}.batch_size;
  std::size_t epochs = TrainConfig{}.epochs;
  std::size_t max_iterations = 0;
  std::uint64_t seed = 1;
  std::size_t eval_every = TrainConfig{}.eval_every;
  std::size_t embedding_width = TrainConfig{}.embedding_width;

  TrainConfig config() const {
    TrainConfig cfg;
    cfg.mode = parse_train_mode(mode);
    cfg.mask_value = mask_value;
    cfg.enforce_start = !no_start_constraint;
    cfg.adam.learning_rate = lr;
    cfg.batch_size = batch_size;
    cfg.epochs = epochs;
    cfg.max_iterations = max_iterations;
    cfg.seed = seed;
    cfg.eval_every = eval_every;
    cfg.embedding_width = embedding_width;
    return cfg;
  }
};

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--scheme", f.scheme, "Tagging scheme")->check(CLI::IsMember({"bio", "bioes"}))->capture_default_str();
  cmd->add_option("--types", f.types, "Comma-separated entity types (default: read from the training data)");
  cmd->add_option("--mode", f.mode, "Training mode")
      ->check(CLI::IsMember({"crf", "mcrf-decode", "mcrf-train"}))
      ->capture_default_str();
  cmd->add_option("--mask-value", f.mask_value, "Score written to illegal transitions")->capture_default_str();
  cmd->add_flag("--no-start-constraint", f.no_start_constraint, "Do not mask illegal first tags");
  cmd->add_option("--lr", f.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--batch-size", f.batch_size, "Sentences per batch")->capture_default_str();
  cmd->add_option("--epochs", f.epochs, "Passes over the training data")->capture_default_str();
  cmd->add_option("--max-iterations", f.max_iterations, "Stop after this many updates (0: no cap)")
      ->capture_default_str();
  cmd->add_option("--seed", f.seed, "Random seed")->capture_default_str();
  cmd->add_option("--eval-every", f.eval_every, "Iterations between report rows")->capture_default_str();
  cmd->add_option("--embedding-width", f.embedding_width, "Token embedding width")->capture_default_str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
  if (!out) throw Error("failed writing " + path);
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  TrainFlags flags;
  std::string data;
  std::string dev;
  std::string emissions;
  std::string dev_emissions;
  std::string out;
  std::string report;
  std::size_t seeds = 1;
};

int cmd_train(const TrainArgs& a) {
  if (a.emissions.empty() != a.dev_emissions.empty()) {
    throw UsageError("--emissions and --dev-emissions must be given together");
  }
  if (a.seeds < 1) throw UsageError("--seeds must be at least 1");
  const Tagset tagset = resolve_tagset(a.flags.scheme, a.flags.types, a.data);
  const Corpus train_set = read_conll(a.data, tagset);
  const Corpus dev_set = read_conll(a.dev, tagset);

  std::vector<EmissionSequence> train_em;
  std::vector<EmissionSequence> dev_em;
  std::optional<ExternalEmissions> external;
  if (!a.emissions.empty()) {
    const auto train_lengths = sentence_lengths(train_set);
    const auto dev_lengths = sentence_lengths(dev_set);
    train_em = load_external_logits(a.emissions, tagset, train_lengths);
    dev_em = load_external_logits(a.dev_emissions, tagset, dev_lengths);
    external = ExternalEmissions{train_em, dev_em};
  }

  std::optional<TrainResult> best;
  double best_f1 = -1.0;
  double sum_f1 = 0.0;
  for (std::size_t k = 0; k < a.seeds; ++k) {
    TrainConfig cfg = a.flags.config();
    cfg.seed = a.flags.seed + k;
    TrainResult result = train(train_set, dev_set, tagset, cfg, external);
    const double f1 = result.report.records.empty() ? 0.0 : result.report.records.back().dev_f1;
    if (a.seeds > 1) std::cout << "seed=" << cfg.seed << " dev_f1=" << format_fixed(f1, 4) << "\n";
    sum_f1 += f1;
    if (f1 > best_f1) {
      best_f1 = f1;
      best = std::move(result);
    }
  }

  if (!a.report.empty()) write_text(a.report, best->report.to_table());
  if (!a.out.empty()) save_model(a.out, best->model);
  if (a.seeds > 1) {
    std::cout << "best_dev_f1=" << format_fixed(best_f1, 4) << "\n"
              << "mean_dev_f1=" << format_fixed(sum_f1 / static_cast<double>(a.seeds), 4) << "\n";
  } else {
    const auto& last = best->report.records.back();
    std::cout << "iterations=" << last.iteration << " dev_f1=" << format_fixed(last.dev_f1, 4)
              << " illegal_pct=" << format_fixed(last.illegal_pct, 2) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string model;
  std::string data;
  std::string strategy = "retain";
  std::string emissions;
  std::string out;
};

std::vector<Path> predict_corpus(const ModelState& model, const Corpus& corpus, const std::string& emissions_path,
                                 Strategy strategy) {
  const Tagset tagset = model.tagset();
  std::vector<EmissionSequence> external;
  if (model.external_emissions) {
    if (emissions_path.empty()) throw UsageError("this model reads precomputed emissions; pass --emissions");
    external = load_external_logits(emissions_path, tagset, sentence_lengths(corpus));
  } else if (!emissions_path.empty()) {
    throw UsageError("--emissions given but the model has its own encoder");
  }
  std::vector<Path> out;
  out.reserve(corpus.size());
  for (std::size_t n = 0; n < corpus.size(); ++n) {
    const EmissionSequence em = model.external_emissions ? external[n] : model_emissions(model, corpus[n].tokens);
    out.push_back(repair_tags(decode(model, em), tagset, strategy));
  }
  return out;
}

ConllReadOptions lenient() {
  ConllReadOptions o;
  o.validate_legality = false;
  return o;
}

int cmd_predict(const PredictArgs& a) {
  const ModelState model = load_model(a.model);
  const Tagset tagset = model.tagset();
  const Corpus corpus = read_conll(a.data, tagset, lenient());
  const auto preds = predict_corpus(model, corpus, a.emissions, parse_strategy(a.strategy));
  if (a.out.empty()) {
    write_conll(std::cout, tagset, corpus, preds);
  } else {
    write_conll(a.out, tagset, corpus, preds);
  }
  return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
  std::string gold;
  std::string pred;
  std::string model;
  std::string data;
  std::string emissions;
  std::string strategy = "none";
  std::string scheme = "bio";
  std::string types;
  std::string label = "system";
};

int cmd_eval(const EvalArgs& a) {
  const Strategy strategy = parse_strategy(a.strategy);
  std::optional<Tagset> tagset;
  Corpus gold;
  std::vector<Path> raw;
  if (!a.model.empty()) {
    if (a.data.empty()) throw UsageError("--model needs --data");
    if (!a.pred.empty()) throw UsageError("give either --pred or --model, not both");
    const ModelState model = load_model(a.model);
    tagset = model.tagset();
    gold = read_conll(a.data, *tagset, lenient());
    raw = predict_corpus(model, gold, a.emissions, Strategy::kNone);
  } else {
    if (a.gold.empty() || a.pred.empty()) throw UsageError("eval needs --gold and --pred, or --model and --data");
    tagset = resolve_tagset(a.scheme, a.types, a.gold);
    gold = read_conll(a.gold, *tagset, lenient());
    const Corpus pred = read_conll(a.pred, *tagset, lenient());
    if (pred.size() != gold.size()) {
      throw DataError("prediction file has " + std::to_string(pred.size()) + " sentences, gold has " +
                      std::to_string(gold.size()));
    }
    for (std::size_t n = 0; n < gold.size(); ++n) {
      if (pred[n].tokens != gold[n].tokens) {
        throw DataError("sentence " + std::to_string(n) + " does not align between gold and predictions");
      }
      raw.push_back(pred[n].gold);
    }
  }

  std::vector<std::vector<Segment>> gold_segments;
  std::vector<std::vector<Segment>> raw_segments;
  std::vector<std::vector<Segment>> final_segments;
  for (std::size_t n = 0; n < gold.size(); ++n) {
    gold_segments.push_back(extract_segments(gold[n].gold, *tagset));
    raw_segments.push_back(extract_segments(raw[n], *tagset));
    final_segments.push_back(extract_segments(repair_tags(raw[n], *tagset, strategy), *tagset));
  }
  const ChunkMetrics metrics = chunk_prf(gold_segments, final_segments);
  const IllegalStats stats = illegal_stats(gold_segments, raw_segments);
  std::cout << format_illegal_table(stats, a.label) << "\n" << format_key_values(metrics, stats);
  return 0;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const VerifyOptions& opts) {
  const auto checks = run_verification(opts);
  std::cout << format_checks(checks);
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  std::cout << (ok ? "all checks passed\n" : "some checks FAILED\n");
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------- gen-synth

struct SynthArgs {
  std::uint64_t seed = 1;
  std::size_t sentences = 2000;
  std::size_t dev_sentences = 200;
  std::size_t test_sentences = 200;
  std::size_t types = 3;
  std::string scheme = "bio";
  std::string out_prefix;
  double sample_fraction = 1.0;
};

int cmd_gen_synth(const SynthArgs& a) {
  if (a.types < 1) throw UsageError("--types must be at least 1");
  if (!(a.sample_fraction > 0.0 && a.sample_fraction <= 1.0)) throw UsageError("--sample-fraction must be in (0, 1]");
  SyntheticConfig cfg;
  cfg.entity_types = default_entity_types(a.types);
  cfg.scheme = parse_scheme(a.scheme);
  cfg.sentences = a.sentences + a.dev_sentences + a.test_sentences;
  const Corpus all = generate_synthetic(cfg, a.seed);
  const auto first = all.begin();
  Corpus train_set(first, first + static_cast<std::ptrdiff_t>(a.sentences));
  const Corpus dev_set(first + static_cast<std::ptrdiff_t>(a.sentences),
                       first + static_cast<std::ptrdiff_t>(a.sentences + a.dev_sentences));
  const Corpus test_set(first + static_cast<std::ptrdiff_t>(a.sentences + a.dev_sentences), all.end());
  if (a.sample_fraction < 1.0) train_set = sample_fraction(train_set, a.sample_fraction, a.seed);

  const Tagset tagset = build_tagset(cfg.scheme, cfg.entity_types);
  write_conll(a.out_prefix + ".train.conll", tagset, train_set);
  write_conll(a.out_prefix + ".dev.conll", tagset, dev_set);
  write_conll(a.out_prefix + ".test.conll", tagset, test_set);
  std::cout << "train=" << train_set.size() << " dev=" << dev_set.size() << " test=" << test_set.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------- compare

struct CompareArgs {
  TrainFlags flags;
  std::string train;
  std::string dev;
  std::string test;
};

int cmd_compare(const CompareArgs& a) {
  const Tagset tagset = resolve_tagset(a.flags.scheme, a.flags.types, a.train);
  const Corpus train_set = read_conll(a.train, tagset);
  const Corpus dev_set = read_conll(a.dev, tagset);
  const Corpus test_set = read_conll(a.test.empty() ? a.dev : a.test, tagset, lenient());
  std::cout << format_comparison(compare_systems(train_set, dev_set, test_set, tagset, a.flags.config()));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Masked conditional random fields for sequence labeling"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write its learning curve");
  train_cmd->add_option("--data", train_args.data, "Training CoNLL file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--dev", train_args.dev, "Development CoNLL file")->required()->check(CLI::ExistingFile);
  add_train_flags(train_cmd, train_args.flags);
  train_cmd->add_option("--emissions", train_args.emissions, "Precomputed emission scores for --data");
  train_cmd->add_option("--dev-emissions", train_args.dev_emissions, "Precomputed emission scores for --dev");
  train_cmd->add_option("--seeds", train_args.seeds, "Independent runs from consecutive seeds; the best dev F1 is kept")
      ->capture_default_str();
  train_cmd->add_option("--out", train_args.out, "Model file to write");
  train_cmd->add_option("--report", train_args.report, "Learning-curve table to write");

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Tag a CoNLL file");
  predict_cmd->add_option("--model", predict_args.model, "Model file")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--data", predict_args.data, "CoNLL file to tag")->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("--strategy", predict_args.strategy, "Repair of illegal segments")
      ->check(CLI::IsMember({"retain", "discard", "none"}))
      ->capture_default_str();
  predict_cmd->add_option("--emissions", predict_args.emissions, "Precomputed emission scores for --data");
  predict_cmd->add_option("--out", predict_args.out, "Output file (default: standard output)");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Chunk F1 and illegal-segment statistics");
  eval_cmd->add_option("--gold", eval_args.gold, "Gold CoNLL file");
  eval_cmd->add_option("--pred", eval_args.pred, "Predictions, tag in the last column");
  eval_cmd->add_option("--model", eval_args.model, "Model to decode --data with");
  eval_cmd->add_option("--data", eval_args.data, "Gold CoNLL file decoded by --model");
  eval_cmd->add_option("--emissions", eval_args.emissions, "Precomputed emission scores for --data");
  eval_cmd->add_option("--strategy", eval_args.strategy, "Repair applied before scoring")
      ->check(CLI::IsMember({"retain", "discard", "none"}))
      ->capture_default_str();
  eval_cmd->add_option("--scheme", eval_args.scheme, "Tagging scheme of --gold/--pred")
      ->check(CLI::IsMember({"bio", "bioes"}))
      ->capture_default_str();
  eval_cmd->add_option("--types", eval_args.types, "Comma-separated entity types (default: read from --gold)");
  eval_cmd->add_option("--label", eval_args.label, "Row label of the table")->capture_default_str();

  VerifyOptions verify_opts;
  auto* verify_cmd = app.add_subcommand("verify", "Numerical self-checks");
  verify_cmd->add_option("--seed", verify_opts.seed)->capture_default_str();
  verify_cmd->add_option("--instances", verify_opts.instances, "Random instances per enumeration check")
      ->capture_default_str();
  verify_cmd->add_option("--gradient-instances", verify_opts.gradient_instances)->capture_default_str();
  verify_cmd->add_option("--gap-instances", verify_opts.gap_instances)->capture_default_str();
  verify_cmd->add_option("--trials", verify_opts.constrained_trials, "Constrained decodes")->capture_default_str();

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("gen-synth", "Write a synthetic train/dev/test corpus");
  synth_cmd->add_option("--seed", synth_args.seed)->capture_default_str();
  synth_cmd->add_option("--sentences", synth_args.sentences, "Training sentences")->capture_default_str();
  synth_cmd->add_option("--dev-sentences", synth_args.dev_sentences)->capture_default_str();
  synth_cmd->add_option("--test-sentences", synth_args.test_sentences)->capture_default_str();
  synth_cmd->add_option("--types", synth_args.types, "Number of entity types")->capture_default_str();
  synth_cmd->add_option("--scheme", synth_args.scheme)->check(CLI::IsMember({"bio", "bioes"}))->capture_default_str();
  synth_cmd->add_option("--out-prefix", synth_args.out_prefix, "Writes PREFIX.{train,dev,test}.conll")->required();
  synth_cmd->add_option("--sample-fraction", synth_args.sample_fraction, "Keep this share of the training sentences")
      ->capture_default_str();

  CompareArgs compare_args;
  auto* compare_cmd = app.add_subcommand("compare", "Train tagger, CRF and MCRF systems and tabulate them");
  compare_cmd->add_option("--train", compare_args.train)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--dev", compare_args.dev)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--test", compare_args.test, "Scored file (default: --dev)")->check(CLI::ExistingFile);
  add_train_flags(compare_cmd, compare_args.flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return cmd_train(train_args);
    if (*predict_cmd) return cmd_predict(predict_args);
    if (*eval_cmd) return cmd_eval(eval_args);
    if (*verify_cmd) return cmd_verify(verify_opts);
    if (*synth_cmd) return cmd_gen_synth(synth_args);
    if (*compare_cmd) return cmd_compare(compare_args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
