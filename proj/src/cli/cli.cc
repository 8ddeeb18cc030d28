// Copyright 2026 The mbdtg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mbdtg/cli/cli.h"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mbdtg/checksum.h"
#include "mbdtg/config_file.h"
#include "mbdtg/cooccur.h"
#include "mbdtg/corpus.h"
#include "mbdtg/error.h"
#include "mbdtg/labeler.h"
#include "mbdtg/mbd/checkpoint.h"
#include "mbdtg/mbd/generate.h"
#include "mbdtg/mbd/model.h"
#include "mbdtg/mbd/train.h"
#include "mbdtg/metrics.h"
#include "mbdtg/synthetic.h"

namespace mbdtg::cli {
namespace {

const std::vector<std::string> kSweepWeights = {
    "0.5,0,0.5", "0.4,0.1,0.5", "0.3,0.2,0.5", "0.2,0.3,0.5", "0.1,0.4,0.5",
    "0,0.5,0.5", "0,0.4,0.6",   "0,0.3,0.7",   "0,0.2,0.8",   "0,0.1,0.9"};

constexpr long kDefaultSeed = 1;

std::string Number(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string JoinSet(const std::set<std::string> &items) {
  std::string out;
  for (const auto &item : items) out += (out.empty() ? "" : ",") + item;
  return out;
}

std::string Timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  if (const char *epoch = std::getenv("SOURCE_DATE_EPOCH")) now = std::strtoll(epoch, nullptr, 10);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

// Options every subcommand accepts.
struct Globals {
  std::string config_path;
  long seed = kDefaultSeed;
  bool seed_given = false;
  int threads = 1;
  std::string out;
};

// Collects the manifest while a command runs.
class Invocation {
 public:
  Invocation(std::string command, const Globals &globals) : globals_(globals) {
    manifest_.command = std::move(command);
    manifest_.version = MBDTG_VERSION;
    manifest_.config["threads"] = std::to_string(globals.threads);
    if (!globals.config_path.empty()) {
      config_ = ConfigFile::Load(globals.config_path);
      Input(globals.config_path);
    }
    std::set<std::string> known = {"beam_size", "max_len", "weights"};
    for (const auto *keys : {&labeler::LabelerConfig::ConfigKeys(), &mbd::ModelConfig::ConfigKeys(),
                             &mbd::TrainSchedule::ConfigKeys()}) {
      known.insert(keys->begin(), keys->end());
    }
    config_.CheckKnown(known);
    if (globals.seed_given) config_.Set("seed", std::to_string(globals.seed));
    manifest_.seed = config_.GetInt("seed", kDefaultSeed);
    if (globals.out.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  }

  const ConfigFile &config() const { return config_; }
  long seed() const { return manifest_.seed; }
  int threads() const { return globals_.threads; }
  const std::string &out() const { return globals_.out; }

  // Reads an input, recording its digest.
  std::string Input(const std::string &path) {
    std::string bytes = ReadFile(path);
    manifest_.inputs[path] = Sha256Hex(bytes);
    return bytes;
  }
  corpus::Corpus InputCorpus(const std::string &path, corpus::Split split) {
    return corpus::ParseCorpus(Input(path), split);
  }
  cooccur::CooccurrenceIndex InputIndex(const std::string &path) {
    return cooccur::ParseIndex(Input(path));
  }

  void Record(const std::string &key, const std::string &value) { manifest_.config[key] = value; }
  void Record(const labeler::LabelerConfig &cfg) {
    Record("tau", Number(cfg.tau));
    Record("m", std::to_string(cfg.m));
    Record("important_pos", JoinSet(cfg.important_pos));
    Record("introductory_relations", JoinSet(cfg.introductory_relations));
  }
  void Record(const mbd::ModelConfig &cfg) {
    Record("vocab_size", std::to_string(cfg.vocab_size));
    Record("embed_dim", std::to_string(cfg.embed_dim));
    Record("hidden_dim", std::to_string(cfg.hidden_dim));
    Record("feature_dim", std::to_string(cfg.feature_dim));
    Record("max_position", std::to_string(cfg.max_position));
    Record("encoder_layers", std::to_string(cfg.encoder_layers));
    Record("branch_layers", std::to_string(cfg.branch_layers));
    Record("branch_count", std::to_string(mbd::kBranchCount));
    Record("dropout", Number(cfg.dropout));
    Record("init_range", Number(cfg.init_range));
  }
  void Record(const mbd::TrainSchedule &s) {
    Record("steps", std::to_string(s.steps));
    Record("batch_size", std::to_string(s.batch_size));
    Record("learning_rate", Number(s.learning_rate));
    Record("beta1", Number(s.beta1));
    Record("beta2", Number(s.beta2));
    Record("epsilon", Number(s.epsilon));
    Record("decay_start", std::to_string(s.decay_start));
    Record("decay_every", std::to_string(s.decay_every));
    Record("clip_norm", Number(s.clip_norm));
  }

  void Output(const std::string &path, std::string_view bytes) {
    WriteFile(path, bytes);
    manifest_.outputs.push_back(path);
  }

  void Finish() {
    manifest_.config["seed"] = std::to_string(manifest_.seed);
    manifest_.timestamp = Timestamp();
    WriteFile(globals_.out + ".manifest.json", manifest_.ToJson());
  }

 private:
  const Globals &globals_;
  ConfigFile config_;
  RunManifest manifest_;
};

labeler::LabelerConfig LabelerFrom(Invocation &run) {
  auto cfg = labeler::LabelerConfig::FromConfig(run.config());
  run.Record(cfg);
  return cfg;
}

std::string JoinTokens(const std::vector<std::string> &tokens) {
  std::string out;
  for (const auto &t : tokens) out += (out.empty() ? "" : " ") + t;
  return out;
}

std::vector<std::string> SplitTokens(const std::string &text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string token;
  while (in >> token) out.push_back(corpus::Lowercase(token));
  return out;
}

// `id<TAB>tokens` lines.
std::map<std::string, std::vector<std::string>> ParsePredictions(const std::string &text) {
  std::map<std::string, std::vector<std::string>> out;
  std::istringstream in(text);
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::kMalformed,
                  "predictions line " + std::to_string(line_number) + ": expected id<TAB>tokens");
    }
    const std::string id = line.substr(0, tab);
    if (!out.emplace(id, SplitTokens(line.substr(tab + 1))).second) {
      throw Error(ErrorCode::kMalformed, "duplicate prediction id '" + id + "'");
    }
  }
  return out;
}

struct Generated {
  std::string id;
  std::vector<std::string> tokens;
};

std::vector<Generated> GenerateAll(const mbd::Model &model, const corpus::Corpus &corpus,
                                   const mbd::BranchWeights &weights,
                                   const mbd::GenerateOptions &options) {
  std::vector<Generated> out;
  long unfinished = 0;
  for (const auto &inst : corpus.instances) {
    const mbd::Generation g = mbd::Generate(model, inst.table, weights, options);
    unfinished += g.finished ? 0 : 1;
    out.push_back(Generated{inst.id, g.tokens});
  }
  if (unfinished > 0) {
    std::cerr << "mbdtg: " << unfinished << " outputs reached max_len without <eos>\n";
  }
  return out;
}

metrics::MetricReport Score(const corpus::Corpus &references,
                            const std::map<std::string, std::vector<std::string>> &predictions,
                            const corpus::Corpus *parses,
                            const cooccur::CooccurrenceIndex &index,
                            const labeler::LabelerConfig &cfg) {
  if (predictions.size() != references.size()) {
    throw Error(ErrorCode::kInvalidArgument, "prediction count " +
                                                 std::to_string(predictions.size()) +
                                                 " differs from corpus size " +
                                                 std::to_string(references.size()));
  }
  std::map<std::string, const corpus::Instance *> parsed;
  if (parses != nullptr) {
    for (const auto &inst : parses->instances) parsed[inst.id] = &inst;
  }
  const corpus::PosLexicon lexicon(references);
  std::vector<metrics::EvalRecord> records;
  std::vector<corpus::Instance> outputs;
  for (const auto &ref : references.instances) {
    auto it = predictions.find(ref.id);
    if (it == predictions.end()) {
      throw Error(ErrorCode::kInvalidArgument, "missing prediction for id '" + ref.id + "'");
    }
    records.push_back(metrics::EvalRecord{ref.id, it->second, ref.reference.Surfaces(), ref.table});
    corpus::Instance out{ref.id, ref.table, {}};
    if (parses != nullptr) {
      auto p = parsed.find(ref.id);
      if (p == parsed.end() || p->second->reference.Surfaces() != it->second) {
        throw Error(ErrorCode::kInvalidArgument, "no matching parse for id '" + ref.id + "'");
      }
      out.reference = p->second->reference;
    } else {
      out.reference = corpus::IdentityParse(it->second, lexicon, cfg.important_pos);
    }
    outputs.push_back(std::move(out));
  }
  return metrics::Evaluate(records, outputs, index, cfg);
}

mbd::GenerateOptions GenerationFrom(Invocation &run, std::optional<int> beam, std::optional<int> max_len) {
  mbd::GenerateOptions options;
  options.beam_size = beam.value_or(static_cast<int>(run.config().GetInt("beam_size", options.beam_size)));
  options.max_len = max_len.value_or(static_cast<int>(run.config().GetInt("max_len", options.max_len)));
  run.Record("beam_size", std::to_string(options.beam_size));
  run.Record("max_len", std::to_string(options.max_len));
  return options;
}

// Command bodies.

void BuildIndexCommand(Invocation &run, const std::string &corpus_path) {
  const auto corpus = run.InputCorpus(corpus_path, corpus::Split::kTrain);
  run.Output(run.out(), cooccur::SerializeIndex(cooccur::BuildIndex(corpus, run.threads())));
}

void LabelCommand(Invocation &run, const std::string &corpus_path, const std::string &index_path) {
  const auto cfg = LabelerFrom(run);
  const auto corpus = run.InputCorpus(corpus_path, corpus::Split::kTrain);
  const auto index = run.InputIndex(index_path);
  labeler::Diagnostics diagnostics;
  const auto labels = labeler::LabelCorpus(corpus, index, cfg, run.threads(), &diagnostics);
  std::string text;
  for (size_t i = 0; i < corpus.size(); ++i) {
    text += labeler::FormatLabelLine(corpus.instances[i], labels[i]) + "\n";
  }
  run.Output(run.out(), text);
  std::cerr << "mbdtg: degenerate pairs " << diagnostics.degenerate_pairs
            << ", unbalanced delimiters " << diagnostics.unbalanced_delimiters << "\n";
}

void FilterCommand(Invocation &run, const std::string &corpus_path, const std::string &index_path) {
  const auto cfg = LabelerFrom(run);
  const auto corpus = run.InputCorpus(corpus_path, corpus::Split::kTrain);
  const auto index = run.InputIndex(index_path);
  const auto labels = labeler::LabelCorpus(corpus, index, cfg, run.threads());
  const corpus::PosLexicon lexicon(corpus);
  corpus::Corpus filtered;
  filtered.split = corpus.split;
  long empty = 0;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const auto kept = labeler::FilterReference(corpus.instances[i], labels[i]);
    if (kept.empty) {
      ++empty;
      continue;
    }
    filtered.instances.push_back(corpus::Instance{
        corpus.instances[i].id, corpus.instances[i].table,
        corpus::IdentityParse(kept.tokens, lexicon, cfg.important_pos)});
  }
  run.Output(run.out(), corpus::SerializeCorpus(filtered));
  std::cerr << "mbdtg: kept " << filtered.size() << " of " << corpus.size()
            << " references (" << empty << " filtered to nothing)\n";
}

void TrainCommand(Invocation &run, const std::string &corpus_path, const std::string &index_path) {
  const auto label_cfg = LabelerFrom(run);
  auto model_cfg = mbd::ModelConfig::FromConfig(run.config());
  model_cfg.seed = static_cast<uint64_t>(run.seed());
  auto schedule = mbd::TrainSchedule::FromConfig(run.config());
  schedule.seed = static_cast<uint64_t>(run.seed());
  schedule.threads = run.threads();
  run.Record(model_cfg);
  run.Record(schedule);

  const auto corpus = run.InputCorpus(corpus_path, corpus::Split::kTrain);
  const auto index = run.InputIndex(index_path);
  if (corpus.instances.empty()) throw Error(ErrorCode::kInvalidArgument, "empty corpus");
  const auto labels = labeler::LabelCorpus(corpus, index, label_cfg, run.threads());
  mbd::Model model(model_cfg, mbd::Vocabulary::BuildWords(corpus, model_cfg.vocab_size),
                   mbd::Vocabulary::BuildKeys(corpus));
  std::vector<mbd::TrainingExample> examples;
  for (size_t i = 0; i < corpus.size(); ++i) {
    std::vector<int> l;
    for (const auto &a : labels[i]) l.push_back(a.label);
    examples.push_back(model.MakeExample(corpus.instances[i], l));
  }
  const auto result = mbd::Train(model, examples, schedule, [](int step, double loss) {
    if (step % 100 == 0) std::fprintf(stderr, "mbdtg: step %d loss %.4f\n", step, loss);
  });
  std::string curve = "step\tloss\n";
  for (size_t s = 0; s < result.losses.size(); ++s) {
    curve += std::to_string(s) + "\t" + Number(result.losses[s]) + "\n";
  }
  run.Output(run.out(), mbd::SerializeCheckpoint(model));
  run.Output(run.out() + ".loss.tsv", curve);
}

void GenerateCommand(Invocation &run, const std::string &model_path, const std::string &corpus_path,
                     std::optional<std::string> weights_text, std::optional<int> beam,
                     std::optional<int> max_len) {
  const auto model = mbd::ParseCheckpoint(run.Input(model_path));
  const auto corpus = run.InputCorpus(corpus_path, corpus::Split::kTest);
  const auto weights = mbd::BranchWeights::Parse(
      weights_text.value_or(run.config().GetString("weights", "0.5,0,0.5")));
  run.Record("weights", weights.ToString());
  const auto options = GenerationFrom(run, beam, max_len);
  std::string text;
  for (const auto &g : GenerateAll(*model, corpus, weights, options)) {
    text += g.id + "\t" + JoinTokens(g.tokens) + "\n";
  }
  run.Output(run.out(), text);
}

void EvaluateCommand(Invocation &run, const std::string &predictions_path,
                     const std::string &corpus_path, const std::string &index_path,
                     const std::string &parses_path) {
  const auto cfg = LabelerFrom(run);
  const auto predictions = ParsePredictions(run.Input(predictions_path));
  const auto references = run.InputCorpus(corpus_path, corpus::Split::kTest);
  const auto index = run.InputIndex(index_path);
  std::optional<corpus::Corpus> parses;
  if (!parses_path.empty()) parses = run.InputCorpus(parses_path, corpus::Split::kTest);
  const auto report = Score(references, predictions, parses ? &*parses : nullptr, index, cfg);
  run.Output(run.out(), report.ToJson());
  run.Output(run.out() + ".tsv", report.ToTsv());
}

void SweepCommand(Invocation &run, const std::string &model_path, const std::string &corpus_path,
                  const std::string &index_path, std::optional<int> beam,
                  std::optional<int> max_len) {
  const auto cfg = LabelerFrom(run);
  const auto model = mbd::ParseCheckpoint(run.Input(model_path));
  const auto references = run.InputCorpus(corpus_path, corpus::Split::kTest);
  const auto index = run.InputIndex(index_path);
  const auto options = GenerationFrom(run, beam, max_len);
  std::string table =
      "weights\tbleu\tparent_precision\tparent_recall\tparent_f\thallucination_rate\t"
      "mean_length\tflesch\n";
  for (const auto &row : kSweepWeights) {
    const auto weights = mbd::BranchWeights::Parse(row);
    std::map<std::string, std::vector<std::string>> predictions;
    for (auto &g : GenerateAll(*model, references, weights, options)) {
      predictions[g.id] = std::move(g.tokens);
    }
    const auto report = Score(references, predictions, nullptr, index, cfg);
    char line[256];
    std::snprintf(line, sizeof(line), "%s\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\t%.6f\n",
                  weights.ToString().c_str(), report.bleu, report.parent_precision,
                  report.parent_recall, report.parent_f, report.hallucination_rate,
                  report.mean_length, report.flesch);
    table += line;
    std::cerr << "mbdtg: sweep " << weights.ToString() << " done\n";
  }
  run.Output(run.out(), table);
}

void ImportConlluCommand(Invocation &run, const std::string &conllu_path, const std::string &tables_path,
                         const std::string &split) {
  const auto corpus =
      corpus::ImportConllu(run.Input(conllu_path), run.Input(tables_path), corpus::ParseSplit(split));
  run.Record("split", split);
  run.Output(run.out(), corpus::SerializeCorpus(corpus));
}

void SynthCommand(Invocation &run, int instances) {
  corpus::SyntheticOptions options;
  options.instances = instances;
  options.seed = static_cast<uint64_t>(run.seed());
  run.Record("instances", std::to_string(instances));
  run.Output(run.out(), corpus::SerializeCorpus(corpus::MakeSyntheticCorpus(options).corpus));
}

const char *CodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kMalformed: return "malformed";
    case ErrorCode::kChecksum: return "checksum";
    case ErrorCode::kVersion: return "version";
    case ErrorCode::kNumeric: return "numeric";
  }
  return "unknown";
}

}  // namespace

std::string RunManifest::ToJson() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["version"] = version;
  j["seed"] = seed;
  j["config"] = config;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["timestamp"] = timestamp;
  return j.dump(2) + "\n";
}

int Run(int argc, char **argv) {
  CLI::App app{"Multi-branch data-to-text toolkit: divergence labeling, training, evaluation"};
  app.require_subcommand(1);
  Globals globals;
  std::string corpus_path, index_path, model_path, predictions_path, parses_path;
  std::string conllu_path, tables_path, split = "train";
  std::optional<std::string> weights;
  std::optional<int> beam, max_len;
  int instances = 50;

  auto add = [&](const std::string &name, const std::string &help) {
    CLI::App *cmd = app.add_subcommand(name, help);
    cmd->add_option("--config", globals.config_path, "key = value configuration file");
    cmd->add_option_function<long>(
        "--seed", [&](long s) {
          globals.seed = s;
          globals.seed_given = true;
        }, "random seed");
    cmd->add_option("--threads", globals.threads, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--out", globals.out, "output path")->required();
    return cmd;
  };
  auto corpus_opt = [&](CLI::App *cmd) {
    cmd->add_option("--corpus", corpus_path, "corpus JSONL")->required();
  };
  auto index_opt = [&](CLI::App *cmd) {
    cmd->add_option("--index", index_path, "co-occurrence index")->required();
  };
  auto generation_opts = [&](CLI::App *cmd) {
    cmd->add_option("--beam", beam, "beam size");
    cmd->add_option("--max-len", max_len, "maximum output length");
  };

  CLI::App *build_index = add("build-index", "count word/table-pair co-occurrences");
  corpus_opt(build_index);
  CLI::App *label = add("label", "score and label every reference token");
  corpus_opt(label);
  index_opt(label);
  CLI::App *filter = add("filter", "drop label-0 tokens from references");
  corpus_opt(filter);
  index_opt(filter);
  CLI::App *train = add("train", "train the multi-branch model");
  corpus_opt(train);
  index_opt(train);
  CLI::App *generate = add("generate", "decode every table of a corpus");
  generate->add_option("--model", model_path, "checkpoint")->required();
  corpus_opt(generate);
  generate->add_option("--weights", weights, "branch weights w0,w1,w2");
  generation_opts(generate);
  CLI::App *evaluate = add("evaluate", "BLEU, PARENT, hallucination rate, length, Flesch");
  evaluate->add_option("--predictions", predictions_path, "id<TAB>tokens file")->required();
  corpus_opt(evaluate);
  index_opt(evaluate);
  evaluate->add_option("--parses", parses_path, "parsed predictions as a corpus file");
  CLI::App *sweep = add("sweep", "metrics for each row of the branch-weight grid");
  sweep->add_option("--model", model_path, "checkpoint")->required();
  corpus_opt(sweep);
  index_opt(sweep);
  generation_opts(sweep);
  CLI::App *import = add("import-conllu", "pair CoNLL-U parses with tables");
  import->add_option("--conllu", conllu_path, "CoNLL-U file")->required();
  import->add_option("--tables", tables_path, "table JSONL")->required();
  import->add_option("--split", split, "train, valid or test");
  CLI::App *synth = add("synth", "write the synthetic biography corpus");
  synth->add_option("--instances", instances, "instance count")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  CLI::App *chosen = app.get_subcommands().front();
  try {
    Invocation run(chosen->get_name(), globals);
    if (chosen == build_index) BuildIndexCommand(run, corpus_path);
    else if (chosen == label) LabelCommand(run, corpus_path, index_path);
    else if (chosen == filter) FilterCommand(run, corpus_path, index_path);
    else if (chosen == train) TrainCommand(run, corpus_path, index_path);
    else if (chosen == generate) GenerateCommand(run, model_path, corpus_path, weights, beam, max_len);
    else if (chosen == evaluate) EvaluateCommand(run, predictions_path, corpus_path, index_path, parses_path);
    else if (chosen == sweep) SweepCommand(run, model_path, corpus_path, index_path, beam, max_len);
    else if (chosen == import) ImportConlluCommand(run, conllu_path, tables_path, split);
    else if (chosen == synth) SynthCommand(run, instances);
    run.Finish();
  } catch (const Error &e) {
    std::cerr << "mbdtg: error[" << CodeName(e.code()) << "]: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception &e) {
    std::cerr << "mbdtg: error[internal]: " << e.what() << "\n";
    return 70;
  }
  return 0;
}

}  // namespace mbdtg::cli
