#include "pairfilter/cli/cli.h"

#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "pairfilter/corpus/dataset.h"
#include "pairfilter/corpus/self_label.h"
#include "pairfilter/corpus/stats.h"
#include "pairfilter/corpus/synthetic.h"
#include "pairfilter/filtering/filter.h"
#include "pairfilter/metrics/metrics.h"
#include "pairfilter/pipeline/pipeline.h"

namespace pairfilter {
namespace fs = std::filesystem;

int ExitCodeFor(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
      return kExitConfig;
    case ErrorKind::kParse:
    case ErrorKind::kValidation:
    case ErrorKind::kLabeling:
    case ErrorKind::kConflict:
    case ErrorKind::kBounds:
    case ErrorKind::kLookup:
    case ErrorKind::kLength:
    case ErrorKind::kGeneration:
    case ErrorKind::kIo:
      return kExitData;
    case ErrorKind::kTransport:
    case ErrorKind::kClient:
    case ErrorKind::kPipeline:
      return kExitClient;
    case ErrorKind::kShape:
    case ErrorKind::kState:
    case ErrorKind::kTraining:
      return kExitInternal;
  }
  return kExitInternal;
}

RunConfig RunConfig::FromJson(const Json& j) {
  RunConfig c;
  try {
    c.relations = j.value("relations", c.relations);
    c.normalization = j.value("normalization", c.normalization);
    c.checkpoint = j.value("checkpoint", c.checkpoint);
    c.features = j.value("features", c.features);
    c.templates = j.value("templates", c.templates);
    c.examples = j.value("examples", c.examples);
    if (j.contains("train")) c.train = TrainConfig::FromJson(j.at("train"));
    if (j.contains("llm")) {
      const auto& llm = j.at("llm");
      c.llm_client = llm.value("client", c.llm_client);
      c.llm_model = llm.value("model", c.llm_model);
      c.llm_fixture = llm.value("fixture", c.llm_fixture);
      c.parallelism = llm.value("parallelism", c.parallelism);
      c.max_retries = llm.value("maxRetries", c.max_retries);
      c.timeout_seconds = llm.value("timeoutSeconds", c.timeout_seconds);
      c.few_shot = llm.value("fewShot", c.few_shot);
    }
    c.mode = j.value("mode", c.mode);
    c.candidates = j.value("candidates", c.candidates);
    c.threshold = j.value("threshold", c.threshold);
    if (j.contains("strata")) {
      const auto& s = j.at("strata");
      c.min_triples = s.value("minTriples", c.min_triples);
      c.min_tokens = s.value("minTokens", c.min_tokens);
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const Json::exception& e) {
    Fail(ErrorKind::kConfig, std::string("run config: ") + e.what());
  }
  return c;
}

RunConfig RunConfig::Load(const std::string& path) {
  if (!fs::exists(path)) Fail(ErrorKind::kConfig, "config file not found: " + path);
  const auto j = Json::parse(ReadFile(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    Fail(ErrorKind::kConfig, "config file " + path + " is not a JSON object");
  }
  return FromJson(j);
}

Json RunConfig::ToJson() const {
  Json j = {{"relations", relations},
            {"normalization", normalization},
            {"checkpoint", checkpoint},
            {"features", features},
            {"templates", templates},
            {"examples", examples},
            {"train", train.ToJson()},
            {"llm",
             {{"client", llm_client},
              {"model", llm_model},
              {"fixture", llm_fixture},
              {"parallelism", parallelism},
              {"maxRetries", max_retries},
              {"timeoutSeconds", timeout_seconds},
              {"fewShot", few_shot}}},
            {"mode", mode},
            {"candidates", candidates},
            {"threshold", threshold},
            {"strata", {{"minTriples", min_triples}, {"minTokens", min_tokens}}}};
  j["seed"] = seed ? Json(*seed) : Json();
  return j;
}

void RunConfig::Validate() const {
  for (const auto* path : {&relations, &normalization, &checkpoint, &features, &templates,
                           &examples, &llm_fixture}) {
    if (!path->empty() && !fs::exists(*path)) {
      Fail(ErrorKind::kConfig, "file not found: " + *path);
    }
  }
  ParsePipelineMode(mode);
  ParseCandidateMode(candidates);
  if (llm_client != "fixture" && llm_client != "http") {
    Fail(ErrorKind::kConfig, "llm client must be fixture or http, got " + llm_client);
  }
  if (parallelism < 1) Fail(ErrorKind::kConfig, "parallelism must be at least 1");
  if (max_retries < 0) Fail(ErrorKind::kConfig, "max retries must be non-negative");
  for (auto t : min_triples) {
    if (t < 1) Fail(ErrorKind::kConfig, "triple-count strata must be at least 1");
  }
}

namespace {

struct Shared {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
};

void WriteOutput(const std::string& path, std::string_view text) {
  try {
    WriteFile(path, text);
  } catch (const std::exception& e) {
    Fail(ErrorKind::kIo, "cannot write " + path + ": " + e.what());
  }
}

std::string Jsonl(const std::vector<OrderedJson>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.dump(-1, ' ', false, OrderedJson::error_handler_t::replace) + "\n";
  }
  return out;
}

struct Corpus {
  std::shared_ptr<FeatureStore> features;
  BasicTokenizer basic;
  RelationNormalizer normalizer;
  std::optional<RelationList> relations;

  const Tokenizer& tokenizer() const {
    return features ? static_cast<const Tokenizer&>(*features) : basic;
  }
};

Corpus OpenCorpus(const RunConfig& config, bool require_relations) {
  Corpus c;
  c.normalizer = config.normalization.empty() ? RelationNormalizer::Default()
                                               : RelationNormalizer::Load(config.normalization);
  if (!config.relations.empty()) {
    c.relations = RelationList::Load(config.relations, &c.normalizer);
  } else if (require_relations) {
    Fail(ErrorKind::kConfig, "a relation list is required (--relations)");
  }
  if (!config.features.empty()) c.features = FeatureStore::Load(config.features);
  return c;
}

std::vector<AnnotatedSentence> LoadSentences(const std::string& path, const Corpus& corpus) {
  if (path.empty()) Fail(ErrorKind::kConfig, "no dataset given (--data)");
  if (!fs::exists(path)) Fail(ErrorKind::kConfig, "dataset not found: " + path);
  DatasetOptions options;
  options.tokenizer = &corpus.tokenizer();
  options.normalizer = &corpus.normalizer;
  options.relations = corpus.relations ? &*corpus.relations : nullptr;
  return LoadDataset(path, options);
}

std::unique_ptr<PairScoreModel> OpenModel(const RunConfig& config, const Corpus& corpus) {
  if (config.checkpoint.empty()) Fail(ErrorKind::kConfig, "a checkpoint is required (--checkpoint)");
  return LoadCheckpoint(config.checkpoint, corpus.features);
}

std::vector<std::size_t> ParseRange(const std::string& spec) {
  std::vector<std::size_t> out;
  try {
    if (const auto dots = spec.find(".."); dots != std::string::npos) {
      const auto lo = std::stoul(spec.substr(0, dots));
      const auto hi = std::stoul(spec.substr(dots + 2));
      for (auto t = lo; t <= hi; ++t) out.push_back(t);
    } else {
      for (const auto& part : Split(spec, ',')) {
        if (!Trim(part).empty()) out.push_back(std::stoul(Trim(part)));
      }
    }
  } catch (const std::exception&) {
    Fail(ErrorKind::kConfig, "bad range " + spec + " (expected a..b or a,b,c)");
  }
  return out;
}

// ---- build-dataset ---------------------------------------------------------

struct BuildArgs {
  std::string input;
  std::size_t synthetic = 0;
  std::string synthetic_config;
  std::string output = "data/built";
};

int CmdBuildDataset(const BuildArgs& args, RunConfig config, std::ostream& out) {
  if (args.input.empty() == (args.synthetic == 0)) {
    Fail(ErrorKind::kConfig, "give exactly one of --input or --synthetic");
  }
  std::vector<AnnotatedSentence> sentences;
  std::vector<std::string> relation_names;
  if (args.synthetic > 0) {
    auto synth = args.synthetic_config.empty()
                     ? DefaultSynthesisConfig()
                     : SynthesisConfig::FromJson(Json::parse(ReadFile(args.synthetic_config)));
    if (config.seed) synth.seed = *config.seed;
    BasicTokenizer tokenizer;
    sentences = GenerateSynthetic(synth, args.synthetic, tokenizer);
    for (const auto& t : synth.templates) relation_names.push_back(t.relation);
  } else {
    const auto corpus = OpenCorpus(config, /*require_relations=*/true);
    sentences = LoadSentences(args.input, corpus);
    relation_names = corpus.relations->names();
  }

  std::vector<OrderedJson> labeled;
  std::size_t positive = 0, negative = 0, skipped = 0;
  for (const auto& s : sentences) {
    SelfLabelResult result;
    try {
      result = SelfLabel(s);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kConflict && e.kind() != ErrorKind::kLabeling) throw;
      spdlog::warn("sentence {} skipped: {}", s.id, e.what());
      ++skipped;
      continue;
    }
    positive += result.positive_pairs();
    negative += result.negative_pairs();
    labeled.push_back(LabeledSentenceToJson(s, result.matrix));
  }
  const fs::path dir(args.output);
  WriteOutput((dir / "sentences.jsonl").string(), DatasetToJsonl(sentences));
  WriteOutput((dir / "labels.jsonl").string(), Jsonl(labeled));
  std::string rel_text;
  for (const auto& r : relation_names) rel_text += r + "\n";
  WriteOutput((dir / "relations.txt").string(), rel_text);
  out << sentences.size() - skipped << " sentences, " << positive << " positive / " << negative
      << " negative entity pairs\n";
  if (skipped > 0) out << skipped << " sentences skipped\n";
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string output = "model.ckpt";
  std::string checkpoint_dir;
  std::string loss_log;
};

int CmdTrain(const TrainArgs& args, RunConfig config, std::ostream& out) {
  if (args.data.empty() || !fs::exists(args.data)) {
    Fail(ErrorKind::kConfig, "labeled data not found: " + args.data);
  }
  config.train.Validate();
  std::vector<LabeledSentence> data;
  ForEachJsonLine(args.data, [&](std::size_t line, const Json& rec) {
    data.push_back(LabeledSentenceFromJson(rec, line));
  });
  TrainHooks hooks;
  hooks.checkpoint_dir = args.checkpoint_dir;
  if (config.train.encoder_mode == EncoderMode::kPretrainedAdapter) {
    if (config.features.empty()) Fail(ErrorKind::kConfig, "adapter mode needs --features");
    hooks.features = FeatureStore::Load(config.features);
  }
  const auto result = Train(data, config.train, hooks);
  SaveCheckpoint(*result.model, args.output);

  std::string log = "epoch,loss\n";
  char buf[64];
  for (const auto& e : result.history) {
    std::snprintf(buf, sizeof buf, "%d,%.10f\n", e.epoch, e.running_loss);
    log += buf;
  }
  WriteOutput(args.loss_log.empty() ? args.output + ".loss.csv" : args.loss_log, log);
  std::snprintf(buf, sizeof buf, "%.10f", result.final_loss);
  out << "trained " << result.history.size() << " epochs on " << data.size() - result.skipped
      << " sentences; final loss " << buf << "\n";
  return kExitOk;
}

// ---- filter ----------------------------------------------------------------

struct FilterArgs {
  std::string data;
  std::string mentions;
  std::string external;
  std::string output = "decisions.jsonl";
  std::string kept;
};

int CmdFilter(const FilterArgs& args, RunConfig config, std::ostream& out) {
  const auto corpus = OpenCorpus(config, false);
  const auto sentences = LoadSentences(args.data, corpus);
  const auto model = OpenModel(config, corpus);

  std::vector<OrderedJson> records;
  std::size_t kept = 0, total = 0, flagged = 0;
  if (!args.external.empty()) {
    const auto externals = ExternalPredictions::Load(args.external);
    std::vector<OrderedJson> kept_records;
    for (const auto& s : sentences) {
      const auto& triples = externals.Find(s.id);
      if (triples.empty()) continue;
      const auto decisions =
          FilterExternalTriples(model->InferMatrix(s), s, triples, config.threshold);
      std::vector<TripleAnnotation> survivors;
      for (const auto& d : decisions) {
        records.push_back(TripleDecisionToJson(s.id, d));
        ++total;
        flagged += d.flagged;
        if (d.kept) {
          ++kept;
          survivors.push_back(d.triple.triple);
        }
      }
      OrderedJson rec;
      rec["id"] = s.id;
      rec["triples"] = OrderedJson::parse(SerializeTriples(survivors));
      kept_records.push_back(std::move(rec));
    }
    if (!args.kept.empty()) WriteOutput(args.kept, Jsonl(kept_records));
  } else {
    const auto mode = ParseCandidateMode(config.candidates);
    std::optional<MentionIndex> mentions;
    if (mode == CandidateMode::kExternalNer) {
      if (args.mentions.empty()) Fail(ErrorKind::kConfig, "external-ner candidates need --mentions");
      mentions = MentionIndex::Load(args.mentions);
    }
    for (const auto& s : sentences) {
      const auto candidates = GenerateCandidates(s, mode, mentions ? &*mentions : nullptr);
      if (candidates.empty()) continue;
      for (const auto& d : FilterCandidates(model->InferMatrix(s), candidates, config.threshold)) {
        records.push_back(DecisionToJson(s.id, d));
        ++total;
        kept += d.kept;
      }
    }
  }
  WriteOutput(args.output, Jsonl(records));
  spdlog::info("{} of {} kept, {} unaligned", kept, total, flagged);
  out << kept << " of " << total << " kept";
  if (flagged > 0) out << " (" << flagged << " unaligned, passed through)";
  out << "\n";
  return kExitOk;
}

// ---- extract ---------------------------------------------------------------

struct ExtractArgs {
  std::string data;
  std::string mentions;
  std::string external;
  std::string output = "predictions.jsonl";
  std::string manifest;
  bool no_timestamps = false;
};

std::vector<FewShotExample> LoadExamples(const std::string& path) {
  std::vector<FewShotExample> out;
  ForEachJsonLine(path, [&](std::size_t line, const Json& rec) {
    try {
      FewShotExample e{rec.at("text").get<std::string>(), {}};
      for (const auto& t : rec.at("triples")) {
        e.triples.push_back({t.at("s").get<std::string>(), t.at("p").get<std::string>(),
                             t.at("o").get<std::string>()});
      }
      out.push_back(std::move(e));
    } catch (const Json::exception& ex) {
      Fail(ErrorKind::kParse, path + ":" + std::to_string(line) + ": " + ex.what());
    }
  });
  return out;
}

int CmdExtract(const ExtractArgs& args, RunConfig config, std::ostream& out) {
  PipelineOptions options;
  options.mode = ParsePipelineMode(config.mode);
  options.candidate_mode = ParseCandidateMode(config.candidates);
  options.threshold = config.threshold;
  options.retry.max_retries = config.max_retries;
  options.few_shot = config.few_shot;
  if (config.few_shot && !config.examples.empty()) options.examples = LoadExamples(config.examples);

  // Client first so that missing credentials stop the run before any work.
  std::unique_ptr<ChatClient> client;
  if (config.llm_client == "http") {
    auto settings = ClientSettings::FromEnvironment(config.llm_model);
    settings.timeout = std::chrono::seconds(config.timeout_seconds);
    client = std::make_unique<HttpChatClient>(std::move(settings));
  } else {
    if (config.llm_fixture.empty()) Fail(ErrorKind::kConfig, "fixture client needs --fixture");
    client = FixtureChatClient::Load(config.llm_fixture);
  }

  const auto corpus = OpenCorpus(config, true);
  const auto sentences = LoadSentences(args.data, corpus);
  PromptTemplates templates = PromptTemplates::Default();
  if (!config.templates.empty()) templates = PromptTemplates::FromJson(Json::parse(ReadFile(config.templates)));

  std::unique_ptr<PairScoreModel> model;
  if (options.mode != PipelineMode::kNoFiltering) model = OpenModel(config, corpus);
  std::optional<MentionIndex> mentions;
  if (!args.mentions.empty()) mentions = MentionIndex::Load(args.mentions);
  std::optional<ExternalPredictions> externals;
  if (!args.external.empty()) externals = ExternalPredictions::Load(args.external);

  PipelineResources resources;
  resources.relations = &*corpus.relations;
  resources.client = client.get();
  resources.scorer = model.get();
  resources.mentions = mentions ? &*mentions : nullptr;
  resources.externals = externals ? &*externals : nullptr;
  resources.templates = &templates;

  BatchOptions batch;
  batch.parallelism = config.parallelism;
  batch.seed = config.seed.value_or(config.train.seed);
  batch.timestamps = !args.no_timestamps;
  batch.config_snapshot = config.ToJson();
  if (!config.checkpoint.empty()) {
    batch.config_snapshot["checkpoint_digest"] = Sha256Hex(ReadFile(config.checkpoint));
  }
  const auto result = RunBatch(sentences, resources, options, batch);
  WriteOutput(args.output, result.predictions_jsonl);
  const std::string manifest_path = args.manifest.empty() ? args.output + ".manifest.json" : args.manifest;
  WriteOutput(manifest_path, result.manifest.dump(2) + "\n");

  const auto failed = result.manifest["sentences_failed"].get<std::size_t>();
  out << sentences.size() - failed << " of " << sentences.size() << " sentences extracted ("
      << ToString(options.mode) << ")\n";
  return failed == 0 ? kExitOk : kExitClient;
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string gold;
  std::string predictions;
  std::vector<std::string> strata;
  std::string curve;
  std::string curve_output;
  std::string report;
  bool fold_width = false;
};

int CmdEvaluate(const EvaluateArgs& args, RunConfig config, std::ostream& out) {
  const auto corpus = OpenCorpus(config, false);
  const auto gold = LoadSentences(args.gold, corpus);
  if (args.predictions.empty() || !fs::exists(args.predictions)) {
    Fail(ErrorKind::kConfig, "predictions not found: " + args.predictions);
  }
  const auto outcomes = JoinOutcomes(gold, LoadPredictions(args.predictions));
  MatchOptions options{args.fold_width};

  if (!args.strata.empty()) {
    config.min_triples.clear();
    config.min_tokens.clear();
    for (const auto& s : args.strata) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) Fail(ErrorKind::kConfig, "bad stratum " + s + " (t=N or len=N)");
      const auto key = s.substr(0, eq);
      const auto values = ParseRange(s.substr(eq + 1));
      auto& target = key == "t" ? config.min_triples : config.min_tokens;
      if (key != "t" && key != "len") Fail(ErrorKind::kConfig, "unknown stratum key " + key);
      target.insert(target.end(), values.begin(), values.end());
    }
  }

  std::vector<MatchReport> reports{Evaluate(outcomes, options)};
  for (auto t : config.min_triples) reports.push_back(StratifyByTriples(outcomes, t, options));
  for (auto n : config.min_tokens) reports.push_back(StratifyByLength(outcomes, n, options));
  out << RenderReports(reports);

  OrderedJson j;
  j["gold"] = args.gold;
  j["predictions"] = args.predictions;
  j["reports"] = OrderedJson::array();
  for (const auto& r : reports) j["reports"].push_back(ReportToJson(r));
  if (!args.curve.empty()) {
    const auto curve = ComplexityCurve(outcomes, ParseRange(args.curve), options);
    const auto csv = CurveToCsv(curve);
    if (args.curve_output.empty()) {
      out << csv;
    } else {
      WriteOutput(args.curve_output, csv);
    }
  }
  if (!args.report.empty()) WriteOutput(args.report, j.dump(2) + "\n");
  return kExitOk;
}

// ---- stats -----------------------------------------------------------------

struct StatsArgs {
  std::string data;
  std::string cuts = "0,50";
  bool json = false;
};

int CmdStats(const StatsArgs& args, RunConfig config, std::ostream& out) {
  const auto corpus = OpenCorpus(config, false);
  const auto rows = ComputeStats(LoadSentences(args.data, corpus), ParseRange(args.cuts));
  out << (args.json ? StatsToJson(rows).dump(2) + "\n" : RenderStatsTable(rows));
  return kExitOk;
}

// Routes the default logger to `err` for the lifetime of one command.
class ScopedLogging {
 public:
  ScopedLogging(bool verbose, std::ostream& err) : previous_(spdlog::default_logger()) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto logger = std::make_shared<spdlog::logger>("pairfilter", sink);
    logger->set_pattern("[%l] %v");
    logger->set_level(verbose ? spdlog::level::debug : spdlog::level::info);
    spdlog::set_default_logger(logger);
  }
  ~ScopedLogging() { spdlog::set_default_logger(previous_); }
  ScopedLogging(const ScopedLogging&) = delete;
  ScopedLogging& operator=(const ScopedLogging&) = delete;

 private:
  std::shared_ptr<spdlog::logger> previous_;
};

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Candidate entity-pair scoring and two-stage LLM triple extraction"};
  app.require_subcommand(1);
  Shared shared;
  app.add_option("--config", shared.config_path, "JSON run configuration");
  app.add_option("--seed", shared.seed, "Seed for generation, training and batch runs");
  app.add_flag("-v,--verbose", shared.verbose, "Debug logging");

  // Flags that override the run configuration when given.
  std::string relations, normalization, checkpoint, features, fixture, client, model, mode,
      candidates, templates, examples, encoder_mode;
  double threshold = 0, lr = 0;
  int epochs = 0, batch_size = 0, d2 = 0, retries = 0;
  std::size_t parallelism = 0;
  bool no_rope = false, few_shot = false, mean_reduction = false;

  auto* build = app.add_subcommand("build-dataset", "Normalize, tokenize and self-label a corpus");
  BuildArgs build_args;
  build->add_option("--input", build_args.input, "JSONL with text and triples");
  build->add_option("--synthetic", build_args.synthetic, "Generate this many synthetic sentences");
  build->add_option("--synthetic-config", build_args.synthetic_config, "Generator JSON");
  build->add_option("--output", build_args.output, "Output directory")->capture_default_str();
  build->add_option("--relations", relations, "Relation list, one per line");
  build->add_option("--normalization", normalization, "TSV relation name map");

  auto* train = app.add_subcommand("train", "Train the token-pair evaluation model");
  TrainArgs train_args;
  train->add_option("--data", train_args.data, "labels.jsonl from build-dataset")->required();
  train->add_option("--output", train_args.output, "Checkpoint path")->capture_default_str();
  train->add_option("--checkpoint-dir", train_args.checkpoint_dir, "Per-epoch checkpoints");
  train->add_option("--loss-log", train_args.loss_log, "CSV of per-epoch loss");
  train->add_option("--epochs", epochs, "Training epochs");
  train->add_option("--lr", lr, "Learning rate");
  train->add_option("--batch-size", batch_size, "Sentences per optimizer step");
  train->add_option("--d2", d2, "Decoder projection width");
  train->add_flag("--no-rope", no_rope, "Disable rotary position encoding");
  train->add_flag("--mean-reduction", mean_reduction, "Average the loss over labeled cells");
  train->add_option("--encoder-mode", encoder_mode, "toy-from-scratch or pretrained-adapter");
  train->add_option("--features", features, "Precomputed hidden states (adapter mode)");

  auto* filter = app.add_subcommand("filter", "Score candidate pairs or external triples");
  FilterArgs filter_args;
  filter->add_option("--data", filter_args.data, "sentences.jsonl")->required();
  filter->add_option("--checkpoint", checkpoint, "Trained model");
  filter->add_option("--candidates", candidates, "oracle-entities or external-ner");
  filter->add_option("--mentions", filter_args.mentions, "NER mentions JSONL");
  filter->add_option("--external", filter_args.external, "External predictions JSONL");
  filter->add_option("--threshold", threshold, "Keep pairs scoring above this logit");
  filter->add_option("--output", filter_args.output, "Decisions JSONL")->capture_default_str();
  filter->add_option("--kept", filter_args.kept, "Surviving external triples JSONL");
  filter->add_option("--relations", relations, "Relation list");
  filter->add_option("--features", features, "Precomputed hidden states (adapter mode)");

  auto* extract = app.add_subcommand("extract", "Run the LLM extraction pipeline");
  ExtractArgs extract_args;
  extract->add_option("--data", extract_args.data, "sentences.jsonl")->required();
  extract->add_option("--relations", relations, "Relation list");
  extract->add_option("--checkpoint", checkpoint, "Trained model");
  extract->add_option("--mode", mode, "full, no-stage1, no-stage2 or no-filtering");
  extract->add_option("--client", client, "fixture or http");
  extract->add_option("--fixture", fixture, "Canned responses JSON for the fixture client");
  extract->add_option("--model", model, "LLM model name");
  extract->add_option("--candidates", candidates, "oracle-entities or external-ner");
  extract->add_option("--mentions", extract_args.mentions, "NER mentions JSONL");
  extract->add_option("--external", extract_args.external, "External predictions JSONL");
  extract->add_option("--threshold", threshold, "Filter threshold");
  extract->add_option("--parallelism", parallelism, "Concurrent sentences");
  extract->add_option("--max-retries", retries, "Retries on transport errors");
  extract->add_option("--templates", templates, "Prompt template overrides JSON");
  extract->add_flag("--few-shot", few_shot, "Include few-shot examples");
  extract->add_option("--examples", examples, "Few-shot examples JSONL");
  extract->add_option("--output", extract_args.output, "Predictions JSONL")->capture_default_str();
  extract->add_option("--manifest", extract_args.manifest, "Run manifest path");
  extract->add_flag("--no-timestamps", extract_args.no_timestamps, "Omit wall-clock times");
  extract->add_option("--features", features, "Precomputed hidden states (adapter mode)");

  auto* evaluate = app.add_subcommand("evaluate", "Exact-match metrics with strata");
  EvaluateArgs eval_args;
  evaluate->add_option("--gold", eval_args.gold, "Gold sentences JSONL")->required();
  evaluate->add_option("--pred", eval_args.predictions, "Predictions JSONL")->required();
  evaluate->add_option("--strata", eval_args.strata, "t=N or len=N, ranges a..b allowed");
  evaluate->add_option("--curve", eval_args.curve, "Triple-count thresholds, e.g. 1..8");
  evaluate->add_option("--curve-output", eval_args.curve_output, "CSV path for the curve");
  evaluate->add_option("--report", eval_args.report, "JSON report path");
  evaluate->add_flag("--fold-width", eval_args.fold_width, "Fold fullwidth characters");
  evaluate->add_option("--relations", relations, "Relation list");

  auto* stats = app.add_subcommand("stats", "Corpus statistics by sentence length");
  StatsArgs stats_args;
  stats->add_option("--data", stats_args.data, "Sentences JSONL")->required();
  stats->add_option("--cuts", stats_args.cuts, "Minimum token counts")->capture_default_str();
  stats->add_flag("--json", stats_args.json, "JSON instead of a table");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }
  ScopedLogging logging(shared.verbose, err);

  try {
    RunConfig config = shared.config_path.empty() ? RunConfig{} : RunConfig::Load(shared.config_path);
    auto given = [&](const char* name) {
      for (auto* sub : app.get_subcommands()) {
        if (auto* opt = sub->get_option_no_throw(name); opt && opt->count() > 0) return true;
      }
      return false;
    };
    if (given("--relations")) config.relations = relations;
    if (given("--normalization")) config.normalization = normalization;
    if (given("--checkpoint")) config.checkpoint = checkpoint;
    if (given("--features")) config.features = features;
    if (given("--fixture")) config.llm_fixture = fixture;
    if (given("--client")) config.llm_client = client == "mock" ? "fixture" : client;
    if (given("--model")) config.llm_model = model;
    if (given("--mode")) config.mode = mode;
    if (given("--candidates")) config.candidates = candidates == "oracle" ? "oracle-entities" : candidates;
    if (given("--templates")) config.templates = templates;
    if (given("--examples")) config.examples = examples;
    if (given("--threshold")) config.threshold = threshold;
    if (given("--parallelism")) config.parallelism = parallelism;
    if (given("--max-retries")) config.max_retries = retries;
    if (given("--few-shot")) config.few_shot = few_shot;
    if (given("--epochs")) config.train.epochs = epochs;
    if (given("--lr")) config.train.learning_rate = lr;
    if (given("--batch-size")) config.train.batch_size = batch_size;
    if (given("--d2")) config.train.d2 = d2;
    if (given("--no-rope")) config.train.rope_enabled = false;
    if (given("--mean-reduction")) config.train.mean_reduction = true;
    if (given("--encoder-mode")) config.train.encoder_mode = ParseEncoderMode(encoder_mode);
    if (shared.seed) config.seed = shared.seed;
    if (config.seed) config.train.seed = *config.seed;
    config.Validate();

    if (build->parsed()) return CmdBuildDataset(build_args, config, out);
    if (train->parsed()) return CmdTrain(train_args, config, out);
    if (filter->parsed()) return CmdFilter(filter_args, config, out);
    if (extract->parsed()) return CmdExtract(extract_args, config, out);
    if (evaluate->parsed()) return CmdEvaluate(eval_args, config, out);
    if (stats->parsed()) return CmdStats(stats_args, config, out);
  } catch (const Error& e) {
    err << "error (" << ToString(e.kind()) << "): " << e.what() << "\n";
    return ExitCodeFor(e.kind());
  } catch (const Json::exception& e) {
    err << "error (parse): " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace pairfilter
