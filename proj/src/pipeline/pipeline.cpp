#include "pairfilter/pipeline/pipeline.h"

#include <spdlog/spdlog.h>

#include <atomic>
#include <ctime>
#include <set>
#include <thread>

namespace pairfilter {
namespace {

std::string UtcNow() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class SentenceRun {
 public:
  SentenceRun(const AnnotatedSentence& sentence, const PipelineResources& resources,
              const PipelineOptions& options)
      : sentence_(sentence),
        resources_(resources),
        options_(options),
        templates_(resources.templates ? *resources.templates : PromptTemplates::Default()) {
    result_.sentence_id = sentence.id;
  }

  ExtractionResult Run() {
    if (resources_.relations->empty()) {
      result_.diagnostics.push_back("relation list is empty; nothing to extract");
      return std::move(result_);
    }
    switch (options_.mode) {
      case PipelineMode::kFull:
      case PipelineMode::kNoFiltering: RunTwoStage(); break;
      case PipelineMode::kNoStage2: RunNoStage2(); break;
      case PipelineMode::kNoStage1: RunRestricted(); break;
    }
    return std::move(result_);
  }

 private:
  const std::vector<FewShotExample>& Examples() const {
    static const std::vector<FewShotExample> kNone;
    return options_.few_shot ? options_.examples : kNone;
  }

  StageCall& Call(const std::string& stage, const std::string& prompt) {
    StageCall call;
    call.stage = stage;
    call.prompt = prompt;
    try {
      ChatRequest req{sentence_.id, stage, prompt};
      auto outcome = CallWithRetry(*resources_.client, req, options_.retry);
      call.parse = ParseTriples(outcome.response, *resources_.relations);
      call.attempts = outcome.attempts;
      call.response = std::move(outcome.response);
      if (call.parse.status == ParseStatus::kFailed) {
        req.prompt += kFormatReminder;
        outcome = CallWithRetry(*resources_.client, req, options_.retry);
        call.parse = ParseTriples(outcome.response, *resources_.relations);
        call.attempts += outcome.attempts;
        call.response = std::move(outcome.response);
        call.reminded = true;
      }
    } catch (const Error& e) {
      result_.calls.push_back(std::move(call));
      throw PipelineFailure(sentence_.id + " " + stage + ": " + e.what(), result_);
    }
    for (const auto& d : call.parse.diagnostics) result_.diagnostics.push_back(stage + ": " + d);
    result_.calls.push_back(std::move(call));
    return result_.calls.back();
  }

  std::vector<CandidatePair> Candidates() const {
    return GenerateCandidates(sentence_, options_.candidate_mode, resources_.mentions);
  }

  std::vector<SurfacePair> KeptPairs(const std::vector<CandidatePair>& candidates) {
    std::vector<SurfacePair> pairs;
    auto add = [&](const CandidatePair& c) {
      SurfacePair p{c.subject.surface, c.object.surface};
      if (std::find(pairs.begin(), pairs.end(), p) == pairs.end()) pairs.push_back(std::move(p));
    };
    if (options_.mode == PipelineMode::kNoFiltering) {
      for (const auto& c : candidates) add(c);
      return pairs;
    }
    const auto matrix = resources_.scorer->InferMatrix(sentence_);
    result_.decisions = FilterCandidates(matrix, candidates, options_.threshold);
    for (const auto& d : result_.decisions) {
      if (d.kept) add(d.pair);
    }
    return pairs;
  }

  void SetFinal(std::vector<TripleAnnotation> triples) {
    result_.triples = DedupTriples(triples);
    const std::set<TripleAnnotation> first(result_.stage1.begin(), result_.stage1.end());
    result_.provenance.clear();
    for (const auto& t : result_.triples) {
      result_.provenance.push_back(first.count(t) ? Provenance::kStage1 : Provenance::kStage2);
    }
  }

  void RunStage1() {
    const auto& call = Call("stage1", RenderStage1(templates_, sentence_.text,
                                                   *resources_.relations, Examples()));
    result_.stage1 = call.parse.triples;
  }

  void RunTwoStage() {
    RunStage1();
    result_.candidates = KeptPairs(Candidates());
    const auto& call = Call("stage2", RenderStage2(templates_, sentence_.text, *resources_.relations,
                                                   result_.stage1, result_.candidates));
    if (call.parse.status == ParseStatus::kFailed) {
      result_.fell_back = true;
      result_.diagnostics.push_back("stage2 output unusable; keeping stage1 result");
      SetFinal(result_.stage1);
    } else {
      SetFinal(call.parse.triples);
    }
  }

  void RunNoStage2() {
    RunStage1();
    const auto matrix = resources_.scorer->InferMatrix(sentence_);
    auto merged = result_.stage1;
    for (const auto& d : FilterExternalTriples(matrix, sentence_,
                                               resources_.externals->Find(sentence_.id),
                                               options_.threshold)) {
      if (!d.kept) continue;
      if (!resources_.relations->Contains(d.triple.triple.predicate)) {
        result_.diagnostics.push_back("external triple with unknown predicate dropped: " +
                                      d.triple.triple.predicate);
        continue;
      }
      if (d.flagged) {
        result_.diagnostics.push_back("external triple kept without alignment: (" +
                                      d.triple.triple.subject + ", " + d.triple.triple.object + ")");
      }
      merged.push_back(d.triple.triple);
    }
    SetFinal(std::move(merged));
  }

  void RunRestricted() {
    result_.candidates = KeptPairs(Candidates());
    const auto& call =
        Call("restricted", RenderRestricted(templates_, sentence_.text, *resources_.relations,
                                            result_.candidates, Examples()));
    SetFinal(call.parse.triples);
  }

  const AnnotatedSentence& sentence_;
  const PipelineResources& resources_;
  const PipelineOptions& options_;
  PromptTemplates templates_;
  ExtractionResult result_;
};

}  // namespace

std::string ToString(PipelineMode mode) {
  switch (mode) {
    case PipelineMode::kFull: return "full";
    case PipelineMode::kNoStage1: return "no-stage1";
    case PipelineMode::kNoStage2: return "no-stage2";
    case PipelineMode::kNoFiltering: return "no-filtering";
  }
  return "unknown";
}

PipelineMode ParsePipelineMode(const std::string& name) {
  for (auto m : {PipelineMode::kFull, PipelineMode::kNoStage1, PipelineMode::kNoStage2,
                 PipelineMode::kNoFiltering}) {
    if (ToString(m) == name) return m;
  }
  Fail(ErrorKind::kConfig, "unknown pipeline mode " + name +
                               " (expected full, no-stage1, no-stage2 or no-filtering)");
}

std::string ToString(Provenance p) { return p == Provenance::kStage1 ? "stage1" : "stage2"; }

void CheckResources(const PipelineResources& resources, const PipelineOptions& options) {
  if (resources.relations == nullptr) Fail(ErrorKind::kConfig, "pipeline needs a relation list");
  if (resources.client == nullptr) Fail(ErrorKind::kConfig, "pipeline needs a chat client");
  if (options.mode != PipelineMode::kNoFiltering && resources.scorer == nullptr) {
    Fail(ErrorKind::kConfig, "mode " + ToString(options.mode) + " needs a trained model");
  }
  if (options.mode != PipelineMode::kNoStage2 &&
      options.candidate_mode == CandidateMode::kExternalNer && resources.mentions == nullptr) {
    Fail(ErrorKind::kConfig, "external-ner candidates need a mentions file");
  }
  if (options.mode == PipelineMode::kNoStage2 && resources.externals == nullptr) {
    Fail(ErrorKind::kConfig, "mode no-stage2 needs external predictions");
  }
  if (resources.templates) resources.templates->Validate();
}

ExtractionResult RunPipeline(const AnnotatedSentence& sentence,
                             const PipelineResources& resources,
                             const PipelineOptions& options) {
  CheckResources(resources, options);
  return SentenceRun(sentence, resources, options).Run();
}

OrderedJson PredictionToJson(const ExtractionResult& result) {
  OrderedJson j;
  j["id"] = result.sentence_id;
  j["triples"] = OrderedJson::parse(SerializeTriples(result.triples));
  auto prov = OrderedJson::array();
  for (auto p : result.provenance) prov.push_back(ToString(p));
  j["provenance"] = std::move(prov);
  return j;
}

BatchOutput RunBatch(const std::vector<AnnotatedSentence>& sentences,
                     const PipelineResources& resources, const PipelineOptions& options,
                     const BatchOptions& batch) {
  if (batch.parallelism < 1) Fail(ErrorKind::kConfig, "parallelism must be at least 1");
  CheckResources(resources, options);
  const std::string started = UtcNow();

  BatchOutput out;
  out.entries.resize(sentences.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < sentences.size(); i = next++) {
      auto& entry = out.entries[i];
      entry.id = sentences[i].id;
      try {
        entry.result = SentenceRun(sentences[i], resources, options).Run();
      } catch (const PipelineFailure& e) {
        entry.result = e.partial();
        entry.error = e.what();
        entry.error_kind = std::string(ToString(e.kind()));
      } catch (const Error& e) {
        entry.error = e.what();
        entry.error_kind = std::string(ToString(e.kind()));
      } catch (const std::exception& e) {
        entry.error = e.what();
        entry.error_kind = "internal";
      }
      if (!entry.error.empty()) spdlog::error("sentence {}: {}", entry.id, entry.error);
    }
  };
  const std::size_t workers = std::min(batch.parallelism, std::max<std::size_t>(sentences.size(), 1));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  const auto templates = resources.templates ? *resources.templates : PromptTemplates::Default();
  auto status = OrderedJson::array();
  std::size_t failed = 0;
  for (const auto& e : out.entries) {
    OrderedJson s;
    s["id"] = e.id;
    s["status"] = e.error.empty() ? "ok" : "error";
    if (!e.error.empty()) {
      ++failed;
      s["error_kind"] = e.error_kind;
      s["error"] = e.error;
    } else {
      out.predictions_jsonl += PredictionToJson(*e.result).dump(-1, ' ', false,
                                                                 OrderedJson::error_handler_t::replace) + "\n";
    }
    if (e.result) {
      std::string prompts;
      for (const auto& c : e.result->calls) prompts += c.prompt + '\x1f' + c.response + '\x1e';
      s["exchange_digest"] = Sha256Hex(prompts);
      s["fell_back"] = e.result->fell_back;
      s["candidates"] = e.result->candidates.size();
    }
    status.push_back(std::move(s));
  }

  auto& m = out.manifest;
  m["mode"] = ToString(options.mode);
  m["llm_model"] = resources.client->model_name();
  m["scorer"] = resources.scorer ? OrderedJson(resources.scorer->identity()) : OrderedJson();
  m["config"] = batch.config_snapshot;
  m["config_digest"] = Sha256Hex(batch.config_snapshot.dump());
  m["template_digests"] = templates.Digests();
  m["seed"] = batch.seed;
  m["parallelism"] = batch.parallelism;
  m["threshold"] = options.threshold;
  if (batch.timestamps) {
    m["started_at"] = started;
    m["finished_at"] = UtcNow();
  }
  m["sentences_total"] = sentences.size();
  m["sentences_failed"] = failed;
  m["predictions_digest"] = Sha256Hex(out.predictions_jsonl);
  m["sentences"] = std::move(status);
  return out;
}

}  // namespace pairfilter
