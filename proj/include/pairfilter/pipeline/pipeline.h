#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pairfilter/corpus/relations.h"
#include "pairfilter/corpus/sentence.h"
#include "pairfilter/error.h"
#include "pairfilter/filtering/filter.h"
#include "pairfilter/model/pair_score_model.h"
#include "pairfilter/pipeline/chat_client.h"
#include "pairfilter/pipeline/prompts.h"
#include "pairfilter/pipeline/triples.h"

namespace pairfilter {

enum class PipelineMode { kFull, kNoStage1, kNoStage2, kNoFiltering };
std::string ToString(PipelineMode mode);
PipelineMode ParsePipelineMode(const std::string& name);

enum class Provenance { kStage1, kStage2 };
std::string ToString(Provenance p);

struct StageCall {
  std::string stage;
  std::string prompt;
  std::string response;  // verbatim, last attempt
  int attempts = 0;
  bool reminded = false;  // a format reminder was appended once
  ParseResult parse;
};

struct ExtractionResult {
  std::string sentence_id;
  std::vector<TripleAnnotation> triples;
  std::vector<Provenance> provenance;  // parallel to triples
  std::vector<TripleAnnotation> stage1;
  std::vector<SurfacePair> candidates;  // pairs injected into the prompt
  std::vector<FilterDecision> decisions;
  std::vector<StageCall> calls;
  std::vector<std::string> diagnostics;
  bool fell_back = false;  // stage-2 output unusable; stage-1 result used
};

// Thrown when a client call fails after retries. Carries what was done so far.
class PipelineFailure : public Error {
 public:
  PipelineFailure(const std::string& message, ExtractionResult partial)
      : Error(ErrorKind::kPipeline, message), partial_(std::move(partial)) {}
  const ExtractionResult& partial() const { return partial_; }

 private:
  ExtractionResult partial_;
};

// Shared, read-only collaborators. The client must be safe for concurrent use.
struct PipelineResources {
  const RelationList* relations = nullptr;
  ChatClient* client = nullptr;
  const PairScorer* scorer = nullptr;             // all modes but no-filtering
  const MentionIndex* mentions = nullptr;         // external-ner candidates
  const ExternalPredictions* externals = nullptr; // no-stage2
  const PromptTemplates* templates = nullptr;     // defaults when null
};

struct PipelineOptions {
  PipelineMode mode = PipelineMode::kFull;
  CandidateMode candidate_mode = CandidateMode::kExternalNer;
  double threshold = 0.0;
  bool few_shot = false;
  std::vector<FewShotExample> examples;
  RetryPolicy retry;
};

// kConfig when a collaborator required by the mode is missing.
void CheckResources(const PipelineResources& resources, const PipelineOptions& options);

ExtractionResult RunPipeline(const AnnotatedSentence& sentence,
                             const PipelineResources& resources,
                             const PipelineOptions& options);

struct BatchEntry {
  std::string id;
  std::optional<ExtractionResult> result;
  std::string error;        // empty on success
  std::string error_kind;
};

struct BatchOutput {
  std::vector<BatchEntry> entries;  // input order
  OrderedJson manifest;
  std::string predictions_jsonl;
};

struct BatchOptions {
  std::size_t parallelism = 1;
  std::uint64_t seed = 0;
  Json config_snapshot;  // echoed into the manifest
  bool timestamps = true;
};

// Runs sentences on `parallelism` workers. Each worker handles one sentence
// at a time, so at most `parallelism` client calls are in flight. Failures are
// recorded per sentence.
BatchOutput RunBatch(const std::vector<AnnotatedSentence>& sentences,
                     const PipelineResources& resources, const PipelineOptions& options,
                     const BatchOptions& batch);

OrderedJson PredictionToJson(const ExtractionResult& result);

}  // namespace pairfilter
