#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pairfilter/corpus/sentence.h"
#include "pairfilter/model/decoder.h"
#include "pairfilter/model/pair_score_model.h"
#include "pairfilter/util.h"

namespace pairfilter {

enum class CandidateSource { kExternalNer, kOracleEntities, kExternalTriples };
std::string ToString(CandidateSource source);

struct Mention {
  std::string surface;
  TokenSpan span;
  bool operator==(const Mention&) const = default;
};

struct CandidatePair {
  Mention subject;
  Mention object;
  std::optional<double> score;
  CandidateSource source = CandidateSource::kOracleEntities;
};

struct FilterDecision {
  CandidatePair pair;
  double score = 0;
  bool kept = false;  // score > threshold
};

// Mean of the logits over subject rows x object columns. kBounds when either
// span leaves the matrix.
double ScoreSpanPair(const ScoreMatrix& matrix, const TokenSpan& subject,
                     const TokenSpan& object);

// Scores every candidate once and keeps those strictly above `threshold`.
// Output order follows input order.
std::vector<FilterDecision> FilterCandidates(const ScoreMatrix& matrix,
                                             const std::vector<CandidatePair>& candidates,
                                             double threshold = 0.0);

// Entity mentions produced by an external recognizer, one JSONL record per
// sentence: {"id", "mentions": [{"text", "start_tok", "end_tok"}]}. Token
// indices count the leading [CLS] as 0 and are inclusive.
class MentionIndex {
 public:
  static MentionIndex Load(const std::filesystem::path& path);
  void Add(std::string id, std::vector<Mention> mentions);
  // kLookup for an unknown id.
  const std::vector<Mention>& Find(const std::string& id) const;
  bool Contains(const std::string& id) const { return by_id_.count(id) > 0; }

 private:
  std::map<std::string, std::vector<Mention>> by_id_;
};

enum class CandidateMode { kExternalNer, kOracleEntities };
CandidateMode ParseCandidateMode(const std::string& name);

// All ordered pairs of distinct entities. Oracle mode takes the first aligned
// occurrence of each gold entity; external mode takes the supplied mentions,
// whose surfaces must match the tokens they cover.
std::vector<CandidatePair> GenerateCandidates(const AnnotatedSentence& sentence,
                                              CandidateMode mode,
                                              const MentionIndex* mentions = nullptr);

struct SpannedTriple {
  TripleAnnotation triple;
  std::optional<TokenSpan> subject_span;
  std::optional<TokenSpan> object_span;
};

// Output of an external extractor: {"id", "triples": [{"s","p","o","s_span",
// "o_span"}]}; spans optional, same indexing as mentions.
class ExternalPredictions {
 public:
  static ExternalPredictions Load(const std::filesystem::path& path);
  void Add(std::string id, std::vector<SpannedTriple> triples);
  // Empty when the id is absent.
  const std::vector<SpannedTriple>& Find(const std::string& id) const;
  const std::map<std::string, std::vector<SpannedTriple>>& all() const { return by_id_; }

 private:
  std::map<std::string, std::vector<SpannedTriple>> by_id_;
};

struct TripleDecision {
  SpannedTriple triple;          // spans resolved where possible
  std::optional<double> score;   // absent when flagged
  bool kept = false;
  bool flagged = false;          // could not be aligned; kept unchanged
};

// Pair-level decision per triple; the predicate is never consulted. Spans
// that are missing or do not cover the stated surface are realigned by text.
std::vector<TripleDecision> FilterExternalTriples(const ScoreMatrix& matrix,
                                                  const AnnotatedSentence& sentence,
                                                  const std::vector<SpannedTriple>& triples,
                                                  double threshold = 0.0);

OrderedJson DecisionToJson(const std::string& sentence_id, const FilterDecision& decision);
OrderedJson TripleDecisionToJson(const std::string& sentence_id, const TripleDecision& decision);

}  // namespace pairfilter

namespace pairfilter {

struct PairClassification {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  double precision() const;
  double recall() const;
  double f1() const;
};

// Binary classification of every ordered pair of distinct gold entities
// (first occurrence spans) against its gold relatedness, one matrix per
// sentence.
PairClassification ClassifyEntityPairs(const PairScorer& scorer,
                                       const std::vector<AnnotatedSentence>& sentences,
                                       double threshold = 0.0);

}  // namespace pairfilter
