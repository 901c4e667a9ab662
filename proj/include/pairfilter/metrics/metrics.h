#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pairfilter/corpus/sentence.h"
#include "pairfilter/util.h"

namespace pairfilter {

struct MatchOptions {
  // Fold fullwidth forms before comparing; off by default.
  bool fold_width = false;
};

struct MatchReport {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t sentences = 0;
  std::string stratum = "all";
  bool empty_stratum = false;
};

// Builds P/R/F1 from counts; a zero denominator yields 0.
MatchReport FromCounts(std::size_t tp, std::size_t fp, std::size_t fn);

// Set semantics on both sides after trimming.
MatchReport ExactMatch(const std::vector<TripleAnnotation>& gold,
                       const std::vector<TripleAnnotation>& predicted,
                       const MatchOptions& options = {});

struct SentenceOutcome {
  std::string id;
  std::vector<TripleAnnotation> gold;
  std::vector<TripleAnnotation> predicted;
  std::size_t token_count = 0;  // content tokens
};

// Micro-averaged over all outcomes.
MatchReport Evaluate(const std::vector<SentenceOutcome>& outcomes,
                     const MatchOptions& options = {});

// Sentences with at least `min_triples` distinct gold triples. kConfig for
// min_triples < 1.
MatchReport StratifyByTriples(const std::vector<SentenceOutcome>& outcomes,
                              std::size_t min_triples, const MatchOptions& options = {});

// Sentences with at least `min_tokens` content tokens.
MatchReport StratifyByLength(const std::vector<SentenceOutcome>& outcomes,
                             std::size_t min_tokens, const MatchOptions& options = {});

struct CurvePoint {
  std::size_t min_triples = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t sentences = 0;
};

// One point per threshold; thresholds must be ascending.
std::vector<CurvePoint> ComplexityCurve(const std::vector<SentenceOutcome>& outcomes,
                                        const std::vector<std::size_t>& thresholds,
                                        const MatchOptions& options = {});
std::string CurveToCsv(const std::vector<CurvePoint>& curve);

struct SystemReport {
  std::string system;
  MatchReport report;
};

// Aligned table of system, stratum, precision and recall (as percentages).
std::string RenderLowRecallTable(const std::vector<SystemReport>& rows);

OrderedJson ReportToJson(const MatchReport& report);
std::string RenderReports(const std::vector<MatchReport>& reports);

// Reads {"id", "triples": [{"s","p","o"}]} records keyed by id.
std::map<std::string, std::vector<TripleAnnotation>> LoadPredictions(
    const std::filesystem::path& path);

// Pairs gold sentences with predictions; a sentence without a prediction
// record counts as an empty prediction.
std::vector<SentenceOutcome> JoinOutcomes(
    const std::vector<AnnotatedSentence>& gold,
    const std::map<std::string, std::vector<TripleAnnotation>>& predictions);

}  // namespace pairfilter
