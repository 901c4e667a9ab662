#include "pairfilter/filtering/filter.h"

#include <spdlog/spdlog.h>

#include <set>

#include "pairfilter/corpus/self_label.h"
#include "pairfilter/error.h"

namespace pairfilter {
namespace {

void CheckSpan(const ScoreMatrix& matrix, const TokenSpan& span, const char* role) {
  const auto n = static_cast<int>(matrix.size());
  if (span.start < 0 || span.end < span.start || span.end >= n) {
    Fail(ErrorKind::kBounds, std::string(role) + " span [" + std::to_string(span.start) + ", " +
                                 std::to_string(span.end) + "] outside a " +
                                 std::to_string(n) + "x" + std::to_string(n) + " matrix");
  }
}

TokenSpan ParseSpan(const Json& j) {
  if (!j.is_array() || j.size() != 2) Fail(ErrorKind::kParse, "span must be [start, end]");
  return {j[0].get<int>(), j[1].get<int>()};
}

std::optional<TokenSpan> Resolve(const AnnotatedSentence& sentence,
                                 const std::optional<TokenSpan>& given,
                                 const std::string& surface) {
  if (given && sentence.IsContentSpan(*given) && sentence.Surface(*given) == surface) {
    return given;
  }
  const auto found = AlignSpans(sentence, surface);
  if (found.empty()) return std::nullopt;
  return found.front();
}

}  // namespace

std::string ToString(CandidateSource source) {
  switch (source) {
    case CandidateSource::kExternalNer: return "external-ner";
    case CandidateSource::kOracleEntities: return "oracle-entities";
    case CandidateSource::kExternalTriples: return "external-triples";
  }
  return "unknown";
}

double ScoreSpanPair(const ScoreMatrix& matrix, const TokenSpan& subject,
                     const TokenSpan& object) {
  CheckSpan(matrix, subject, "subject");
  CheckSpan(matrix, object, "object");
  return matrix.scores.block(subject.start, object.start, subject.length(), object.length())
      .mean();
}

std::vector<FilterDecision> FilterCandidates(const ScoreMatrix& matrix,
                                             const std::vector<CandidatePair>& candidates,
                                             double threshold) {
  std::vector<FilterDecision> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    FilterDecision d{c, ScoreSpanPair(matrix, c.subject.span, c.object.span), false};
    d.kept = d.score > threshold;
    d.pair.score = d.score;
    out.push_back(std::move(d));
  }
  return out;
}

MentionIndex MentionIndex::Load(const std::filesystem::path& path) {
  MentionIndex index;
  ForEachJsonLine(path, [&](std::size_t line, const Json& rec) {
    try {
      std::vector<Mention> mentions;
      for (const auto& m : rec.at("mentions")) {
        mentions.push_back(
            {m.at("text").get<std::string>(), {m.at("start_tok").get<int>(), m.at("end_tok").get<int>()}});
      }
      index.Add(rec.at("id").get<std::string>(), std::move(mentions));
    } catch (const Json::exception& e) {
      Fail(ErrorKind::kParse, path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return index;
}

void MentionIndex::Add(std::string id, std::vector<Mention> mentions) {
  by_id_[std::move(id)] = std::move(mentions);
}

const std::vector<Mention>& MentionIndex::Find(const std::string& id) const {
  const auto it = by_id_.find(id);
  if (it == by_id_.end()) Fail(ErrorKind::kLookup, "no entity mentions for sentence " + id);
  return it->second;
}

CandidateMode ParseCandidateMode(const std::string& name) {
  if (name == "external-ner") return CandidateMode::kExternalNer;
  if (name == "oracle-entities" || name == "oracle") return CandidateMode::kOracleEntities;
  Fail(ErrorKind::kConfig, "unknown candidate mode " + name);
}

std::vector<CandidatePair> GenerateCandidates(const AnnotatedSentence& sentence,
                                              CandidateMode mode,
                                              const MentionIndex* mentions) {
  std::vector<Mention> entities;
  CandidateSource source = CandidateSource::kOracleEntities;
  if (mode == CandidateMode::kOracleEntities) {
    for (const auto& e : sentence.LabeledEntities()) {
      const auto spans = AlignSpans(sentence, e);
      if (spans.empty()) {
        spdlog::warn("sentence {}: entity '{}' not on token boundaries; skipped", sentence.id, e);
        continue;
      }
      entities.push_back({e, spans.front()});
    }
  } else {
    if (mentions == nullptr) Fail(ErrorKind::kConfig, "external-ner mode needs a mentions file");
    source = CandidateSource::kExternalNer;
    for (const auto& m : mentions->Find(sentence.id)) {
      if (!sentence.IsContentSpan(m.span)) {
        Fail(ErrorKind::kBounds, "sentence " + sentence.id + ": mention '" + m.surface +
                                     "' has span outside the content tokens");
      }
      if (sentence.Surface(m.span) != m.surface) {
        Fail(ErrorKind::kValidation, "sentence " + sentence.id + ": mention '" + m.surface +
                                         "' does not match tokens '" +
                                         sentence.Surface(m.span) + "'");
      }
      entities.push_back(m);
    }
  }

  std::vector<CandidatePair> out;
  for (std::size_t i = 0; i < entities.size(); ++i) {
    for (std::size_t j = 0; j < entities.size(); ++j) {
      if (i == j || entities[i] == entities[j]) continue;
      out.push_back({entities[i], entities[j], std::nullopt, source});
    }
  }
  return out;
}

ExternalPredictions ExternalPredictions::Load(const std::filesystem::path& path) {
  ExternalPredictions preds;
  ForEachJsonLine(path, [&](std::size_t line, const Json& rec) {
    try {
      std::vector<SpannedTriple> triples;
      for (const auto& t : rec.at("triples")) {
        SpannedTriple st;
        st.triple = {Trim(t.at("s").get<std::string>()), Trim(t.at("p").get<std::string>()),
                     Trim(t.at("o").get<std::string>())};
        if (t.contains("s_span") && !t["s_span"].is_null()) st.subject_span = ParseSpan(t["s_span"]);
        if (t.contains("o_span") && !t["o_span"].is_null()) st.object_span = ParseSpan(t["o_span"]);
        triples.push_back(std::move(st));
      }
      preds.Add(rec.at("id").get<std::string>(), std::move(triples));
    } catch (const Json::exception& e) {
      Fail(ErrorKind::kParse, path.string() + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return preds;
}

void ExternalPredictions::Add(std::string id, std::vector<SpannedTriple> triples) {
  auto& slot = by_id_[std::move(id)];
  for (auto& t : triples) slot.push_back(std::move(t));
}

const std::vector<SpannedTriple>& ExternalPredictions::Find(const std::string& id) const {
  static const std::vector<SpannedTriple> kEmpty;
  const auto it = by_id_.find(id);
  return it == by_id_.end() ? kEmpty : it->second;
}

std::vector<TripleDecision> FilterExternalTriples(const ScoreMatrix& matrix,
                                                  const AnnotatedSentence& sentence,
                                                  const std::vector<SpannedTriple>& triples,
                                                  double threshold) {
  std::vector<TripleDecision> out;
  out.reserve(triples.size());
  for (const auto& t : triples) {
    TripleDecision d{t, std::nullopt, false, false};
    d.triple.subject_span = Resolve(sentence, t.subject_span, t.triple.subject);
    d.triple.object_span = Resolve(sentence, t.object_span, t.triple.object);
    if (!d.triple.subject_span || !d.triple.object_span) {
      spdlog::warn("sentence {}: cannot align ({}, {}, {}); passed through unfiltered",
                   sentence.id, t.triple.subject, t.triple.predicate, t.triple.object);
      d.triple = t;
      d.flagged = true;
      d.kept = true;
    } else {
      d.score = ScoreSpanPair(matrix, *d.triple.subject_span, *d.triple.object_span);
      d.kept = *d.score > threshold;
    }
    out.push_back(std::move(d));
  }
  return out;
}

namespace {

OrderedJson MentionToJson(const Mention& m) {
  OrderedJson j;
  j["text"] = m.surface;
  j["span"] = {m.span.start, m.span.end};
  return j;
}

}  // namespace

OrderedJson DecisionToJson(const std::string& sentence_id, const FilterDecision& decision) {
  OrderedJson j;
  j["id"] = sentence_id;
  j["pair"] = {{"subject", MentionToJson(decision.pair.subject)},
               {"object", MentionToJson(decision.pair.object)},
               {"source", ToString(decision.pair.source)}};
  j["score"] = decision.score;
  j["kept"] = decision.kept;
  return j;
}

OrderedJson TripleDecisionToJson(const std::string& sentence_id, const TripleDecision& decision) {
  OrderedJson j;
  j["id"] = sentence_id;
  j["s"] = decision.triple.triple.subject;
  j["p"] = decision.triple.triple.predicate;
  j["o"] = decision.triple.triple.object;
  auto span = [](const std::optional<TokenSpan>& s) {
    return s ? OrderedJson::array({s->start, s->end}) : OrderedJson();
  };
  j["s_span"] = span(decision.triple.subject_span);
  j["o_span"] = span(decision.triple.object_span);
  j["score"] = decision.score ? OrderedJson(*decision.score) : OrderedJson();
  j["kept"] = decision.kept;
  j["flagged"] = decision.flagged;
  return j;
}

}  // namespace pairfilter

namespace pairfilter {

double PairClassification::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double PairClassification::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double PairClassification::f1() const {
  const double p = precision(), r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

PairClassification ClassifyEntityPairs(const PairScorer& scorer,
                                       const std::vector<AnnotatedSentence>& sentences,
                                       double threshold) {
  PairClassification out;
  for (const auto& s : sentences) {
    const auto candidates = GenerateCandidates(s, CandidateMode::kOracleEntities);
    if (candidates.empty()) continue;
    std::set<std::pair<std::string, std::string>> related;
    for (const auto& t : s.triples) related.emplace(t.subject, t.object);
    for (const auto& d : FilterCandidates(scorer.InferMatrix(s), candidates, threshold)) {
      const bool gold = related.count({d.pair.subject.surface, d.pair.object.surface}) > 0;
      if (d.kept && gold) ++out.tp;
      if (d.kept && !gold) ++out.fp;
      if (!d.kept && gold) ++out.fn;
      if (!d.kept && !gold) ++out.tn;
    }
  }
  return out;
}

}  // namespace pairfilter
