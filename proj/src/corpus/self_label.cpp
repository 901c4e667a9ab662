#include "pairfilter/corpus/self_label.h"

#include <algorithm>
#include <map>
#include <set>

#include "pairfilter/error.h"

namespace pairfilter {

std::size_t PairLabelMatrix::Count(std::int8_t y) const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), y));
}

std::size_t SelfLabelResult::positive_pairs() const {
  return static_cast<std::size_t>(std::count_if(
      entity_pairs.begin(), entity_pairs.end(),
      [](const EntityPairLabel& p) { return p.label > 0; }));
}

std::size_t SelfLabelResult::negative_pairs() const {
  return entity_pairs.size() - positive_pairs();
}

std::vector<TokenSpan> AlignSpans(const AnnotatedSentence& sentence,
                                  std::string_view entity) {
  std::vector<TokenSpan> spans;
  if (entity.empty() || sentence.tokens.size() < 3) return spans;

  // Content tokens keyed by start and end byte offsets.
  std::map<std::size_t, int> starts;
  std::map<std::size_t, int> ends;
  const int last = static_cast<int>(sentence.tokens.size()) - 1;
  for (int i = 1; i < last; ++i) {
    starts.emplace(sentence.offsets[i].begin, i);
    ends.emplace(sentence.offsets[i].end, i);
  }

  std::size_t pos = sentence.text.find(entity);
  while (pos != std::string::npos) {
    const auto s = starts.find(pos);
    const auto e = ends.find(pos + entity.size());
    if (s != starts.end() && e != ends.end() && s->second <= e->second) {
      spans.push_back({s->second, e->second});
    }
    pos = sentence.text.find(entity, pos + 1);
  }
  return spans;
}

std::vector<TokenPairLabel> SplitToTokenPairs(const TokenSpan& subject,
                                              const TokenSpan& object,
                                              std::int8_t label) {
  if (subject.start < 1 || object.start < 1 || subject.end < subject.start ||
      object.end < object.start) {
    Fail(ErrorKind::kBounds, "span outside the content-token range");
  }
  std::vector<TokenPairLabel> out;
  out.reserve(static_cast<std::size_t>(subject.length() * object.length()));
  for (int i = subject.start; i <= subject.end; ++i) {
    for (int j = object.start; j <= object.end; ++j) {
      out.push_back({i, j, label});
    }
  }
  return out;
}

void ApplyTokenPairs(PairLabelMatrix& matrix,
                     const std::vector<TokenPairLabel>& pairs) {
  const auto n = static_cast<int>(matrix.size());
  for (const auto& p : pairs) {
    if (p.row < 1 || p.col < 1 || p.row >= n - 1 || p.col >= n - 1) {
      Fail(ErrorKind::kBounds, "token pair (" + std::to_string(p.row) + ", " +
                                   std::to_string(p.col) +
                                   ") touches a boundary token");
    }
    const auto prior = matrix.at(p.row, p.col);
    if (prior != 0 && prior != p.label) {
      Fail(ErrorKind::kConflict, "token pair (" + std::to_string(p.row) + ", " +
                                     std::to_string(p.col) +
                                     ") labeled both positive and negative");
    }
    matrix.set(p.row, p.col, p.label);
  }
}

SelfLabelResult SelfLabel(const AnnotatedSentence& sentence) {
  SelfLabelResult result;
  result.matrix = PairLabelMatrix(sentence.size());

  const auto entities = sentence.LabeledEntities();
  std::map<std::string, std::vector<TokenSpan>> spans;
  for (const auto& e : entities) {
    auto found = AlignSpans(sentence, e);
    if (found.empty()) {
      Fail(ErrorKind::kLabeling, "sentence " + sentence.id + ": entity \"" + e +
                                     "\" does not align to token boundaries");
    }
    spans.emplace(e, std::move(found));
  }

  std::set<std::pair<std::string, std::string>> positive;
  for (const auto& t : sentence.triples) positive.emplace(t.subject, t.object);

  // Positives first so that a positive/negative clash on a shared cell is
  // reported regardless of entity order.
  for (const auto& [s, o] : positive) {
    result.entity_pairs.push_back({s, o, 1});
  }
  for (const auto& s : entities) {
    for (const auto& o : entities) {
      if (s == o || positive.contains({s, o})) continue;
      result.entity_pairs.push_back({s, o, -1});
    }
  }

  for (const auto& pair : result.entity_pairs) {
    for (const auto& ss : spans.at(pair.subject)) {
      for (const auto& os : spans.at(pair.object)) {
        ApplyTokenPairs(result.matrix, SplitToTokenPairs(ss, os, pair.label));
      }
    }
  }
  return result;
}

AuditReport FalseNegativeAudit(
    const AnnotatedSentence& sentence,
    const std::vector<std::pair<std::string, std::string>>& related_pairs) {
  AuditReport report;
  report.sentence_id = sentence.id;
  if (related_pairs.empty()) return report;
  const std::set<std::pair<std::string, std::string>> oracle(
      related_pairs.begin(), related_pairs.end());
  for (const auto& pair : SelfLabel(sentence).entity_pairs) {
    if (pair.label < 0 && oracle.contains({pair.subject, pair.object})) {
      report.flagged.push_back(pair);
    }
  }
  return report;
}

OrderedJson LabeledSentenceToJson(const AnnotatedSentence& sentence,
                                  const PairLabelMatrix& labels) {
  OrderedJson j;
  j["id"] = sentence.id;
  j["n"] = labels.size();
  j["tokens"] = sentence.tokens;
  auto cells = OrderedJson::array();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (const auto y = labels.at(i, k); y != 0) {
        cells.push_back({i, k, static_cast<int>(y)});
      }
    }
  }
  j["cells"] = std::move(cells);
  return j;
}

LabeledSentence LabeledSentenceFromJson(const Json& record, std::size_t line_no) {
  const auto where = "line " + std::to_string(line_no);
  try {
    LabeledSentence out;
    out.id = record.at("id").get<std::string>();
    out.tokens = record.at("tokens").get<std::vector<std::string>>();
    const auto n = record.at("n").get<std::size_t>();
    if (n != out.tokens.size() || n < 3) {
      Fail(ErrorKind::kParse, where + ": n does not match token count");
    }
    out.labels = PairLabelMatrix(n);
    for (const auto& cell : record.at("cells")) {
      const auto i = cell.at(0).get<std::size_t>();
      const auto k = cell.at(1).get<std::size_t>();
      const auto y = cell.at(2).get<int>();
      if (i >= n || k >= n || (y != 1 && y != -1)) {
        Fail(ErrorKind::kParse, where + ": invalid cell");
      }
      out.labels.set(i, k, static_cast<std::int8_t>(y));
    }
    return out;
  } catch (const Json::exception& e) {
    Fail(ErrorKind::kParse, where + ": " + e.what());
  }
}

}  // namespace pairfilter
