#include "pairfilter/corpus/stats.h"

#include <cstdio>
#include <set>

namespace pairfilter {

std::vector<DatasetStats> ComputeStats(const std::vector<AnnotatedSentence>& dataset,
                                       const std::vector<std::size_t>& length_cuts) {
  std::vector<DatasetStats> rows;
  for (const auto cut : length_cuts) {
    DatasetStats row;
    row.length_cut = cut;
    double entities = 0.0;
    double triples = 0.0;
    for (const auto& s : dataset) {
      if (s.content_length() < cut) continue;
      ++row.sentence_count;
      entities += static_cast<double>(s.LabeledEntities().size());
      triples += static_cast<double>(
          std::set<TripleAnnotation>(s.triples.begin(), s.triples.end()).size());
    }
    if (row.sentence_count > 0) {
      const auto n = static_cast<double>(row.sentence_count);
      row.avg_entities = entities / n;
      row.avg_triples = triples / n;
    }
    rows.push_back(row);
  }
  return rows;
}

OrderedJson StatsToJson(const std::vector<DatasetStats>& rows) {
  auto out = OrderedJson::array();
  for (const auto& r : rows) {
    OrderedJson j;
    j["min_tokens"] = r.length_cut;
    j["avgE"] = r.avg_entities ? OrderedJson(*r.avg_entities) : OrderedJson();
    j["avgR"] = r.avg_triples ? OrderedJson(*r.avg_triples) : OrderedJson();
    j["sentences"] = r.sentence_count;
    out.push_back(std::move(j));
  }
  return out;
}

std::string RenderStatsTable(const std::vector<DatasetStats>& rows) {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%-10s %8s %8s %8s\n", "|T|>=", "avgE", "avgR",
                "#sen");
  out += line;
  for (const auto& r : rows) {
    if (r.sentence_count == 0) {
      std::snprintf(line, sizeof line, "%-10zu %8s %8s %8s\n", r.length_cut, "-",
                    "-", "-");
    } else {
      std::snprintf(line, sizeof line, "%-10zu %8.1f %8.1f %8zu\n", r.length_cut,
                    *r.avg_entities, *r.avg_triples, r.sentence_count);
    }
    out += line;
  }
  return out;
}

}  // namespace pairfilter
