#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pairfilter/corpus/sentence.h"
#include "pairfilter/util.h"

namespace pairfilter {

// One column group of the complex-sentence statistics table.
struct DatasetStats {
  std::size_t length_cut = 0;       // keep sentences with |T| >= cut
  std::size_t sentence_count = 0;
  std::optional<double> avg_entities;  // absent when sentence_count == 0
  std::optional<double> avg_triples;
};

// avgE counts distinct labeled entity strings; avgR counts distinct triples.
std::vector<DatasetStats> ComputeStats(const std::vector<AnnotatedSentence>& dataset,
                                       const std::vector<std::size_t>& length_cuts);

OrderedJson StatsToJson(const std::vector<DatasetStats>& rows);

// Aligned text table; empty strata print "-".
std::string RenderStatsTable(const std::vector<DatasetStats>& rows);

}  // namespace pairfilter
