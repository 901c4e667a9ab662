#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pairfilter/corpus/relations.h"
#include "pairfilter/corpus/sentence.h"

namespace pairfilter {

enum class ParseStatus {
  kStrict,     // the whole response was a JSON list
  kRecovered,  // a list or individual objects were dug out of surrounding text
  kFailed,     // nothing usable
};

struct ParseResult {
  std::vector<TripleAnnotation> triples;
  ParseStatus status = ParseStatus::kFailed;
  std::size_t unknown_predicates = 0;
  std::size_t malformed_items = 0;
  std::size_t duplicates = 0;
  std::vector<std::string> diagnostics;
};

// Tolerant reader for [{"s": .., "o": .., "p": ..}, ...] responses. Never
// throws. Strings are trimmed, triples whose predicate is not in `relations`
// are dropped and counted, and duplicates keep their first position.
ParseResult ParseTriples(std::string_view response, const RelationList& relations);

// Compact list in the same format, keys in s, o, p order.
std::string SerializeTriples(const std::vector<TripleAnnotation>& triples);

// Order-preserving removal of exact duplicates.
std::vector<TripleAnnotation> DedupTriples(const std::vector<TripleAnnotation>& triples);

}  // namespace pairfilter
