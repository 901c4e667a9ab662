#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pairfilter/corpus/relations.h"
#include "pairfilter/corpus/sentence.h"
#include "pairfilter/corpus/tokenizer.h"
#include "pairfilter/util.h"

namespace pairfilter {

struct DatasetOptions {
  const Tokenizer* tokenizer = nullptr;            // required
  const RelationNormalizer* normalizer = nullptr;  // optional
  const RelationList* relations = nullptr;         // optional closed set
};

// Parses one record: {"id"?, "text", "triples": [{"s","p","o"}]}. Records
// without an id get the line number. Throws kParse for a structurally bad
// record and kValidation for an unknown predicate or an entity string that
// does not occur in the text.
AnnotatedSentence ParseSentenceRecord(const Json& record, std::size_t line_no,
                                      const DatasetOptions& options);

std::vector<AnnotatedSentence> LoadDataset(const std::filesystem::path& path,
                                           const DatasetOptions& options);

OrderedJson SentenceToJson(const AnnotatedSentence& sentence);
std::string DatasetToJsonl(const std::vector<AnnotatedSentence>& sentences);

}  // namespace pairfilter
