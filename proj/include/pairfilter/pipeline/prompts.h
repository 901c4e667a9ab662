#pragma once

#include <string>
#include <vector>

#include "pairfilter/corpus/relations.h"
#include "pairfilter/corpus/sentence.h"
#include "pairfilter/util.h"

namespace pairfilter {

struct FewShotExample {
  std::string sentence;
  std::vector<TripleAnnotation> triples;
};

struct SurfacePair {
  std::string subject;
  std::string object;
  bool operator==(const SurfacePair&) const = default;
};

// Prompt bodies with {placeholder} slots.
//   stage1:     {relations} {sentence} {examples}
//   stage2:     {relations} {sentence} {results} {candidates} {instruction}
//   restricted: {relations} {sentence} {candidates} {examples}
struct PromptTemplates {
  std::string stage1;
  std::string stage2;
  std::string restricted;

  static PromptTemplates Default();
  // JSON object with any of "stage1", "stage2", "restricted"; missing entries
  // keep the default body. Throws kConfig when a required slot is absent.
  static PromptTemplates FromJson(const Json& j);
  void Validate() const;

  // Hex SHA-256 of each body.
  Json Digests() const;
};

// kConfig for an empty relation list.
std::string RenderStage1(const PromptTemplates& templates, const std::string& sentence,
                         const RelationList& relations,
                         const std::vector<FewShotExample>& examples = {});

// An empty pair list renders a recheck-only prompt.
std::string RenderStage2(const PromptTemplates& templates, const std::string& sentence,
                         const RelationList& relations,
                         const std::vector<TripleAnnotation>& stage1_results,
                         const std::vector<SurfacePair>& pairs);

// Single-call prompt limited to the given pairs.
std::string RenderRestricted(const PromptTemplates& templates, const std::string& sentence,
                             const RelationList& relations,
                             const std::vector<SurfacePair>& pairs,
                             const std::vector<FewShotExample>& examples = {});

// "(s1, o1),(s2, o2)" in input order.
std::string FormatPairs(const std::vector<SurfacePair>& pairs);

// Appended to a prompt whose response could not be parsed.
extern const char* const kFormatReminder;

}  // namespace pairfilter
