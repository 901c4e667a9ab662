#include "pairfilter/pipeline/prompts.h"

#include "pairfilter/error.h"
#include "pairfilter/pipeline/triples.h"

namespace pairfilter {
namespace {

constexpr const char* kFormatLine =
    R"(Please output according to the specified format: [{"s": subject1, "o": object1, "p": relation1}, {"s": subject2, "o": object2, "p": relation2},...])";

const std::string kStage1 = std::string(
    "Pre-define the following relation list r, please extract all triples containing the "
    "above relations from the given sentence S.\n"
    "Note that the relation name of the triple must be selected from the above list, and "
    "other relations not listed are not considered. ") + kFormatLine + "\n"
    "{examples}"
    "Now given the following input, please complete the extracting task.\n"
    "Please output as many triples as possible that meet the requirements.\n"
    "Input: S = {sentence}\n"
    "r = {relations}\n";

const std::string kStage2 = std::string(
    "Pre-define the following relation list r. We want to extract all triples containing "
    "the above relations from the given sentence S. Here are the original extraction "
    "results A.\n"
    "S = {sentence}\n"
    "r = {relations}\n"
    "A = {results}\n"
    "{candidates}"
    "{instruction}\n"
    "Constraints and output format are the same as stage 1.\n") + kFormatLine + "\n";

const std::string kRestricted = std::string(
    "Pre-define the following relation list r, please extract all triples containing the "
    "above relations from the given sentence S.\n"
    "Note that the relation name of the triple must be selected from the above list, and "
    "other relations not listed are not considered. ") + kFormatLine + "\n"
    "The entity pairs that may be related in the sentence are {candidates}. Only extract "
    "triples whose subject and object form one of these pairs.\n"
    "{examples}"
    "Now given the following input, please complete the extracting task.\n"
    "Input: S = {sentence}\n"
    "r = {relations}\n";

constexpr const char* kCompleteInstruction =
    "Please check the original results and fill in the missing triples, remove the wrong "
    "triples and output the final results.";
constexpr const char* kRecheckInstruction =
    "Please check the original results, remove the wrong triples and output the final "
    "results.";

void Require(const std::string& body, const char* name,
             std::initializer_list<const char*> slots) {
  for (const char* slot : slots) {
    if (body.find(std::string("{") + slot + "}") == std::string::npos) {
      Fail(ErrorKind::kConfig, std::string(name) + " template lacks {" + slot + "}");
    }
  }
}

std::string Substitute(std::string body, const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out;
  out.reserve(body.size() + 256);
  std::size_t pos = 0;
  while (pos < body.size()) {
    const auto open = body.find('{', pos);
    if (open == std::string::npos) break;
    bool replaced = false;
    for (const auto& [key, value] : values) {
      const std::string slot = "{" + key + "}";
      if (body.compare(open, slot.size(), slot) == 0) {
        out.append(body, pos, open - pos);
        out += value;
        pos = open + slot.size();
        replaced = true;
        break;
      }
    }
    if (!replaced) {
      out.append(body, pos, open + 1 - pos);
      pos = open + 1;
    }
  }
  out.append(body, pos, std::string::npos);
  return out;
}

std::string RelationsText(const RelationList& relations) {
  if (relations.empty()) Fail(ErrorKind::kConfig, "relation list is empty");
  return Json(relations.names()).dump(-1, ' ', false, Json::error_handler_t::replace);
}

std::string ExamplesText(const std::vector<FewShotExample>& examples) {
  if (examples.empty()) return "";
  std::string out = "Here are some examples:\n";
  for (const auto& e : examples) {
    out += "Input: S = " + e.sentence + "\n";
    out += "Output: " + SerializeTriples(e.triples) + "\n";
  }
  return out;
}

}  // namespace

const char* const kFormatReminder =
    "\nReply with the list only, in the format "
    R"([{"s": subject1, "o": object1, "p": relation1}, ...].)";

PromptTemplates PromptTemplates::Default() { return {kStage1, kStage2, kRestricted}; }

PromptTemplates PromptTemplates::FromJson(const Json& j) {
  auto t = Default();
  if (!j.is_object()) Fail(ErrorKind::kConfig, "prompt templates must be a JSON object");
  if (j.contains("stage1")) t.stage1 = j.at("stage1").get<std::string>();
  if (j.contains("stage2")) t.stage2 = j.at("stage2").get<std::string>();
  if (j.contains("restricted")) t.restricted = j.at("restricted").get<std::string>();
  t.Validate();
  return t;
}

void PromptTemplates::Validate() const {
  Require(stage1, "stage1", {"relations", "sentence", "examples"});
  Require(stage2, "stage2", {"relations", "sentence", "results", "candidates", "instruction"});
  Require(restricted, "restricted", {"relations", "sentence", "candidates", "examples"});
}

Json PromptTemplates::Digests() const {
  return {{"stage1", Sha256Hex(stage1)},
          {"stage2", Sha256Hex(stage2)},
          {"restricted", Sha256Hex(restricted)}};
}

std::string FormatPairs(const std::vector<SurfacePair>& pairs) {
  std::string out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i > 0) out += ",";
    out += "(" + pairs[i].subject + ", " + pairs[i].object + ")";
  }
  return out;
}

std::string RenderStage1(const PromptTemplates& templates, const std::string& sentence,
                         const RelationList& relations,
                         const std::vector<FewShotExample>& examples) {
  return Substitute(templates.stage1, {{"relations", RelationsText(relations)},
                                       {"sentence", sentence},
                                       {"examples", ExamplesText(examples)}});
}

std::string RenderStage2(const PromptTemplates& templates, const std::string& sentence,
                         const RelationList& relations,
                         const std::vector<TripleAnnotation>& stage1_results,
                         const std::vector<SurfacePair>& pairs) {
  std::string candidates;
  std::string instruction = kRecheckInstruction;
  if (!pairs.empty()) {
    candidates = "Now we claim that the entity pairs that may be related in the above "
                 "sentence are " + FormatPairs(pairs) + ".\n";
    instruction = kCompleteInstruction;
  }
  return Substitute(templates.stage2, {{"relations", RelationsText(relations)},
                                       {"sentence", sentence},
                                       {"results", SerializeTriples(stage1_results)},
                                       {"candidates", candidates},
                                       {"instruction", instruction}});
}

std::string RenderRestricted(const PromptTemplates& templates, const std::string& sentence,
                             const RelationList& relations,
                             const std::vector<SurfacePair>& pairs,
                             const std::vector<FewShotExample>& examples) {
  return Substitute(templates.restricted, {{"relations", RelationsText(relations)},
                                           {"sentence", sentence},
                                           {"candidates", pairs.empty() ? "(none)" : FormatPairs(pairs)},
                                           {"examples", ExamplesText(examples)}});
}

}  // namespace pairfilter
