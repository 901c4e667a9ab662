#include "pairfilter/corpus/dataset.h"

#include "pairfilter/error.h"

namespace pairfilter {
namespace {

std::string Where(std::size_t line_no) {
  return "line " + std::to_string(line_no);
}

const std::string& RequireString(const Json& obj, const char* key,
                                 std::size_t line_no) {
  const auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    Fail(ErrorKind::kParse,
         Where(line_no) + ": field \"" + key + "\" missing or not a string");
  }
  return it->get_ref<const std::string&>();
}

}  // namespace

AnnotatedSentence ParseSentenceRecord(const Json& record, std::size_t line_no,
                                      const DatasetOptions& options) {
  if (!record.is_object()) {
    Fail(ErrorKind::kParse, Where(line_no) + ": record is not an object");
  }
  AnnotatedSentence sentence;
  if (const auto it = record.find("id"); it != record.end() && !it->is_null()) {
    sentence.id = it->is_string() ? it->get<std::string>() : it->dump();
  } else {
    sentence.id = std::to_string(line_no);
  }
  sentence.text = RequireString(record, "text", line_no);

  const auto triples = record.find("triples");
  if (triples == record.end() || !triples->is_array()) {
    Fail(ErrorKind::kParse, Where(line_no) + ": \"triples\" must be an array");
  }
  for (const auto& t : *triples) {
    if (!t.is_object()) {
      Fail(ErrorKind::kParse, Where(line_no) + ": triple is not an object");
    }
    TripleAnnotation triple{RequireString(t, "s", line_no),
                            RequireString(t, "p", line_no),
                            RequireString(t, "o", line_no)};
    if (options.normalizer) {
      triple.predicate = options.normalizer->Normalize(triple.predicate);
    }
    if (options.relations && !options.relations->Contains(triple.predicate)) {
      Fail(ErrorKind::kValidation,
           Where(line_no) + ": predicate \"" + triple.predicate +
               "\" not in relation list, in triple (" + triple.subject + ", " +
               triple.predicate + ", " + triple.object + ")");
    }
    for (const auto* e : {&triple.subject, &triple.object}) {
      if (e->empty() || sentence.text.find(*e) == std::string::npos) {
        Fail(ErrorKind::kValidation,
             Where(line_no) + ": entity \"" + *e + "\" does not occur in text");
      }
    }
    sentence.triples.push_back(std::move(triple));
  }

  if (options.tokenizer) TokenizeInto(*options.tokenizer, sentence);
  if (sentence.tokens.size() < 3) {
    Fail(ErrorKind::kValidation, Where(line_no) + ": sentence has no tokens");
  }
  return sentence;
}

std::vector<AnnotatedSentence> LoadDataset(const std::filesystem::path& path,
                                           const DatasetOptions& options) {
  if (!options.tokenizer) Fail(ErrorKind::kConfig, "dataset loader needs a tokenizer");
  std::vector<AnnotatedSentence> out;
  ForEachJsonLine(path, [&](std::size_t line_no, const Json& record) {
    out.push_back(ParseSentenceRecord(record, line_no, options));
  });
  return out;
}

OrderedJson SentenceToJson(const AnnotatedSentence& sentence) {
  OrderedJson j;
  j["id"] = sentence.id;
  j["text"] = sentence.text;
  j["triples"] = OrderedJson::array();
  for (const auto& t : sentence.triples) {
    j["triples"].push_back({{"s", t.subject}, {"p", t.predicate}, {"o", t.object}});
  }
  return j;
}

std::string DatasetToJsonl(const std::vector<AnnotatedSentence>& sentences) {
  std::string out;
  for (const auto& s : sentences) {
    out += SentenceToJson(s).dump();
    out += '\n';
  }
  return out;
}

}  // namespace pairfilter
