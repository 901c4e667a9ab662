#include "pairfilter/corpus/sentence.h"

#include <set>

namespace pairfilter {

std::string AnnotatedSentence::Surface(const TokenSpan& span) const {
  const auto& first = offsets.at(static_cast<std::size_t>(span.start));
  const auto& last = offsets.at(static_cast<std::size_t>(span.end));
  return text.substr(first.begin, last.end - first.begin);
}

std::vector<std::string> AnnotatedSentence::LabeledEntities() const {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& t : triples) {
    for (const auto* e : {&t.subject, &t.object}) {
      if (seen.insert(*e).second) out.push_back(*e);
    }
  }
  return out;
}

}  // namespace pairfilter
