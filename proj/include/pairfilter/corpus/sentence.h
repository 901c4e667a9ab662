#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pairfilter {

inline constexpr const char* kClsToken = "[CLS]";
inline constexpr const char* kSepToken = "[SEP]";

// Byte range [begin, end) into the sentence text.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const CharSpan&) const = default;
};

struct TripleAnnotation {
  std::string subject;
  std::string predicate;
  std::string object;

  bool operator==(const TripleAnnotation&) const = default;
  auto operator<=>(const TripleAnnotation&) const = default;
};

// Inclusive token range. Index 0 is the leading boundary token, so a valid
// content span satisfies 0 < start <= end < N - 1.
struct TokenSpan {
  int start = 0;
  int end = 0;

  int length() const { return end - start + 1; }
  bool Contains(int i) const { return i >= start && i <= end; }
  bool Overlaps(const TokenSpan& o) const {
    return start <= o.end && o.start <= end;
  }
  bool operator==(const TokenSpan&) const = default;
  auto operator<=>(const TokenSpan&) const = default;
};

struct AnnotatedSentence {
  std::string id;
  std::string text;
  std::vector<std::string> tokens;  // includes [CLS] ... [SEP]
  std::vector<CharSpan> offsets;    // one per token; boundaries are empty
  std::vector<TripleAnnotation> triples;

  std::size_t size() const { return tokens.size(); }
  // |T|: number of tokens excluding the two boundary tokens.
  std::size_t content_length() const {
    return tokens.size() >= 2 ? tokens.size() - 2 : 0;
  }

  bool IsContentSpan(const TokenSpan& span) const {
    return span.start > 0 && span.start <= span.end &&
           static_cast<std::size_t>(span.end) + 1 < tokens.size();
  }

  // Surface string covered by a content span, sliced from the text.
  std::string Surface(const TokenSpan& span) const;

  // Distinct subject/object strings in order of first appearance.
  std::vector<std::string> LabeledEntities() const;
};

}  // namespace pairfilter
