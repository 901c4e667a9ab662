#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pairfilter/corpus/sentence.h"

namespace pairfilter {

struct TokenizedText {
  std::vector<std::string> tokens;
  std::vector<CharSpan> offsets;
};

// Tokenizers must report byte offsets for every content token so that entity
// strings can be aligned exactly. Output always starts with [CLS] and ends
// with [SEP].
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::string name() const = 0;
  virtual TokenizedText Tokenize(std::string_view text) const = 0;
};

// Splits on whitespace, breaks ASCII punctuation into single tokens and emits
// each CJK ideograph as its own token.
class BasicTokenizer : public Tokenizer {
 public:
  std::string name() const override { return "basic"; }
  TokenizedText Tokenize(std::string_view text) const override;
};

// Fills tokens/offsets of a sentence from its text.
void TokenizeInto(const Tokenizer& tokenizer, AnnotatedSentence& sentence);

}  // namespace pairfilter
