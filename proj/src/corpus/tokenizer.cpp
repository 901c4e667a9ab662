#include "pairfilter/corpus/tokenizer.h"

#include "pairfilter/util.h"

namespace pairfilter {
namespace {

bool IsCjk(char32_t cp) {
  return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) ||
         (cp >= 0x20000 && cp <= 0x2A6DF) || (cp >= 0xF900 && cp <= 0xFAFF) ||
         (cp >= 0x3000 && cp <= 0x303F) || (cp >= 0xFF00 && cp <= 0xFFEF);
}

bool IsSpace(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\f' ||
         cp == '\v' || cp == 0xA0;
}

bool IsAsciiPunct(char32_t cp) {
  return cp < 0x80 && ((cp >= 33 && cp <= 47) || (cp >= 58 && cp <= 64) ||
                       (cp >= 91 && cp <= 96) || (cp >= 123 && cp <= 126));
}

}  // namespace

TokenizedText BasicTokenizer::Tokenize(std::string_view text) const {
  TokenizedText out;
  out.tokens.emplace_back(kClsToken);
  out.offsets.push_back({0, 0});

  std::size_t word_start = std::string_view::npos;
  auto flush = [&](std::size_t end) {
    if (word_start != std::string_view::npos) {
      out.tokens.emplace_back(text.substr(word_start, end - word_start));
      out.offsets.push_back({word_start, end});
      word_start = std::string_view::npos;
    }
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t start = pos;
    const char32_t cp = DecodeUtf8(text, pos);
    if (IsSpace(cp)) {
      flush(start);
    } else if (IsAsciiPunct(cp) || IsCjk(cp)) {
      flush(start);
      out.tokens.emplace_back(text.substr(start, pos - start));
      out.offsets.push_back({start, pos});
    } else if (word_start == std::string_view::npos) {
      word_start = start;
    }
  }
  flush(text.size());

  out.tokens.emplace_back(kSepToken);
  out.offsets.push_back({text.size(), text.size()});
  return out;
}

void TokenizeInto(const Tokenizer& tokenizer, AnnotatedSentence& sentence) {
  auto tokenized = tokenizer.Tokenize(sentence.text);
  sentence.tokens = std::move(tokenized.tokens);
  sentence.offsets = std::move(tokenized.offsets);
}

}  // namespace pairfilter
