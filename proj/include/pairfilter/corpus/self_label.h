#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pairfilter/corpus/sentence.h"
#include "pairfilter/util.h"

namespace pairfilter {

// Directed token-pair labels: rows index subject tokens, columns object
// tokens. +1 related, -1 unrelated, 0 unknown (masked out of the loss).
class PairLabelMatrix {
 public:
  PairLabelMatrix() = default;
  explicit PairLabelMatrix(std::size_t n) : n_(n), cells_(n * n, 0) {}

  std::size_t size() const { return n_; }
  std::int8_t at(std::size_t row, std::size_t col) const {
    return cells_[row * n_ + col];
  }
  void set(std::size_t row, std::size_t col, std::int8_t y) {
    cells_[row * n_ + col] = y;
  }
  std::size_t Count(std::int8_t y) const;
  bool AllZero() const { return Count(0) == cells_.size(); }

  bool operator==(const PairLabelMatrix&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::int8_t> cells_;
};

struct TokenPairLabel {
  int row = 0;
  int col = 0;
  std::int8_t label = 0;

  bool operator==(const TokenPairLabel&) const = default;
};

struct EntityPairLabel {
  std::string subject;
  std::string object;
  std::int8_t label = 0;
};

struct SelfLabelResult {
  PairLabelMatrix matrix;
  std::vector<EntityPairLabel> entity_pairs;  // ordered, before expansion

  std::size_t positive_pairs() const;
  std::size_t negative_pairs() const;
};

// Every token span whose surface equals `entity` exactly, in text order.
std::vector<TokenSpan> AlignSpans(const AnnotatedSentence& sentence,
                                  std::string_view entity);

// Cross product subject x object carrying `label` (+1 or -1).
std::vector<TokenPairLabel> SplitToTokenPairs(const TokenSpan& subject,
                                              const TokenSpan& object,
                                              std::int8_t label);

// Writes pairs into `matrix`. Boundary rows/columns are rejected with kBounds.
// A cell that already holds the opposite non-zero label raises kConflict.
void ApplyTokenPairs(PairLabelMatrix& matrix,
                     const std::vector<TokenPairLabel>& pairs);

// Positive pairs come from the gold triples; every other ordered pair of
// distinct labeled entities is negative. All occurrences of an entity take the
// label. Throws kLabeling if an entity cannot be aligned.
SelfLabelResult SelfLabel(const AnnotatedSentence& sentence);

struct AuditReport {
  std::string sentence_id;
  std::vector<EntityPairLabel> flagged;  // self-labeled negatives known related
};

// Flags self-labeled negatives that appear in an external list of truly
// related (subject, object) pairs.
AuditReport FalseNegativeAudit(
    const AnnotatedSentence& sentence,
    const std::vector<std::pair<std::string, std::string>>& related_pairs);

// Sparse serialisation: {"id","n","tokens","cells":[[i,j,y],...]} with cells
// in row-major order.
OrderedJson LabeledSentenceToJson(const AnnotatedSentence& sentence,
                                  const PairLabelMatrix& labels);

struct LabeledSentence {
  std::string id;
  std::vector<std::string> tokens;
  PairLabelMatrix labels;
};

LabeledSentence LabeledSentenceFromJson(const Json& record, std::size_t line_no);

}  // namespace pairfilter
