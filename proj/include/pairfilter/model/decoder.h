#pragma once

#include <cstdint>

#include "pairfilter/model/autograd.h"
#include "pairfilter/model/encoder.h"
#include "pairfilter/model/rope.h"

namespace pairfilter {

// Pre-sigmoid token-pair logits, rows = subject tokens, columns = object
// tokens.
struct ScoreMatrix {
  Eigen::MatrixXd scores;

  std::size_t size() const { return static_cast<std::size_t>(scores.rows()); }
  double at(std::size_t row, std::size_t col) const {
    return scores(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }
};

// One-head attention-style decoder. wq/wk are d2 x d1; bq/bk are 1 x d2 rows.
struct DecoderParams {
  ag::Param wq{"decoder.wq", {}};
  ag::Param bq{"decoder.bq", {}};
  ag::Param wk{"decoder.wk", {}};
  ag::Param bk{"decoder.bk", {}};
  bool rope_enabled = true;
  double rope_base = kRopeBase;

  int d1() const { return static_cast<int>(wq.value.cols()); }
  int d2() const { return static_cast<int>(wq.value.rows()); }

  // Weights ~ N(0, 1/d1), biases zero. d2 must be even when rope is on.
  static DecoderParams Init(int d1, int d2, bool rope_enabled, std::uint64_t seed);

  std::vector<ag::Param*> parameters() { return {&wq, &bq, &wk, &bk}; }
};

struct QkProjection {
  Eigen::MatrixXd q;  // N x d2
  Eigen::MatrixXd k;  // N x d2
};

// q_i = Wq h_i + bq, k_i = Wk h_i + bk.
QkProjection ProjectQk(const HiddenSequence& hidden, const DecoderParams& params);

// A'_ij = (R_i q_i) . (R_j k_j) / sqrt(d2) with rope, q_i . k_j / sqrt(d2)
// without. Positions are the row indices shifted by `position_offset`.
ScoreMatrix ComputeScores(const QkProjection& qk, const DecoderParams& params,
                          long position_offset = 0);

// The same computation recorded on a tape, used for training.
ag::Var DecodeScores(ag::Tape& tape, ag::Var hidden, const DecoderParams& params);

}  // namespace pairfilter
