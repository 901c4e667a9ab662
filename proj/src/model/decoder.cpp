#include "pairfilter/model/decoder.h"

#include <cmath>

#include "pairfilter/error.h"
#include "pairfilter/random.h"

namespace pairfilter {

DecoderParams DecoderParams::Init(int d1, int d2, bool rope_enabled, std::uint64_t seed) {
  if (d1 <= 0 || d2 <= 0) Fail(ErrorKind::kConfig, "decoder dimensions must be positive");
  if (rope_enabled && d2 % 2 != 0) {
    Fail(ErrorKind::kConfig, "rotary embedding needs an even d2, got " + std::to_string(d2));
  }
  PortableRng rng(seed);
  const double stddev = 1.0 / std::sqrt(static_cast<double>(d1));
  auto gaussian = [&] {
    Eigen::MatrixXd m(d2, d1);
    for (int c = 0; c < d1; ++c) {
      for (int r = 0; r < d2; ++r) m(r, c) = stddev * rng.Normal();
    }
    return m;
  };
  DecoderParams p;
  p.wq.value = gaussian();
  p.wk.value = gaussian();
  p.bq.value = Eigen::MatrixXd::Zero(1, d2);
  p.bk.value = Eigen::MatrixXd::Zero(1, d2);
  p.rope_enabled = rope_enabled;
  return p;
}

QkProjection ProjectQk(const HiddenSequence& hidden, const DecoderParams& params) {
  if (hidden.dim() != params.d1()) {
    Fail(ErrorKind::kShape, "hidden size " + std::to_string(hidden.dim()) +
                                " does not match decoder d1 " +
                                std::to_string(params.d1()));
  }
  QkProjection out;
  out.q = hidden.vectors * params.wq.value.transpose();
  out.q.rowwise() += params.bq.value.row(0);
  out.k = hidden.vectors * params.wk.value.transpose();
  out.k.rowwise() += params.bk.value.row(0);
  return out;
}

ScoreMatrix ComputeScores(const QkProjection& qk, const DecoderParams& params,
                          long position_offset) {
  if (qk.q.rows() != qk.k.rows() || qk.q.cols() != qk.k.cols()) {
    Fail(ErrorKind::kShape, "query and key matrices differ in shape");
  }
  const double root = std::sqrt(static_cast<double>(qk.q.cols()));
  if (!params.rope_enabled) {
    Eigen::MatrixXd dots = qk.q * qk.k.transpose();
    return {dots / root};
  }
  const auto q = RopeRotateRows(qk.q, position_offset, params.rope_base);
  const auto k = RopeRotateRows(qk.k, position_offset, params.rope_base);
  Eigen::MatrixXd dots = q * k.transpose();
  return {dots / root};
}

ag::Var DecodeScores(ag::Tape& t, ag::Var hidden, const DecoderParams& params) {
  auto q = ag::Linear(t, hidden, t.Parameter(params.wq), t.Parameter(params.bq));
  auto k = ag::Linear(t, hidden, t.Parameter(params.wk), t.Parameter(params.bk));
  if (params.rope_enabled) {
    q = ag::RopeRows(t, q, 0, params.rope_base);
    k = ag::RopeRows(t, k, 0, params.rope_base);
  }
  return ag::Scale(t, ag::MatMulT(t, q, k),
                   1.0 / std::sqrt(static_cast<double>(params.d2())));
}

}  // namespace pairfilter
