#include "pairfilter/model/autograd.h"

#include <cmath>

#include "pairfilter/error.h"
#include "pairfilter/model/loss.h"
#include "pairfilter/model/rope.h"

namespace pairfilter::ag {
namespace {

void ExpectSameShape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    Fail(ErrorKind::kShape, std::string(op) + ": shapes " +
                                std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " and " +
                                std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + " differ");
  }
}

}  // namespace

Var Tape::Push(Matrix value, BackwardFn backward) {
  nodes_.push_back({std::move(value), Matrix(), record_ ? std::move(backward) : BackwardFn()});
  return {nodes_.size() - 1};
}

Var Tape::Constant(Matrix value) { return Push(std::move(value), nullptr); }

Var Tape::Parameter(const Param& param) {
  if (const auto it = params_.find(&param); it != params_.end()) {
    return {it->second};
  }
  const Var v = Push(param.value, nullptr);
  params_.emplace(&param, v.id);
  return v;
}

Matrix& Tape::GradRef(std::size_t id) {
  auto& node = nodes_[id];
  if (node.grad.size() == 0) {
    node.grad = Matrix::Zero(node.value.rows(), node.value.cols());
  }
  return node.grad;
}

void Tape::Backward(Var out) {
  if (!record_) Fail(ErrorKind::kState, "backward on a non-recording tape");
  if (nodes_[out.id].value.size() != 1) {
    Fail(ErrorKind::kShape, "backward needs a scalar output");
  }
  for (auto& n : nodes_) n.grad.resize(0, 0);
  GradRef(out.id).setOnes();
  for (std::size_t id = out.id + 1; id-- > 0;) {
    auto& node = nodes_[id];
    if (node.grad.size() == 0 || !node.backward) continue;
    node.backward(*this, id);
  }
}

Matrix Tape::ParamGrad(const Param& param) const {
  const auto it = params_.find(&param);
  if (it == params_.end() || nodes_[it->second].grad.size() == 0) {
    return Matrix::Zero(param.value.rows(), param.value.cols());
  }
  return nodes_[it->second].grad;
}

Var MatMul(Tape& t, Var a, Var b) {
  if (t.value(a).cols() != t.value(b).rows()) {
    Fail(ErrorKind::kShape, "matmul: inner dimensions differ");
  }
  Matrix out = t.value(a) * t.value(b);
  return t.Push(std::move(out), [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.OutGrad(self);
    t.GradRef(a.id).noalias() += g * t.ValueAt(b.id).transpose();
    t.GradRef(b.id).noalias() += t.ValueAt(a.id).transpose() * g;
  });
}

Var MatMulT(Tape& t, Var a, Var b) {
  if (t.value(a).cols() != t.value(b).cols()) {
    Fail(ErrorKind::kShape, "matmulT: inner dimensions differ (" +
                                std::to_string(t.value(a).cols()) + " vs " +
                                std::to_string(t.value(b).cols()) + ")");
  }
  Matrix out = t.value(a) * t.value(b).transpose();
  return t.Push(std::move(out), [a, b](Tape& t, std::size_t self) {
    const Matrix& g = t.OutGrad(self);
    t.GradRef(a.id).noalias() += g * t.ValueAt(b.id);
    t.GradRef(b.id).noalias() += g.transpose() * t.ValueAt(a.id);
  });
}

Var Add(Tape& t, Var a, Var b) {
  ExpectSameShape(t.value(a), t.value(b), "add");
  Matrix out = t.value(a) + t.value(b);
  return t.Push(std::move(out), [a, b](Tape& t, std::size_t self) {
    t.GradRef(a.id) += t.OutGrad(self);
    t.GradRef(b.id) += t.OutGrad(self);
  });
}

Var AddRow(Tape& t, Var a, Var row) {
  if (t.value(row).rows() != 1 || t.value(row).cols() != t.value(a).cols()) {
    Fail(ErrorKind::kShape, "add-row: bias width does not match");
  }
  Matrix out = t.value(a).rowwise() + t.value(row).row(0);
  return t.Push(std::move(out), [a, row](Tape& t, std::size_t self) {
    const Matrix& g = t.OutGrad(self);
    t.GradRef(a.id) += g;
    t.GradRef(row.id) += g.colwise().sum();
  });
}

Var Scale(Tape& t, Var a, double s) {
  Matrix out = t.value(a) * s;
  return t.Push(std::move(out), [a, s](Tape& t, std::size_t self) {
    t.GradRef(a.id) += t.OutGrad(self) * s;
  });
}

Var Relu(Tape& t, Var a) {
  Matrix out = t.value(a).cwiseMax(0.0);
  return t.Push(std::move(out), [a](Tape& t, std::size_t self) {
    const Matrix mask = (t.ValueAt(a.id).array() > 0.0).cast<double>().matrix();
    t.GradRef(a.id) += t.OutGrad(self).cwiseProduct(mask);
  });
}

Var SoftmaxRows(Tape& t, Var a) {
  const Matrix& x = t.value(a);
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double m = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return t.Push(std::move(out), [a](Tape& t, std::size_t self) {
    const Matrix& y = t.ValueAt(self);
    const Matrix& g = t.OutGrad(self);
    const Eigen::VectorXd dots = g.cwiseProduct(y).rowwise().sum();
    Matrix gx = y.cwiseProduct(g.colwise() - dots);
    t.GradRef(a.id) += gx;
  });
}

Var LayerNormRows(Tape& t, Var x, Var gain, Var bias, double eps) {
  const Matrix& in = t.value(x);
  const auto d = static_cast<double>(in.cols());
  Matrix xhat(in.rows(), in.cols());
  Eigen::VectorXd inv_std(in.rows());
  for (Eigen::Index r = 0; r < in.rows(); ++r) {
    const double mean = in.row(r).mean();
    const Eigen::RowVectorXd centered = in.row(r).array() - mean;
    const double var = centered.squaredNorm() / d;
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = centered * inv_std(r);
  }
  Matrix out = (xhat.array().rowwise() * t.value(gain).row(0).array()).matrix();
  out.rowwise() += t.value(bias).row(0);
  return t.Push(std::move(out), [x, gain, bias, xhat, inv_std, d](Tape& t,
                                                                   std::size_t self) {
    const Matrix& g = t.OutGrad(self);
    t.GradRef(gain.id) += g.cwiseProduct(xhat).colwise().sum();
    t.GradRef(bias.id) += g.colwise().sum();
    const Matrix dxhat = (g.array().rowwise() * t.ValueAt(gain.id).row(0).array()).matrix();
    Matrix dx(dxhat.rows(), dxhat.cols());
    for (Eigen::Index r = 0; r < dxhat.rows(); ++r) {
      const double mean_d = dxhat.row(r).sum() / d;
      const double mean_dx = dxhat.row(r).dot(xhat.row(r)) / d;
      dx.row(r) = inv_std(r) * (dxhat.row(r).array() - mean_d -
                                xhat.row(r).array() * mean_dx).matrix();
    }
    t.GradRef(x.id) += dx;
  });
}

Var GatherRows(Tape& t, Var table, const std::vector<int>& ids) {
  const Matrix& tab = t.value(table);
  Matrix out(static_cast<Eigen::Index>(ids.size()), tab.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || ids[r] >= tab.rows()) {
      Fail(ErrorKind::kBounds, "gather: row id " + std::to_string(ids[r]) +
                                   " outside table of " +
                                   std::to_string(tab.rows()));
    }
    out.row(static_cast<Eigen::Index>(r)) = tab.row(ids[r]);
  }
  return t.Push(std::move(out), [table, ids](Tape& t, std::size_t self) {
    const Matrix& g = t.OutGrad(self);
    Matrix& gt = t.GradRef(table.id);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      gt.row(ids[r]) += g.row(static_cast<Eigen::Index>(r));
    }
  });
}

Var ColSlice(Tape& t, Var a, int start, int width) {
  const Matrix& x = t.value(a);
  if (start < 0 || width < 0 || start + width > x.cols()) {
    Fail(ErrorKind::kShape, "column slice out of range");
  }
  Matrix out = x.middleCols(start, width);
  return t.Push(std::move(out), [a, start, width](Tape& t, std::size_t self) {
    t.GradRef(a.id).middleCols(start, width) += t.OutGrad(self);
  });
}

Var HConcat(Tape& t, const std::vector<Var>& parts) {
  Eigen::Index rows = parts.empty() ? 0 : t.value(parts.front()).rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    if (t.value(p).rows() != rows) Fail(ErrorKind::kShape, "hconcat: row counts differ");
    cols += t.value(p).cols();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, t.value(p).cols()) = t.value(p);
    at += t.value(p).cols();
  }
  return t.Push(std::move(out), [parts](Tape& t, std::size_t self) {
    const Matrix& g = t.OutGrad(self);
    Eigen::Index at = 0;
    for (const auto& p : parts) {
      const auto w = t.ValueAt(p.id).cols();
      t.GradRef(p.id) += g.middleCols(at, w);
      at += w;
    }
  });
}

Var Linear(Tape& t, Var x, Var weight, Var bias) {
  return AddRow(t, MatMulT(t, x, weight), bias);
}

Var RopeRows(Tape& t, Var a, long offset, double base) {
  Matrix out = RopeRotateRows(t.value(a), offset, base);
  return t.Push(std::move(out), [a, offset, base](Tape& t, std::size_t self) {
    t.GradRef(a.id) += RopeRotateRows(t.OutGrad(self), offset, base, /*inverse=*/true);
  });
}

Var MaskedBce(Tape& t, Var logits, const PairLabelMatrix& labels, double weight) {
  Matrix out(1, 1);
  out(0, 0) = MaskedBceLoss(t.value(logits), labels, weight);
  // Labels are captured by value: the tape may outlive the caller's matrix.
  return t.Push(std::move(out), [logits, labels, weight](Tape& t, std::size_t self) {
    const double g = t.OutGrad(self)(0, 0);
    t.GradRef(logits.id) += g * MaskedBceGradient(t.ValueAt(logits.id), labels, weight);
  });
}

}  // namespace pairfilter::ag
