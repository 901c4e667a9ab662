#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace pairfilter {
class PairLabelMatrix;
}

namespace pairfilter::ag {

using Matrix = Eigen::MatrixXd;

// A named trainable tensor. Row vectors (1 x d) hold biases and norm gains.
struct Param {
  std::string name;
  Matrix value;
};

struct Var {
  std::size_t id = 0;
};

// Reverse-mode tape. Ops append nodes; Backward() walks them in reverse.
// A tape built with record == false keeps values only, which is what
// inference uses. Parameters are copied onto the tape, so a model can be
// shared read-only across threads as long as each thread owns its tape.
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}

  bool recording() const { return record_; }

  Var Constant(Matrix value);
  // The same Param registered twice on one tape maps to one node.
  Var Parameter(const Param& param);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }

  // Seeds d(out)/d(out) = 1 for a 1x1 `out` and propagates.
  void Backward(Var out);

  // Gradient accumulated for `param` by the last Backward(); zeros if the
  // parameter did not influence the output.
  Matrix ParamGrad(const Param& param) const;

  using BackwardFn = std::function<void(Tape&, std::size_t self)>;
  Var Push(Matrix value, BackwardFn backward);

  // Gradient buffer of node `id`, zero-initialised on first access.
  Matrix& GradRef(std::size_t id);
  const Matrix& OutGrad(std::size_t id) const { return nodes_[id].grad; }
  const Matrix& ValueAt(std::size_t id) const { return nodes_[id].value; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Param*, std::size_t> params_;
  bool record_;
};

Var MatMul(Tape& t, Var a, Var b);   // a * b
Var MatMulT(Tape& t, Var a, Var b);  // a * b^T
Var Add(Tape& t, Var a, Var b);
Var AddRow(Tape& t, Var a, Var row);  // broadcast a 1 x C row over rows of a
Var Scale(Tape& t, Var a, double s);
Var Relu(Tape& t, Var a);
Var SoftmaxRows(Tape& t, Var a);
Var LayerNormRows(Tape& t, Var x, Var gain, Var bias, double eps = 1e-5);
Var GatherRows(Tape& t, Var table, const std::vector<int>& ids);
Var ColSlice(Tape& t, Var a, int start, int width);
Var HConcat(Tape& t, const std::vector<Var>& parts);

// x * W^T + b, with W stored out x in and b as a 1 x out row.
Var Linear(Tape& t, Var x, Var weight, Var bias);

// Rotates row i by the rotary transform of position i + offset.
Var RopeRows(Tape& t, Var a, long offset, double base);

// Masked binary cross-entropy from logits, times `weight`; 1 x 1 result.
Var MaskedBce(Tape& t, Var logits, const PairLabelMatrix& labels, double weight);

}  // namespace pairfilter::ag
