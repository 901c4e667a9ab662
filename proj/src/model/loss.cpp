#include "pairfilter/model/loss.h"

#include <spdlog/spdlog.h>

#include <cmath>

#include "pairfilter/error.h"

namespace pairfilter {
namespace {

void CheckShape(const Eigen::MatrixXd& logits, const PairLabelMatrix& labels) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (logits.rows() != n || logits.cols() != n) {
    Fail(ErrorKind::kShape, "score matrix is " + std::to_string(logits.rows()) +
                                "x" + std::to_string(logits.cols()) +
                                " but labels are " + std::to_string(n) + "x" +
                                std::to_string(n));
  }
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

double Softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double MaskedBceLoss(const Eigen::MatrixXd& logits, const PairLabelMatrix& labels,
                     double weight) {
  CheckShape(logits, labels);
  double loss = 0.0;
  bool any = false;
  const auto n = labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto y = labels.at(i, j);
      if (y == 0) continue;
      any = true;
      const double a = logits(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      loss += y > 0 ? Softplus(-a) : Softplus(a);
    }
  }
  if (!any) spdlog::warn("label matrix has no labeled cells; loss carries no signal");
  return weight * loss;
}

Eigen::MatrixXd MaskedBceGradient(const Eigen::MatrixXd& logits,
                                  const PairLabelMatrix& labels, double weight) {
  CheckShape(logits, labels);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(logits.rows(), logits.cols());
  const auto n = labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto y = labels.at(i, j);
      if (y == 0) continue;
      const auto r = static_cast<Eigen::Index>(i);
      const auto c = static_cast<Eigen::Index>(j);
      grad(r, c) = weight * (Sigmoid(logits(r, c)) - (y > 0 ? 1.0 : 0.0));
    }
  }
  return grad;
}

}  // namespace pairfilter
