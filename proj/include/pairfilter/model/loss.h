#pragma once

#include <Eigen/Dense>

#include "pairfilter/corpus/self_label.h"

namespace pairfilter {

// log(1 + exp(x)) without overflow.
double Softplus(double x);

// L = sum_{y=+1} -log sigmoid(a) + sum_{y=-1} -log(1 - sigmoid(a)), evaluated
// in logit form (softplus(-a) and softplus(a)). Cells with y = 0 are never
// read. `weight` scales the sum (1 for the printed sum reduction). An all-zero
// label matrix returns 0 and logs a warning.
double MaskedBceLoss(const Eigen::MatrixXd& logits, const PairLabelMatrix& labels,
                     double weight = 1.0);

// dL/dlogits: sigmoid(a) - 1 at positives, sigmoid(a) at negatives, 0 elsewhere.
Eigen::MatrixXd MaskedBceGradient(const Eigen::MatrixXd& logits,
                                  const PairLabelMatrix& labels,
                                  double weight = 1.0);

}  // namespace pairfilter
