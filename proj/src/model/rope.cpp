#include "pairfilter/model/rope.h"

#include <cmath>
#include <string>

#include "pairfilter/error.h"

namespace pairfilter {
namespace {

void CheckEven(Eigen::Index d) {
  if (d % 2 != 0) {
    Fail(ErrorKind::kConfig,
         "rotary embedding needs an even dimension, got " + std::to_string(d));
  }
}

template <typename Row>
void RotateInPlace(Row&& v, double position, double base) {
  const auto d = v.size();
  for (Eigen::Index m = 0; m < d / 2; ++m) {
    const double theta =
        position * std::pow(base, -2.0 * static_cast<double>(m) / static_cast<double>(d));
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double x0 = v(2 * m);
    const double x1 = v(2 * m + 1);
    v(2 * m) = x0 * c - x1 * s;
    v(2 * m + 1) = x0 * s + x1 * c;
  }
}

}  // namespace

Eigen::VectorXd RopeRotate(const Eigen::VectorXd& v, long position, double base) {
  CheckEven(v.size());
  Eigen::VectorXd out = v;
  RotateInPlace(out, static_cast<double>(position), base);
  return out;
}

Eigen::MatrixXd RopeRotateRows(const Eigen::MatrixXd& rows, long offset,
                               double base, bool inverse) {
  CheckEven(rows.cols());
  Eigen::MatrixXd out = rows;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double pos = static_cast<double>(i + offset);
    RotateInPlace(out.row(i), inverse ? -pos : pos, base);
  }
  return out;
}

}  // namespace pairfilter
