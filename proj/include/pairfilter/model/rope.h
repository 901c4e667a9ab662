#pragma once

#include <Eigen/Dense>

namespace pairfilter {

inline constexpr double kRopeBase = 10000.0;

// Rotary position transform R_position: dimension pair (2m, 2m + 1) turns by
// position * base^(-2m/d). R_i^T R_j = R_{j-i}, so scores between rotated
// queries and keys depend on relative position only. Odd sizes are a kConfig
// error.
Eigen::VectorXd RopeRotate(const Eigen::VectorXd& v, long position,
                           double base = kRopeBase);

// Row i is rotated by R_{i + offset}; `inverse` applies R^T instead.
Eigen::MatrixXd RopeRotateRows(const Eigen::MatrixXd& rows, long offset,
                               double base = kRopeBase, bool inverse = false);

}  // namespace pairfilter
