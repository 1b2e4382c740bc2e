#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace gnep {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Numerical thresholds shared by every module. Defaults are the ones the
/// certificates are calibrated against; all of them are surfaced as CLI flags.
struct Tolerances {
  double feasibility = 1e-8; // x_i in K_i(x)
  double open_margin = 1e-7; // strict inequalities / emptiness of open sets
  double activity = 1e-8;    // active constraint detection, relative to row norm
};

/// Index range of one player's block inside the joint strategy vector.
struct Block {
  int offset = 0;
  int size = 0;
};

} // namespace gnep
