#pragma once

#include "gnep/convex_body.hpp"

#include <utility>
#include <vector>

namespace gnep {

/// Rows  (A0 + sum_k x_k A_k) z <= b0 + D x  in a player's own variables z,
/// affine in the joint point x. Row j is strict when strict[j].
struct AffineRows {
  Matrix A0;                                   // m x n_i
  std::vector<std::pair<int, Matrix>> A_terms; // (joint coordinate k, m x n_i)
  Vector b0;                                   // m
  Matrix D;                                    // m x n, or empty for no dependence
  std::vector<bool> strict;

  [[nodiscard]] int rows() const { return static_cast<int>(A0.rows()); }
  [[nodiscard]] int local_dim() const { return static_cast<int>(A0.cols()); }

  /// The halfspace system obtained by substituting x.
  [[nodiscard]] HalfspaceSystem at(const Vector &x) const;
  /// Throws DimensionMismatch unless every piece agrees with (m, n_i, n).
  void validate(int joint_dim) const;
};

} // namespace gnep
