#pragma once

#include "gnep/lp.hpp"
#include "gnep/types.hpp"

#include <optional>

namespace gnep::qp {

/// minimize  0.5 z'Hz + g'z   s.t.  A_ub z <= b_ub,  A_eq z = b_eq.
/// H must be positive semidefinite; a singular H is regularized by a tiny
/// multiple of the identity.
struct QuadraticProgram {
  Matrix H;
  Vector g;
  Matrix A_ub;
  Vector b_ub;
  Matrix A_eq;
  Vector b_eq;
};

struct Result {
  lp::Status status = lp::Status::Infeasible;
  Vector z;
  double value = 0.0;
  int iterations = 0;

  [[nodiscard]] bool optimal() const { return status == lp::Status::Optimal; }
};

/// Primal active-set method. `start`, if given, must be feasible; otherwise a
/// feasible point is obtained from an LP phase 1.
Result solve(const QuadraticProgram &program, const std::optional<Vector> &start = std::nullopt);

} // namespace gnep::qp
