#pragma once

#include "gnep/types.hpp"

#include <limits>

namespace gnep::lp {

enum class Status { Optimal, Infeasible, Unbounded };

/// maximize  objective . x
/// s.t.      A_ub x <= b_ub,  A_eq x = b_eq,  x >= lower (componentwise).
/// A lower bound of -infinity marks a free variable; an empty `lower` means
/// every variable is free.
struct LinearProgram {
  Vector objective;
  Matrix A_ub;
  Vector b_ub;
  Matrix A_eq;
  Vector b_eq;
  Vector lower;

  explicit LinearProgram(int num_vars = 0);

  [[nodiscard]] int num_vars() const { return static_cast<int>(objective.size()); }

  void add_le(const Eigen::Ref<const Eigen::RowVectorXd> &row, double rhs);
  void add_eq(const Eigen::Ref<const Eigen::RowVectorXd> &row, double rhs);
  void set_nonnegative(int var) { lower[var] = 0.0; }
};

struct Result {
  Status status = Status::Infeasible;
  Vector x;
  double value = -std::numeric_limits<double>::infinity();

  [[nodiscard]] bool optimal() const { return status == Status::Optimal; }
};

/// Dense two-phase primal simplex with Bland's rule. Intended for the small
/// problems this library generates (tens of rows and columns).
Result solve(const LinearProgram &program);

/// Convenience: a point satisfying the constraints, if any.
Result find_feasible(const Matrix &A_ub, const Vector &b_ub, const Matrix &A_eq,
                     const Vector &b_eq);

} // namespace gnep::lp
