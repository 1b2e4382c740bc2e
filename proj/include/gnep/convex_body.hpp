#pragma once

#include "gnep/types.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace gnep {

/// Linear description  { z : A z <= b (row j strict when strict[j]),  A_eq z = b_eq }.
struct HalfspaceSystem {
  Matrix A;
  Vector b;
  std::vector<bool> strict;
  Matrix A_eq;
  Vector b_eq;

  static HalfspaceSystem in_dim(int dim);

  [[nodiscard]] int dim() const { return static_cast<int>(A.cols()); }
  [[nodiscard]] int rows() const { return static_cast<int>(A.rows()); }
  [[nodiscard]] int eq_rows() const { return static_cast<int>(A_eq.rows()); }
  [[nodiscard]] bool any_strict() const;

  void add_row(const Eigen::Ref<const Eigen::RowVectorXd> &a, double rhs, bool is_strict = false);
  void add_eq(const Eigen::Ref<const Eigen::RowVectorXd> &a, double rhs);
  void append(const HalfspaceSystem &other);

  /// Same rows with every strict flag cleared.
  [[nodiscard]] HalfspaceSystem closure() const;

  /// Largest violation of the closed system at x (0 when x satisfies it).
  [[nodiscard]] double max_violation(const Vector &x) const;

  /// max sigma s.t. closed rows hold and strict rows hold with Euclidean
  /// margin sigma (capped at 1). nullopt when even the closure is infeasible.
  [[nodiscard]] std::optional<double> max_strict_margin() const;
  /// Same LP, also returning the maximizing point.
  [[nodiscard]] std::optional<std::pair<double, Vector>> strict_margin_point() const;
};

/// Finite representation of a convex set. Values are immutable once built.
class ConvexBody {
public:
  enum class Kind { Box, Simplex, HPoly, Ball, Intersection };

  static ConvexBody box(Vector lower, Vector upper);
  static ConvexBody simplex(int dim, double scale = 1.0);
  static ConvexBody hpoly(HalfspaceSystem system);
  static ConvexBody ball(Vector center, double radius);
  static ConvexBody intersection(std::vector<ConvexBody> parts);
  /// Cartesian product of polyhedral bodies as one block-diagonal H-polytope.
  static ConvexBody product(const std::vector<ConvexBody> &factors);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] int dim() const { return dim_; }

  [[nodiscard]] const Vector &lower() const { return lower_; }
  [[nodiscard]] const Vector &upper() const { return upper_; }
  [[nodiscard]] double scale() const { return scale_; }
  [[nodiscard]] const HalfspaceSystem &system() const { return system_; }
  [[nodiscard]] const Vector &center() const { return center_; }
  [[nodiscard]] double radius() const { return radius_; }
  [[nodiscard]] const std::vector<ConvexBody> &parts() const { return parts_; }

  [[nodiscard]] bool is_polyhedral() const;
  [[nodiscard]] bool has_strict_faces() const;

  /// H-representation; only valid for polyhedral bodies.
  [[nodiscard]] HalfspaceSystem halfspaces() const;
  /// Rows spanning the orthogonal complement of the affine hull direction
  /// that are known structurally (simplex sum, degenerate box sides, equality rows).
  [[nodiscard]] Matrix affine_equalities() const;

  [[nodiscard]] ConvexBody closure() const;

  /// Membership in the closure within eps.
  [[nodiscard]] bool contains(const Vector &x, double eps = 1e-9) const;
  /// Membership honoring strict faces: strict rows need slack above open_margin.
  [[nodiscard]] bool contains_open(const Vector &x, double open_margin = 1e-7) const;

  /// Empty as an (open, where strict faces exist) set; strict faces need room
  /// above open_margin to count as nonempty.
  [[nodiscard]] bool is_empty(double open_margin = 1e-7) const;

  /// Componentwise bounds of the closure; nullopt when unbounded.
  [[nodiscard]] std::optional<std::pair<Vector, Vector>> bounding_box() const;

  /// argmax of c.z over the closure; nullopt if unbounded. Throws EmptyBody.
  [[nodiscard]] std::optional<Vector> maximize(const Vector &c) const;

  [[nodiscard]] std::string kind_name() const;

private:
  Kind kind_ = Kind::Box;
  int dim_ = 0;
  Vector lower_, upper_;
  double scale_ = 1.0;
  HalfspaceSystem system_;
  Vector center_;
  double radius_ = 0.0;
  std::vector<ConvexBody> parts_;
};

/// Finitely generated convex subset of the closed unit ball: co(generators),
/// or all of R^dim when whole_space is set (normal cone of the empty set).
struct ConeSection {
  std::vector<Vector> generators;
  bool whole_space = false;
  int dim = 0;
  bool approximate = false;

  static ConeSection whole(int dim);
  static ConeSection zero(int dim);

  /// Normalizes g and appends it unless it is ~0 or a duplicate.
  void add(const Vector &g);
  [[nodiscard]] bool empty_generators() const { return generators.empty(); }
};

/// Euclidean projection onto the closure of `body`. `warm` may carry a point
/// already inside the body. Throws EmptyBody on an infeasible H-representation.
Vector project(const ConvexBody &body, const Vector &x, const std::optional<Vector> &warm = std::nullopt);

/// Unit y* with <y*, z - y> <= 0 on the body. Exterior points use the
/// projection residual; boundary points the normalized mean of active normals.
/// Throws InteriorPoint for strictly interior y.
Vector separate(const ConvexBody &body, const Vector &y, const Tolerances &tol = {});

/// Generators of N_body(y). Empty body yields whole_space; interior points an
/// empty generator list.
ConeSection normal_cone_generators(const ConvexBody &body, const Vector &y, const Tolerances &tol = {});

/// d in the polar of the cone generated by `cone` (i.e. <g, d> <= 1e-9 for
/// every generator). The polar of R^m is {0}.
bool polar_check(const ConeSection &cone, const Vector &d);

/// Normal cone of a closed polyhedron at an arbitrary point, exact: active
/// rows, violated rows, and violated/satisfied row pairs.
ConeSection polyhedral_normal_cone(const HalfspaceSystem &closed, const Vector &y, double activity);

} // namespace gnep
