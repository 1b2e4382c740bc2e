#pragma once

#include "gnep/convex_body.hpp"
#include "gnep/parametric.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gnep {

/// u(x) = c . x over the joint point.
struct LinearUtility {
  Vector c;
};

/// u(x) = 0.5 x'Qx + c . x. Only the player's own diagonal block of Q has to
/// be negative semidefinite; cross blocks are arbitrary.
struct ConcaveQuadUtility {
  Matrix Q;
  Vector c;
};

/// P(x) = { y in X_i : A(x) y <= b(x) } with strict rows (open faces).
struct PolyhedralPreference {
  AffineRows rows;
};

/// P(x) = union of polyhedral pieces, each intersected with X_i.
struct UnionPreference {
  std::vector<AffineRows> pieces;
};

/// Black-box relation: succ(own, y, joint) is true when y is strictly
/// preferred to the player's own strategy `own` at joint point `joint`.
/// Callbacks must be pure.
struct RelationOracle {
  std::string name;
  std::function<bool(const Vector &own, const Vector &y, const Vector &joint)> succ;
  int sample_budget = 256;
  std::uint64_t seed = 0;
};

using PreferenceVariant =
    std::variant<LinearUtility, ConcaveQuadUtility, PolyhedralPreference, UnionPreference, RelationOracle>;

/// x |-> P_i(x) subset of X_i for one player. `block` locates the player's
/// variables inside the joint point of dimension `joint_dim`.
struct PreferenceMap {
  PreferenceVariant variant;
  ConvexBody ambient = ConvexBody::box(Vector::Zero(1), Vector::Zero(1));
  Block block{0, 1};
  int joint_dim = 1;

  [[nodiscard]] std::string variant_name() const;
  [[nodiscard]] bool is_utility() const;
  [[nodiscard]] bool is_sampled() const { return std::holds_alternative<RelationOracle>(variant); }
  /// Joint utility value; utility variants only.
  [[nodiscard]] double utility(const Vector &x) const;
  /// Gradient of u with respect to the player's own block; utility variants only.
  [[nodiscard]] Vector own_gradient(const Vector &x) const;
  /// Checks dimensions and own-block concavity. Throws on violation.
  void validate() const;
};

/// Utility, restricted to the player's block with rivals fixed:
/// u(x_{-i}, y) = 0.5 y'Hy + g'y + constant.
struct LocalQuadratic {
  Matrix H;
  Vector g;
  double constant = 0.0;

  [[nodiscard]] double value(const Vector &y) const { return 0.5 * y.dot(H * y) + g.dot(y) + constant; }
  [[nodiscard]] bool is_linear() const { return H.cwiseAbs().maxCoeff() == 0.0; }
};

LocalQuadratic local_utility(const PreferenceMap &pref, const Vector &x);

/// argmax and value of a local utility over a body. LP when linear, QP
/// otherwise. nullopt when unbounded.
struct UtilityMax {
  Vector argmax;
  double value = 0.0;
};
std::optional<UtilityMax> maximize_utility(const LocalQuadratic &u, const ConvexBody &body);

/// Explicit description of P_i(x) (already intersected with X_i), or of its
/// convex hull when produced by convexified_set.
struct PrefRegion {
  enum class Kind { Empty, Polyhedral, Superlevel, Union, Hull };
  Kind kind = Kind::Empty;
  int dim = 0;
  /// Polyhedral: one body. Union: the nonempty pieces.
  std::vector<ConvexBody> pieces;
  /// Superlevel: { y in ambient : u(y) > level }.
  std::optional<LocalQuadratic> utility;
  double level = 0.0;
  std::optional<ConvexBody> ambient;
  /// Hull: co(points).
  std::vector<Vector> points;
  bool approximate = false;

  [[nodiscard]] bool empty() const { return kind == Kind::Empty; }
  /// Membership with strict parts needing slack above open_margin.
  [[nodiscard]] bool contains(const Vector &y, double open_margin = 1e-7) const;
};

/// Strict preference test y_i in P_i(x).
bool prefers(const PreferenceMap &pref, const Vector &x, const Vector &y, const Tolerances &tol = {});

/// P_i(x) intersected with X_i. Throws SelfPreference when x_i lies in co P_i(x).
PrefRegion pref_set(const PreferenceMap &pref, const Vector &x, const Tolerances &tol = {});

/// co P_i(x); identical to pref_set for the convex variants.
PrefRegion convexified_set(const PreferenceMap &pref, const Vector &x, const Tolerances &tol = {});

/// Points where a sampled relation is evaluated: box vertices of the choice
/// set's bounding box, its center, then seeded uniform points projected onto
/// the choice set.
std::vector<Vector> relation_samples(const ConvexBody &ambient, int count, std::uint64_t seed);

enum class Verdict { Holds, Fails, Unknown };
std::string to_string(Verdict v);

struct PropertyReport {
  Verdict status = Verdict::Unknown;
  /// Irreflexive/nonsatiated: {x}. Convex: {x, y1, y2}. Lsc: {x, y, x'}.
  std::vector<Vector> witness;
  std::optional<double> t;
};

struct RelationProfile {
  PropertyReport irreflexive;
  PropertyReport convex;
  PropertyReport nonsatiated;
  PropertyReport lsc_sampled;
  int sample_count = 0;
  std::uint64_t seed = 0;
};

/// Sampled evidence for the relation properties. Rival blocks are held at 0.
RelationProfile relation_profile(const PreferenceMap &pref, int samples, std::uint64_t seed);

/// Built-in relations: "strict_greater", "not_equal", "empty".
RelationOracle catalog_relation(const std::string &name);
std::vector<std::string> catalog_names();

} // namespace gnep
