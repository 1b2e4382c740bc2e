#pragma once

#include "gnep/convex_body.hpp"
#include "gnep/parametric.hpp"
#include "gnep/preferences.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gnep {

/// K_i(x) = { z_i : (x_{-i}, z_i) in shared set }.
struct SharedSlice {};
/// K_i(x) = body, independent of x.
struct FixedConstraint {
  ConvexBody body;
};
/// K_i(x) = { z_i : A(x) z_i <= b(x) } (strict flags ignored).
struct ParametricConstraint {
  AffineRows rows;
};
/// K_i(x) given by a callback returning halfspaces in z_i. Library-only:
/// callbacks cannot be serialized.
struct CallbackConstraint {
  std::string name;
  std::function<HalfspaceSystem(const Vector &x)> rows;
};

using ConstraintMap = std::variant<SharedSlice, FixedConstraint, ParametricConstraint, CallbackConstraint>;

std::string constraint_kind(const ConstraintMap &c);

struct PlayerSpec {
  ConvexBody choice_set;
  /// Utility coefficients may be given either for the joint point or for the
  /// player's own block only; own-block data is embedded with zeros.
  PreferenceVariant preference;
  ConstraintMap constraint = SharedSlice{};
  std::string name;
};

struct Player {
  ConvexBody choice_set;
  PreferenceMap preference;
  ConstraintMap constraint;
  std::string name;
  [[nodiscard]] int dim() const { return choice_set.dim(); }
};

/// Players with choice sets, constraint maps and preference maps; optionally
/// a shared polyhedral set coupling the players.
class GameInstance {
public:
  GameInstance() = default;
  GameInstance(std::vector<PlayerSpec> players, std::optional<ConvexBody> shared_set = std::nullopt);

  [[nodiscard]] int num_players() const { return static_cast<int>(players_.size()); }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const std::vector<Player> &players() const { return players_; }
  [[nodiscard]] const Player &player(int i) const { return players_.at(i); }
  [[nodiscard]] const Block &block(int i) const { return blocks_.at(i); }
  [[nodiscard]] const std::optional<ConvexBody> &shared_set() const { return shared_; }
  /// Shared set present and every player uses its slice.
  [[nodiscard]] bool jointly_convex() const;

  [[nodiscard]] Vector part(const Vector &x, int i) const;
  [[nodiscard]] Vector with_part(const Vector &x, int i, const Vector &z) const;

  /// Product of the choice sets.
  [[nodiscard]] ConvexBody choice_product() const;
  /// Shared set intersected with the product of choice sets (the VI feasible set).
  [[nodiscard]] ConvexBody vi_feasible_set() const;

private:
  std::vector<Player> players_;
  std::vector<Block> blocks_;
  std::optional<ConvexBody> shared_;
  int dim_ = 0;
};

/// { z_i : (x_{-i}, z_i) in shared set } intersected with X_i. Throws
/// NotJointlyConvex without a shared set.
ConvexBody slice_constraint(const GameInstance &game, int i, const Vector &x);

/// K_i(x) intersected with X_i for any constraint variant.
ConvexBody constraint_set(const GameInstance &game, int i, const Vector &x);

struct EquilibriumCertificate {
  Vector point;
  std::vector<double> feasibility_slacks;
  std::vector<double> emptiness_slacks;
  /// Per player, a strictly preferred feasible strategy when one was found.
  std::vector<std::optional<Vector>> improving;
  std::optional<double> vi_residual;
  Tolerances tol;
  bool approximate_cones = false;
  bool sampled_preferences = false;
  std::uint64_t seed = 0;
  bool equilibrium = false;
};

/// Checks x_i in K_i(x) and P_i(x) cap K_i(x) = empty for every player.
EquilibriumCertificate verify_equilibrium(const GameInstance &game, const Vector &x, const Tolerances &tol = {},
                                          std::uint64_t seed = 0);

/// Tri-state evidence for the coercivity conditions.
struct CoercivityReport {
  enum class Status { HoldsOnSamples, Violated, Vacuous };
  Status status = Status::Vacuous;
  /// Condition (c): a point of the feasible set inside the closed rho' ball.
  std::optional<bool> ball_meets_feasible;
  std::optional<Vector> ball_point;
  int samples_outside = 0;
  /// Violated: the far point with no preferred smaller-norm alternative.
  std::optional<Vector> witness;
  /// Holds: one (far point, improving point) pair per sample, in sample order.
  std::vector<std::pair<Vector, Vector>> improvements;
  std::uint64_t seed = 0;
};

std::string to_string(CoercivityReport::Status s);

/// Conditions (b) and (c) of the existence theorem for jointly convex games.
CoercivityReport check_coercivity_jointly_convex(const GameInstance &game, double rho, double rho_prime, int samples,
                                                 std::uint64_t seed, const Tolerances &tol = {});

/// The per-point criterion over K(x) with radius rho_x.
CoercivityReport check_Cx(const GameInstance &game, const Vector &x, double rho_x, int samples, std::uint64_t seed,
                          const Tolerances &tol = {});

} // namespace gnep
