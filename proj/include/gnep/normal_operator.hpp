#pragma once

#include "gnep/convex_body.hpp"
#include "gnep/game.hpp"
#include "gnep/preferences.hpp"

#include <string>
#include <vector>

namespace gnep {

enum class SelectionRule { First, Centroid, MinNormHull };
std::string to_string(SelectionRule rule);
SelectionRule parse_selection(const std::string &name);

/// T(x) as a product of per-player cone sections.
struct OperatorEval {
  std::vector<ConeSection> blocks;
  std::vector<Block> layout;
  /// Orthonormal basis (columns) of the direction space of each choice set's
  /// affine hull. Generators live in this subspace.
  std::vector<Matrix> tangent;
  int dim = 0;
  bool any_whole_space = false;
  bool approximate = false;
};

/// Orthonormal basis of the directions compatible with the body's structural
/// affine equalities.
Matrix tangent_basis(const ConvexBody &body);

/// N_{co P_i(x)}(x_i), projected onto the choice set's direction space and
/// intersected with the unit sphere. whole_space iff co P_i(x) is empty.
ConeSection normal_map(const PreferenceMap &pref, const Vector &x, const Tolerances &tol = {});

OperatorEval evaluate_T(const GameInstance &game, const Vector &x, const Tolerances &tol = {});

/// One element of T(x). Blocks with whole_space (or no generators) give 0.
Vector select(const OperatorEval &eval, SelectionRule rule = SelectionRule::MinNormHull);

} // namespace gnep
