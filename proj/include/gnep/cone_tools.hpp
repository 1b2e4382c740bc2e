#pragma once

#include "gnep/convex_body.hpp"

#include <vector>

namespace gnep::cone {

/// Vertices of a bounded polytope by brute-force subset enumeration.
/// Only meant for small dimensions (≤ 5) and a few dozen rows.
std::vector<Vector> enumerate_vertices(const HalfspaceSystem &closed, double tol = 1e-9);

/// Generators (extreme rays plus ± lineality basis) of { d : W d <= 0 }.
/// Rows of W live in R^dim. Subset enumeration, small dimensions only.
std::vector<Vector> cone_generators(const Matrix &W, int dim);

/// Drops generators lying in the cone spanned by the others.
std::vector<Vector> prune_redundant(const std::vector<Vector> &generators);

/// Minimum-norm point of co(points); returns the convex weights.
Vector min_norm_weights(const std::vector<Vector> &points);

/// Orthogonal projector onto null(E) (identity when E has no rows).
Matrix tangent_projector(const Matrix &E, int dim);

} // namespace gnep::cone
