#include "gnep/normal_operator.hpp"

#include "gnep/cone_tools.hpp"
#include "gnep/error.hpp"

namespace gnep {

std::string to_string(SelectionRule rule) {
  switch (rule) {
  case SelectionRule::First: return "first";
  case SelectionRule::Centroid: return "centroid";
  case SelectionRule::MinNormHull: return "min_norm_hull";
  }
  return "min_norm_hull";
}

SelectionRule parse_selection(const std::string &name) {
  if (name == "first") return SelectionRule::First;
  if (name == "centroid") return SelectionRule::Centroid;
  if (name == "min_norm_hull") return SelectionRule::MinNormHull;
  throw Error(ErrorCode::InvalidArgument, "unknown selection rule '" + name + "'");
}

Matrix tangent_basis(const ConvexBody &body) {
  const Matrix E = body.affine_equalities();
  const int n = body.dim();
  if (E.rows() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(E, Eigen::ComputeFullV);
  const auto &s = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > 1e-10 * std::max(1.0, s[0])) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

namespace {

ConeSection projected(const std::vector<Vector> &raw, const Matrix &basis, int dim) {
  ConeSection cone = ConeSection::zero(dim);
  const Matrix P = basis * basis.transpose();
  for (const auto &g : raw) {
    const Vector p = P * g;
    if (p.norm() > 1e-10 * std::max(1.0, g.norm())) cone.add(p);
  }
  return cone;
}

} // namespace

ConeSection normal_map(const PreferenceMap &pref, const Vector &x, const Tolerances &tol) {
  const PrefRegion region = convexified_set(pref, x, tol);
  const int ni = pref.block.size;
  const Vector own = x.segment(pref.block.offset, ni);
  const Matrix basis = tangent_basis(pref.ambient);

  switch (region.kind) {
  case PrefRegion::Kind::Empty: {
    ConeSection whole = ConeSection::whole(ni);
    whole.approximate = region.approximate;
    return whole;
  }
  case PrefRegion::Kind::Polyhedral: {
    const ConeSection raw = polyhedral_normal_cone(region.pieces.front().system().closure(), own, tol.activity);
    return projected(raw.generators, basis, ni);
  }
  case PrefRegion::Kind::Superlevel: {
    // cl P = {u >= u(x_i)} cap X_i with a Slater point, so its normal cone at
    // x_i is cone(-grad u) + N_{X_i}(x_i).
    std::vector<Vector> raw{-(region.utility->H * own + region.utility->g)};
    const ConeSection ambient_cone = normal_cone_generators(pref.ambient, own, tol);
    raw.insert(raw.end(), ambient_cone.generators.begin(), ambient_cone.generators.end());
    ConeSection cone = projected(raw, basis, ni);
    cone.approximate = ambient_cone.approximate;
    return cone;
  }
  case PrefRegion::Kind::Union:
  case PrefRegion::Kind::Hull: {
    // N = { d : <d, v - x_i> <= 0 for every hull point v }, inside the tangent space.
    const int k = static_cast<int>(basis.cols());
    Matrix W(static_cast<int>(region.points.size()), k);
    for (std::size_t j = 0; j < region.points.size(); ++j)
      W.row(static_cast<int>(j)) = (basis.transpose() * (region.points[j] - own)).transpose();
    ConeSection cone = ConeSection::zero(ni);
    for (const auto &y : cone::cone_generators(W, k)) cone.add(basis * y);
    if (static_cast<int>(cone.generators.size()) > 4 * ni) cone.generators = cone::prune_redundant(cone.generators);
    cone.approximate = region.approximate;
    return cone;
  }
  }
  return ConeSection::zero(ni);
}

OperatorEval evaluate_T(const GameInstance &game, const Vector &x, const Tolerances &tol) {
  if (x.size() != game.dim()) throw Error(ErrorCode::DimensionMismatch, "operator evaluated at a point of the wrong dimension");
  OperatorEval eval;
  eval.dim = game.dim();
  for (int i = 0; i < game.num_players(); ++i) {
    const Player &p = game.player(i);
    eval.blocks.push_back(normal_map(p.preference, x, tol));
    eval.layout.push_back(game.block(i));
    eval.tangent.push_back(tangent_basis(p.choice_set));
    eval.any_whole_space = eval.any_whole_space || eval.blocks.back().whole_space;
    eval.approximate = eval.approximate || eval.blocks.back().approximate;
  }
  return eval;
}

Vector select(const OperatorEval &eval, SelectionRule rule) {
  Vector t = Vector::Zero(eval.dim);
  for (std::size_t i = 0; i < eval.blocks.size(); ++i) {
    const ConeSection &c = eval.blocks[i];
    const Block &b = eval.layout[i];
    if (c.whole_space || c.generators.empty()) continue;
    Vector s = Vector::Zero(b.size);
    switch (rule) {
    case SelectionRule::First: s = c.generators.front(); break;
    case SelectionRule::Centroid:
      for (const auto &g : c.generators) s += g;
      s /= static_cast<double>(c.generators.size());
      break;
    case SelectionRule::MinNormHull: {
      const Vector w = cone::min_norm_weights(c.generators);
      for (std::size_t j = 0; j < c.generators.size(); ++j) s += w[static_cast<int>(j)] * c.generators[j];
      break;
    }
    }
    t.segment(b.offset, b.size) = s;
  }
  return t;
}

} // namespace gnep
