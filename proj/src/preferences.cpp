#include "gnep/preferences.hpp"

#include "gnep/cone_tools.hpp"
#include "gnep/error.hpp"
#include "gnep/lp.hpp"
#include "gnep/qp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gnep {

namespace {

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

Vector own_block(const PreferenceMap &pref, const Vector &x) { return x.segment(pref.block.offset, pref.block.size); }

Vector with_block(const PreferenceMap &pref, const Vector &x, const Vector &y) {
  Vector z = x;
  z.segment(pref.block.offset, pref.block.size) = y;
  return z;
}

Matrix symmetric(const Matrix &Q) { return 0.5 * (Q + Q.transpose()); }

// Chebyshev distance from x to co(points), by LP.
double hull_distance(const std::vector<Vector> &points, const Vector &x) {
  const int k = static_cast<int>(points.size());
  const int n = static_cast<int>(x.size());
  // Variables: weights w (k), bound s.
  lp::LinearProgram program(k + 1);
  program.objective[k] = -1.0;
  for (int j = 0; j < k; ++j) program.set_nonnegative(j);
  for (int r = 0; r < n; ++r) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(k + 1);
    for (int j = 0; j < k; ++j) row[j] = points[j][r];
    row[k] = -1.0;
    program.add_le(row, x[r]);
    row.head(k) *= -1.0;
    program.add_le(row, -x[r]);
  }
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(k + 1);
  sum.head(k).setOnes();
  program.add_eq(sum, 1.0);
  const auto res = lp::solve(program);
  if (!res.optimal()) throw Error(ErrorCode::Numerical, "hull distance LP failed");
  return std::max(0.0, res.x[k]);
}

HalfspaceSystem piece_system(const AffineRows &rows, const ConvexBody &ambient, const Vector &x) {
  HalfspaceSystem s = rows.at(x);
  s.append(ambient.halfspaces());
  return s;
}

// Strict rows moved inward by margin * ||a||, then closed.
HalfspaceSystem tightened_closure(const HalfspaceSystem &s, double margin) {
  HalfspaceSystem t = s.closure();
  for (int j = 0; j < s.rows(); ++j)
    if (s.strict[j]) t.b[j] -= margin * s.A.row(j).norm();
  return t;
}

void require_polyhedral_ambient(const PreferenceMap &pref) {
  if (!pref.ambient.is_polyhedral())
    throw Error(ErrorCode::Unsupported, "polyhedral preferences need a polyhedral choice set");
}

PrefRegion sampled_region(const PreferenceMap &pref, const RelationOracle &oracle, const Vector &x) {
  PrefRegion region;
  region.dim = pref.block.size;
  region.approximate = true;
  const Vector own = own_block(pref, x);
  for (const auto &y : relation_samples(pref.ambient, oracle.sample_budget, oracle.seed))
    if (oracle.succ(own, y, x)) region.points.push_back(y);
  region.kind = region.points.empty() ? PrefRegion::Kind::Empty : PrefRegion::Kind::Hull;
  return region;
}

PrefRegion build_region(const PreferenceMap &pref, const Vector &x, const Tolerances &tol) {
  if (x.size() != pref.joint_dim) throw Error(ErrorCode::DimensionMismatch, "preference evaluated at a point of the wrong dimension");
  PrefRegion region;
  region.dim = pref.block.size;
  const Vector own = own_block(pref, x);
  return std::visit(
      overloaded{
          [&](const LinearUtility &) -> PrefRegion {
            const LocalQuadratic u = local_utility(pref, x);
            const double level = u.value(own);
            const auto best = maximize_utility(u, pref.ambient);
            if (best && best->value - level <= tol.open_margin) return region;
            if (pref.ambient.is_polyhedral()) {
              HalfspaceSystem s = pref.ambient.halfspaces();
              s.add_row(-u.g.transpose(), -u.g.dot(own), true);
              region.kind = PrefRegion::Kind::Polyhedral;
              region.pieces.push_back(ConvexBody::hpoly(std::move(s)));
              return region;
            }
            region.kind = PrefRegion::Kind::Superlevel;
            region.utility = u;
            region.level = level;
            region.ambient = pref.ambient;
            return region;
          },
          [&](const ConcaveQuadUtility &) -> PrefRegion {
            const LocalQuadratic u = local_utility(pref, x);
            const double level = u.value(own);
            const auto best = maximize_utility(u, pref.ambient);
            if (best && best->value - level <= tol.open_margin) return region;
            if (u.is_linear() && pref.ambient.is_polyhedral()) {
              HalfspaceSystem s = pref.ambient.halfspaces();
              s.add_row(-u.g.transpose(), -u.g.dot(own), true);
              region.kind = PrefRegion::Kind::Polyhedral;
              region.pieces.push_back(ConvexBody::hpoly(std::move(s)));
              return region;
            }
            region.kind = PrefRegion::Kind::Superlevel;
            region.utility = u;
            region.level = level;
            region.ambient = pref.ambient;
            return region;
          },
          [&](const PolyhedralPreference &p) -> PrefRegion {
            require_polyhedral_ambient(pref);
            ConvexBody body = ConvexBody::hpoly(piece_system(p.rows, pref.ambient, x));
            if (body.is_empty(tol.open_margin)) return region;
            region.kind = PrefRegion::Kind::Polyhedral;
            region.pieces.push_back(std::move(body));
            return region;
          },
          [&](const UnionPreference &p) -> PrefRegion {
            require_polyhedral_ambient(pref);
            for (const auto &piece : p.pieces) {
              ConvexBody body = ConvexBody::hpoly(piece_system(piece, pref.ambient, x));
              if (!body.is_empty(tol.open_margin)) region.pieces.push_back(std::move(body));
            }
            if (!region.pieces.empty()) region.kind = PrefRegion::Kind::Union;
            return region;
          },
          [&](const RelationOracle &o) -> PrefRegion { return sampled_region(pref, o, x); },
      },
      pref.variant);
}

// Vertices of the union's hull, using pieces with strict rows pulled inward.
std::vector<Vector> union_hull_points(const PrefRegion &region, double margin) {
  std::vector<Vector> points;
  for (const auto &piece : region.pieces) {
    const HalfspaceSystem inner = tightened_closure(piece.system(), margin);
    if (!lp::find_feasible(inner.A, inner.b, inner.A_eq, inner.b_eq).optimal()) continue;
    if (!ConvexBody::hpoly(inner).bounding_box())
      throw Error(ErrorCode::Unsupported, "hull of unbounded preference pieces");
    for (auto &v : cone::enumerate_vertices(inner)) points.push_back(std::move(v));
  }
  return points;
}

void self_preference(const PreferenceMap &pref, const Vector &own) {
  std::string where;
  for (int k = 0; k < own.size(); ++k) where += (k ? ", " : "") + std::to_string(own[k]);
  throw Error(ErrorCode::SelfPreference, "player strategy (" + where + ") lies in the convex hull of its own " +
                                              pref.variant_name() + " preference set");
}

} // namespace

// ---------------------------------------------------------------------------
// PreferenceMap

std::string PreferenceMap::variant_name() const {
  return std::visit(overloaded{
                        [](const LinearUtility &) { return std::string("linear_utility"); },
                        [](const ConcaveQuadUtility &) { return std::string("concave_quad_utility"); },
                        [](const PolyhedralPreference &) { return std::string("parametric_polyhedral"); },
                        [](const UnionPreference &) { return std::string("finite_union"); },
                        [](const RelationOracle &) { return std::string("relation_oracle"); },
                    },
                    variant);
}

bool PreferenceMap::is_utility() const {
  return std::holds_alternative<LinearUtility>(variant) || std::holds_alternative<ConcaveQuadUtility>(variant);
}

double PreferenceMap::utility(const Vector &x) const {
  if (const auto *lin = std::get_if<LinearUtility>(&variant)) return lin->c.dot(x);
  if (const auto *quad = std::get_if<ConcaveQuadUtility>(&variant)) return 0.5 * x.dot(quad->Q * x) + quad->c.dot(x);
  throw Error(ErrorCode::Unsupported, "utility requested from a non-utility preference");
}

Vector PreferenceMap::own_gradient(const Vector &x) const {
  if (const auto *lin = std::get_if<LinearUtility>(&variant)) return lin->c.segment(block.offset, block.size);
  if (const auto *quad = std::get_if<ConcaveQuadUtility>(&variant))
    return (symmetric(quad->Q) * x + quad->c).segment(block.offset, block.size);
  throw Error(ErrorCode::Unsupported, "gradient requested from a non-utility preference");
}

void PreferenceMap::validate() const {
  if (block.size <= 0 || block.offset < 0 || block.offset + block.size > joint_dim)
    throw Error(ErrorCode::DimensionMismatch, "preference block outside the joint point");
  if (ambient.dim() != block.size) throw Error(ErrorCode::DimensionMismatch, "choice set dimension differs from block size");
  std::visit(overloaded{
                 [&](const LinearUtility &u) {
                   if (u.c.size() != joint_dim) throw Error(ErrorCode::DimensionMismatch, "linear utility length");
                 },
                 [&](const ConcaveQuadUtility &u) {
                   if (u.c.size() != joint_dim || u.Q.rows() != joint_dim || u.Q.cols() != joint_dim)
                     throw Error(ErrorCode::DimensionMismatch, "quadratic utility shape");
                   const Matrix Hii = symmetric(u.Q).block(block.offset, block.offset, block.size, block.size);
                   const Eigen::SelfAdjointEigenSolver<Matrix> eig(Hii);
                   const double tol = 1e-10 * std::max(1.0, Hii.cwiseAbs().maxCoeff());
                   if (eig.eigenvalues().maxCoeff() > tol)
                     throw Error(ErrorCode::InvalidArgument, "quadratic utility is not concave in the player's own block");
                 },
                 [&](const PolyhedralPreference &p) {
                   p.rows.validate(joint_dim);
                   if (p.rows.local_dim() != block.size)
                     throw Error(ErrorCode::DimensionMismatch, "polyhedral preference width");
                 },
                 [&](const UnionPreference &p) {
                   if (p.pieces.empty()) throw Error(ErrorCode::InvalidArgument, "finite union needs at least one piece");
                   for (const auto &piece : p.pieces) {
                     piece.validate(joint_dim);
                     if (piece.local_dim() != block.size)
                       throw Error(ErrorCode::DimensionMismatch, "union piece width");
                   }
                 },
                 [&](const RelationOracle &o) {
                   if (!o.succ) throw Error(ErrorCode::InvalidArgument, "relation oracle without a callback");
                   if (o.sample_budget <= 0) throw Error(ErrorCode::InvalidArgument, "relation oracle sample budget");
                 },
             },
             variant);
}

LocalQuadratic local_utility(const PreferenceMap &pref, const Vector &x) {
  const int off = pref.block.offset;
  const int ni = pref.block.size;
  Vector rest = x;
  rest.segment(off, ni).setZero();
  LocalQuadratic u;
  if (const auto *lin = std::get_if<LinearUtility>(&pref.variant)) {
    u.H = Matrix::Zero(ni, ni);
    u.g = lin->c.segment(off, ni);
    u.constant = lin->c.dot(rest);
    return u;
  }
  if (const auto *quad = std::get_if<ConcaveQuadUtility>(&pref.variant)) {
    const Matrix Qs = symmetric(quad->Q);
    u.H = Qs.block(off, off, ni, ni);
    u.g = (Qs * rest).segment(off, ni) + quad->c.segment(off, ni);
    u.constant = 0.5 * rest.dot(Qs * rest) + quad->c.dot(rest);
    return u;
  }
  throw Error(ErrorCode::Unsupported, "local utility of a non-utility preference");
}

std::optional<UtilityMax> maximize_utility(const LocalQuadratic &u, const ConvexBody &body) {
  if (u.is_linear()) {
    const auto arg = body.maximize(u.g);
    if (!arg) return std::nullopt;
    return UtilityMax{*arg, u.value(*arg)};
  }
  if (!body.is_polyhedral()) throw Error(ErrorCode::Unsupported, "quadratic utility over a non-polyhedral set");
  const HalfspaceSystem s = body.halfspaces().closure();
  qp::QuadraticProgram program;
  program.H = -u.H;
  program.g = -u.g;
  program.A_ub = s.A;
  program.b_ub = s.b;
  program.A_eq = s.A_eq;
  program.b_eq = s.b_eq;
  const auto res = qp::solve(program);
  if (!res.optimal()) throw Error(ErrorCode::EmptyBody, "utility maximized over an empty set");
  return UtilityMax{res.z, u.value(res.z)};
}

// ---------------------------------------------------------------------------
// Regions

bool PrefRegion::contains(const Vector &y, double open_margin) const {
  switch (kind) {
  case Kind::Empty: return false;
  case Kind::Polyhedral: return pieces.front().contains_open(y, open_margin);
  case Kind::Superlevel: return ambient->contains(y) && utility->value(y) > level + open_margin;
  case Kind::Union:
    return std::any_of(pieces.begin(), pieces.end(), [&](const ConvexBody &p) { return p.contains_open(y, open_margin); });
  case Kind::Hull: return hull_distance(points, y) <= 1e-9;
  }
  return false;
}

bool prefers(const PreferenceMap &pref, const Vector &x, const Vector &y, const Tolerances &tol) {
  if (y.size() != pref.block.size) throw Error(ErrorCode::DimensionMismatch, "preference query dimension");
  if (const auto *o = std::get_if<RelationOracle>(&pref.variant)) return o->succ(own_block(pref, x), y, x);
  if (pref.is_utility()) {
    if (!pref.ambient.contains(y)) return false;
    return pref.utility(with_block(pref, x, y)) - pref.utility(x) > tol.open_margin;
  }
  return build_region(pref, x, tol).contains(y, tol.open_margin);
}

PrefRegion pref_set(const PreferenceMap &pref, const Vector &x, const Tolerances &tol) {
  PrefRegion region = build_region(pref, x, tol);
  const Vector own = own_block(pref, x);
  switch (region.kind) {
  case PrefRegion::Kind::Empty:
  case PrefRegion::Kind::Superlevel: break; // x_i is never strictly better than itself
  case PrefRegion::Kind::Polyhedral:
    if (region.contains(own, tol.open_margin)) self_preference(pref, own);
    break;
  case PrefRegion::Kind::Union: {
    const auto points = union_hull_points(region, tol.open_margin);
    if (!points.empty() && hull_distance(points, own) <= tol.open_margin) self_preference(pref, own);
    break;
  }
  case PrefRegion::Kind::Hull:
    if (hull_distance(region.points, own) <= tol.open_margin) self_preference(pref, own);
    break;
  }
  return region;
}

PrefRegion convexified_set(const PreferenceMap &pref, const Vector &x, const Tolerances &tol) {
  PrefRegion region = pref_set(pref, x, tol);
  if (region.kind != PrefRegion::Kind::Union) return region;
  PrefRegion hull;
  hull.kind = PrefRegion::Kind::Hull;
  hull.dim = region.dim;
  for (const auto &piece : region.pieces)
    for (auto &v : cone::enumerate_vertices(piece.system().closure())) hull.points.push_back(std::move(v));
  if (hull.points.empty()) hull.kind = PrefRegion::Kind::Empty;
  return hull;
}

// ---------------------------------------------------------------------------
// Sampled relations

std::vector<Vector> relation_samples(const ConvexBody &ambient, int count, std::uint64_t seed) {
  const int n = ambient.dim();
  auto bb = ambient.bounding_box();
  Vector lo = bb ? bb->first : Vector::Constant(n, -1.0);
  Vector hi = bb ? bb->second : Vector::Constant(n, 1.0);
  std::vector<Vector> out;
  auto push = [&](const Vector &p) {
    const Vector q = project(ambient, p);
    for (const auto &o : out)
      if (o == q) return;
    out.push_back(q);
  };
  if (n <= 10) {
    for (long mask = 0; mask < (1L << n); ++mask) {
      Vector v(n);
      for (int k = 0; k < n; ++k) v[k] = (mask >> k) & 1 ? hi[k] : lo[k];
      push(v);
    }
  }
  push(0.5 * (lo + hi));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  while (static_cast<int>(out.size()) < count) {
    Vector v(n);
    for (int k = 0; k < n; ++k) v[k] = lo[k] + unit(rng) * (hi[k] - lo[k]);
    const auto before = out.size();
    push(v);
    if (out.size() == before && hi == lo) break;
  }
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
  case Verdict::Holds: return "holds";
  case Verdict::Fails: return "fails";
  case Verdict::Unknown: return "unknown";
  }
  return "unknown";
}

RelationProfile relation_profile(const PreferenceMap &pref, int samples, std::uint64_t seed) {
  const auto *oracle = std::get_if<RelationOracle>(&pref.variant);
  if (!oracle) throw Error(ErrorCode::InvalidArgument, "relation_profile needs a relation oracle");
  const auto pts = relation_samples(pref.ambient, samples, seed);
  auto joint = [&](const Vector &own) { return with_block(pref, Vector::Zero(pref.joint_dim), own); };
  auto succ = [&](const Vector &own, const Vector &y) { return oracle->succ(own, y, joint(own)); };

  RelationProfile profile;
  profile.sample_count = static_cast<int>(pts.size());
  profile.seed = seed;

  profile.irreflexive.status = Verdict::Holds;
  for (const auto &x : pts) {
    if (succ(x, x)) {
      profile.irreflexive = {Verdict::Fails, {x}, std::nullopt};
      break;
    }
  }

  profile.nonsatiated.status = Verdict::Holds;
  for (const auto &x : pts) {
    const bool improvable = std::any_of(pts.begin(), pts.end(), [&](const Vector &z) { return succ(x, z); });
    if (!improvable) {
      profile.nonsatiated = {Verdict::Fails, {x}, std::nullopt};
      break;
    }
  }

  // Convexity: reflected pairs about each base point first (midpoint equals
  // the base), then random pairs with random weights.
  profile.convex.status = Verdict::Holds;
  auto check_triple = [&](const Vector &x, const Vector &y1, const Vector &y2, double t) {
    if (!pref.ambient.contains(y2) || !succ(x, y1) || !succ(x, y2)) return false;
    if (succ(x, t * y1 + (1.0 - t) * y2)) return false;
    profile.convex = {Verdict::Fails, {x, y1, y2}, t};
    return true;
  };
  bool found = false;
  for (std::size_t a = 0; a < pts.size() && !found; ++a)
    for (std::size_t b = 0; b < pts.size() && !found; ++b)
      found = check_triple(pts[a], pts[b], 2.0 * pts[a] - pts[b], 0.5);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int s = 0; s < samples && !found; ++s) {
    const auto &x = pts[pick(rng)];
    const auto &y1 = pts[pick(rng)];
    const auto &y2 = pts[pick(rng)];
    found = check_triple(x, y1, y2, unit(rng));
  }

  // Lower sections open: a preferred pair should survive small moves of the base.
  profile.lsc_sampled.status = Verdict::Holds;
  const auto bb = pref.ambient.bounding_box();
  const double width = bb ? std::max(1.0, (bb->second - bb->first).maxCoeff()) : 1.0;
  const double delta = 1e-3 * width;
  found = false;
  for (std::size_t a = 0; a < pts.size() && !found; ++a) {
    for (std::size_t b = 0; b < pts.size() && !found; ++b) {
      if (!succ(pts[a], pts[b])) continue;
      for (int k = 0; k < pref.block.size && !found; ++k) {
        for (double sign : {1.0, -1.0}) {
          const Vector moved = pts[a] + sign * delta * Vector::Unit(pref.block.size, k);
          if (!pref.ambient.contains(moved)) continue;
          if (!succ(moved, pts[b])) {
            profile.lsc_sampled = {Verdict::Fails, {pts[a], pts[b], moved}, std::nullopt};
            found = true;
            break;
          }
        }
      }
    }
  }
  return profile;
}

RelationOracle catalog_relation(const std::string &name) {
  RelationOracle o;
  o.name = name;
  if (name == "strict_greater") {
    o.succ = [](const Vector &own, const Vector &y, const Vector &) { return (y.array() > own.array()).all(); };
  } else if (name == "not_equal") {
    o.succ = [](const Vector &own, const Vector &y, const Vector &) { return (y.array() != own.array()).any(); };
  } else if (name == "empty") {
    o.succ = [](const Vector &, const Vector &, const Vector &) { return false; };
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown catalog relation '" + name + "'");
  }
  return o;
}

std::vector<std::string> catalog_names() { return {"strict_greater", "not_equal", "empty"}; }

} // namespace gnep
