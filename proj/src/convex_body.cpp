#include "gnep/convex_body.hpp"

#include "gnep/cone_tools.hpp"
#include "gnep/error.hpp"
#include "gnep/lp.hpp"
#include "gnep/qp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace gnep {

// ---------------------------------------------------------------------------
// HalfspaceSystem

HalfspaceSystem HalfspaceSystem::in_dim(int dim) {
  HalfspaceSystem s;
  s.A = Matrix(0, dim);
  s.b = Vector(0);
  s.A_eq = Matrix(0, dim);
  s.b_eq = Vector(0);
  return s;
}

bool HalfspaceSystem::any_strict() const {
  return std::any_of(strict.begin(), strict.end(), [](bool s) { return s; });
}

void HalfspaceSystem::add_row(const Eigen::Ref<const Eigen::RowVectorXd> &a, double rhs,
                              bool is_strict) {
  const auto m = A.rows();
  A.conservativeResize(m + 1, a.size());
  A.row(m) = a;
  b.conservativeResize(m + 1);
  b[m] = rhs;
  strict.resize(m + 1, false);
  strict[m] = is_strict;
}

void HalfspaceSystem::add_eq(const Eigen::Ref<const Eigen::RowVectorXd> &a, double rhs) {
  const auto m = A_eq.rows();
  A_eq.conservativeResize(m + 1, a.size());
  A_eq.row(m) = a;
  b_eq.conservativeResize(m + 1);
  b_eq[m] = rhs;
}

void HalfspaceSystem::append(const HalfspaceSystem &other) {
  if (other.dim() != dim()) throw Error(ErrorCode::DimensionMismatch, "appending halfspaces of another dimension");
  for (int i = 0; i < other.rows(); ++i) add_row(other.A.row(i), other.b[i], other.strict[i]);
  for (int i = 0; i < other.eq_rows(); ++i) add_eq(other.A_eq.row(i), other.b_eq[i]);
}

HalfspaceSystem HalfspaceSystem::closure() const {
  HalfspaceSystem s = *this;
  std::fill(s.strict.begin(), s.strict.end(), false);
  return s;
}

double HalfspaceSystem::max_violation(const Vector &x) const {
  double worst = 0.0;
  if (rows() > 0) worst = std::max(worst, (A * x - b).maxCoeff());
  if (eq_rows() > 0) worst = std::max(worst, (A_eq * x - b_eq).cwiseAbs().maxCoeff());
  return worst;
}

std::optional<double> HalfspaceSystem::max_strict_margin() const {
  const auto res = strict_margin_point();
  if (!res) return std::nullopt;
  return res->first;
}

std::optional<std::pair<double, Vector>> HalfspaceSystem::strict_margin_point() const {
  const int n = dim();
  lp::LinearProgram program(n + 1);
  program.objective[n] = 1.0;
  for (int i = 0; i < rows(); ++i) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n + 1);
    row.head(n) = A.row(i);
    if (strict[i]) row[n] = A.row(i).norm();
    program.add_le(row, b[i]);
  }
  for (int i = 0; i < eq_rows(); ++i) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n + 1);
    row.head(n) = A_eq.row(i);
    program.add_eq(row, b_eq[i]);
  }
  Eigen::RowVectorXd cap = Eigen::RowVectorXd::Zero(n + 1);
  cap[n] = 1.0;
  program.add_le(cap, 1.0);
  const auto res = lp::solve(program);
  if (!res.optimal()) return std::nullopt;
  return std::make_pair(any_strict() ? res.x[n] : 1.0, Vector(res.x.head(n)));
}

// ---------------------------------------------------------------------------
// ConvexBody construction

ConvexBody ConvexBody::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() == 0)
    throw Error(ErrorCode::InvalidArgument, "box bounds must be nonempty and of equal length");
  if ((lower.array() > upper.array()).any())
    throw Error(ErrorCode::InvalidArgument, "box requires lower <= upper");
  ConvexBody b;
  b.kind_ = Kind::Box;
  b.dim_ = static_cast<int>(lower.size());
  b.lower_ = std::move(lower);
  b.upper_ = std::move(upper);
  return b;
}

ConvexBody ConvexBody::simplex(int dim, double scale) {
  if (dim <= 0 || !(scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "simplex needs dim > 0 and scale > 0");
  ConvexBody b;
  b.kind_ = Kind::Simplex;
  b.dim_ = dim;
  b.scale_ = scale;
  return b;
}

ConvexBody ConvexBody::hpoly(HalfspaceSystem system) {
  const int n = std::max(system.dim(), static_cast<int>(system.A_eq.cols()));
  if (n <= 0) throw Error(ErrorCode::InvalidArgument, "hpoly needs a positive dimension");
  if (system.A.cols() != n) system.A.resize(0, n);
  if (system.A_eq.cols() != n) {
    if (system.A_eq.rows() > 0) throw Error(ErrorCode::DimensionMismatch, "hpoly equality rows");
    system.A_eq.resize(0, n);
    system.b_eq.resize(0);
  }
  if (system.b.size() != system.A.rows() || system.b_eq.size() != system.A_eq.rows())
    throw Error(ErrorCode::DimensionMismatch, "hpoly right-hand side length");
  system.strict.resize(system.A.rows(), false);
  ConvexBody b;
  b.kind_ = Kind::HPoly;
  b.dim_ = n;
  b.system_ = std::move(system);
  return b;
}

ConvexBody ConvexBody::ball(Vector center, double radius) {
  if (center.size() == 0 || !(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "ball needs radius > 0");
  ConvexBody b;
  b.kind_ = Kind::Ball;
  b.dim_ = static_cast<int>(center.size());
  b.center_ = std::move(center);
  b.radius_ = radius;
  return b;
}

ConvexBody ConvexBody::intersection(std::vector<ConvexBody> parts) {
  if (parts.empty()) throw Error(ErrorCode::InvalidArgument, "intersection of nothing");
  const int n = parts.front().dim();
  for (const auto &p : parts)
    if (p.dim() != n) throw Error(ErrorCode::DimensionMismatch, "intersection parts differ in dimension");
  ConvexBody b;
  b.kind_ = Kind::Intersection;
  b.dim_ = n;
  b.parts_ = std::move(parts);
  return b;
}

ConvexBody ConvexBody::product(const std::vector<ConvexBody> &factors) {
  int n = 0;
  for (const auto &f : factors) n += f.dim();
  HalfspaceSystem s = HalfspaceSystem::in_dim(n);
  int offset = 0;
  for (const auto &f : factors) {
    const HalfspaceSystem h = f.halfspaces();
    for (int i = 0; i < h.rows(); ++i) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
      row.segment(offset, f.dim()) = h.A.row(i);
      s.add_row(row, h.b[i], h.strict[i]);
    }
    for (int i = 0; i < h.eq_rows(); ++i) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
      row.segment(offset, f.dim()) = h.A_eq.row(i);
      s.add_eq(row, h.b_eq[i]);
    }
    offset += f.dim();
  }
  return hpoly(std::move(s));
}

// ---------------------------------------------------------------------------
// Queries

bool ConvexBody::is_polyhedral() const {
  switch (kind_) {
  case Kind::Ball: return false;
  case Kind::Intersection:
    return std::all_of(parts_.begin(), parts_.end(), [](const ConvexBody &p) { return p.is_polyhedral(); });
  default: return true;
  }
}

bool ConvexBody::has_strict_faces() const {
  if (kind_ == Kind::HPoly) return system_.any_strict();
  if (kind_ == Kind::Intersection)
    return std::any_of(parts_.begin(), parts_.end(), [](const ConvexBody &p) { return p.has_strict_faces(); });
  return false;
}

HalfspaceSystem ConvexBody::halfspaces() const {
  HalfspaceSystem s = HalfspaceSystem::in_dim(dim_);
  switch (kind_) {
  case Kind::Box:
    for (int k = 0; k < dim_; ++k) {
      Eigen::RowVectorXd e = Eigen::RowVectorXd::Unit(dim_, k);
      if (lower_[k] == upper_[k]) {
        s.add_eq(e, lower_[k]);
      } else {
        s.add_row(e, upper_[k]);
        s.add_row(-e, -lower_[k]);
      }
    }
    return s;
  case Kind::Simplex:
    for (int k = 0; k < dim_; ++k) s.add_row(-Eigen::RowVectorXd::Unit(dim_, k), 0.0);
    s.add_eq(Eigen::RowVectorXd::Ones(dim_), scale_);
    return s;
  case Kind::HPoly: return system_;
  case Kind::Intersection:
    for (const auto &p : parts_) s.append(p.halfspaces());
    return s;
  case Kind::Ball: break;
  }
  throw Error(ErrorCode::Unsupported, "ball has no finite H-representation");
}

Matrix ConvexBody::affine_equalities() const {
  switch (kind_) {
  case Kind::Box: {
    std::vector<int> fixed;
    for (int k = 0; k < dim_; ++k)
      if (lower_[k] == upper_[k]) fixed.push_back(k);
    Matrix E = Matrix::Zero(static_cast<int>(fixed.size()), dim_);
    for (std::size_t i = 0; i < fixed.size(); ++i) E(static_cast<int>(i), fixed[i]) = 1.0;
    return E;
  }
  case Kind::Simplex: return Matrix::Ones(1, dim_);
  case Kind::HPoly: return system_.A_eq;
  case Kind::Ball: return Matrix(0, dim_);
  case Kind::Intersection: {
    Matrix E(0, dim_);
    for (const auto &p : parts_) {
      const Matrix Ep = p.affine_equalities();
      Matrix merged(E.rows() + Ep.rows(), dim_);
      merged << E, Ep;
      E = merged;
    }
    return E;
  }
  }
  return Matrix(0, dim_);
}

ConvexBody ConvexBody::closure() const {
  if (kind_ == Kind::HPoly) return hpoly(system_.closure());
  if (kind_ == Kind::Intersection) {
    std::vector<ConvexBody> closed;
    for (const auto &p : parts_) closed.push_back(p.closure());
    return intersection(std::move(closed));
  }
  return *this;
}

bool ConvexBody::contains(const Vector &x, double eps) const {
  if (x.size() != dim_) throw Error(ErrorCode::DimensionMismatch, "membership query dimension");
  switch (kind_) {
  case Kind::Box: return (x.array() >= lower_.array() - eps).all() && (x.array() <= upper_.array() + eps).all();
  case Kind::Simplex: return (x.array() >= -eps).all() && std::abs(x.sum() - scale_) <= eps * std::max(1.0, scale_);
  case Kind::HPoly: {
    for (int i = 0; i < system_.rows(); ++i)
      if (system_.A.row(i).dot(x) - system_.b[i] > eps * std::max(1.0, system_.A.row(i).norm())) return false;
    for (int i = 0; i < system_.eq_rows(); ++i)
      if (std::abs(system_.A_eq.row(i).dot(x) - system_.b_eq[i]) > eps * std::max(1.0, system_.A_eq.row(i).norm()))
        return false;
    return true;
  }
  case Kind::Ball: return (x - center_).norm() <= radius_ + eps;
  case Kind::Intersection:
    return std::all_of(parts_.begin(), parts_.end(), [&](const ConvexBody &p) { return p.contains(x, eps); });
  }
  return false;
}

bool ConvexBody::contains_open(const Vector &x, double open_margin) const {
  if (kind_ == Kind::HPoly) {
    if (!contains(x, 1e-9)) return false;
    for (int i = 0; i < system_.rows(); ++i) {
      if (!system_.strict[i]) continue;
      if (system_.b[i] - system_.A.row(i).dot(x) <= open_margin * system_.A.row(i).norm()) return false;
    }
    return true;
  }
  if (kind_ == Kind::Intersection)
    return std::all_of(parts_.begin(), parts_.end(), [&](const ConvexBody &p) { return p.contains_open(x, open_margin); });
  return contains(x, 1e-9);
}

namespace {

HalfspaceSystem merged_polyhedral(const std::vector<ConvexBody> &parts, int dim, std::vector<ConvexBody> &balls) {
  HalfspaceSystem s = HalfspaceSystem::in_dim(dim);
  for (const auto &p : parts) {
    if (p.is_polyhedral()) s.append(p.halfspaces());
    else if (p.kind() == ConvexBody::Kind::Ball) balls.push_back(p);
    else {
      std::vector<ConvexBody> inner_balls;
      s.append(merged_polyhedral(p.parts(), dim, inner_balls));
      balls.insert(balls.end(), inner_balls.begin(), inner_balls.end());
    }
  }
  return s;
}

Vector project_simplex(const Vector &x, double scale) {
  Vector u = x;
  std::sort(u.data(), u.data() + u.size(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (int j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - scale) / (j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (x.array() - theta).max(0.0).matrix();
}

Vector project_polyhedral(const HalfspaceSystem &closed, const Vector &x, const std::optional<Vector> &warm) {
  if (closed.max_violation(x) <= 0.0) return x;
  qp::QuadraticProgram program;
  const int n = closed.dim();
  program.H = Matrix::Identity(n, n);
  program.g = -x;
  program.A_ub = closed.A;
  program.b_ub = closed.b;
  program.A_eq = closed.A_eq;
  program.b_eq = closed.b_eq;
  std::optional<Vector> start;
  if (warm && closed.max_violation(*warm) <= 1e-12) start = warm;
  auto res = qp::solve(program, start);
  if (!res.optimal()) throw Error(ErrorCode::EmptyBody, "projection onto an infeasible H-polytope");
  return res.z;
}

Vector dykstra(const std::vector<ConvexBody> &parts, const Vector &x) {
  constexpr int kMaxSweeps = 10000;
  constexpr double kGap = 1e-10;
  std::vector<Vector> increments(parts.size(), Vector::Zero(x.size()));
  Vector y = x;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const Vector before = y;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const Vector shifted = y + increments[k];
      const Vector z = project(parts[k], shifted);
      increments[k] = shifted - z;
      y = z;
    }
    if ((y - before).norm() <= kGap) break;
  }
  return y;
}

std::vector<ConvexBody> dykstra_parts(const ConvexBody &body) {
  std::vector<ConvexBody> balls;
  HalfspaceSystem poly = merged_polyhedral(body.parts(), body.dim(), balls);
  std::vector<ConvexBody> parts;
  if (poly.rows() + poly.eq_rows() > 0) parts.push_back(ConvexBody::hpoly(poly.closure()));
  parts.insert(parts.end(), balls.begin(), balls.end());
  return parts;
}

} // namespace

bool ConvexBody::is_empty(double open_margin) const {
  switch (kind_) {
  case Kind::Box:
  case Kind::Simplex:
  case Kind::Ball: return false;
  case Kind::HPoly: {
    const auto margin = system_.max_strict_margin();
    if (!margin) return true;
    return system_.any_strict() && *margin <= open_margin;
  }
  case Kind::Intersection: {
    if (is_polyhedral()) return hpoly(halfspaces()).is_empty(open_margin);
    std::vector<ConvexBody> balls;
    HalfspaceSystem poly = merged_polyhedral(parts_, dim_, balls);
    if (poly.rows() + poly.eq_rows() > 0 && hpoly(poly).is_empty(open_margin)) return true;
    const auto parts = dykstra_parts(*this);
    const Vector y = dykstra(parts, balls.front().center());
    return !contains(y, 1e-7);
  }
  }
  return false;
}

std::optional<std::pair<Vector, Vector>> ConvexBody::bounding_box() const {
  switch (kind_) {
  case Kind::Box: return std::make_pair(lower_, upper_);
  case Kind::Simplex: return std::make_pair(Vector::Zero(dim_).eval(), Vector::Constant(dim_, scale_).eval());
  case Kind::Ball:
    return std::make_pair((center_.array() - radius_).matrix().eval(), (center_.array() + radius_).matrix().eval());
  default: break;
  }
  if (kind_ == Kind::Intersection && !is_polyhedral()) {
    std::optional<std::pair<Vector, Vector>> acc;
    for (const auto &p : parts_) {
      auto bb = p.bounding_box();
      if (!bb) continue;
      if (!acc) acc = bb;
      else {
        acc->first = acc->first.cwiseMax(bb->first);
        acc->second = acc->second.cwiseMin(bb->second);
      }
    }
    return acc;
  }
  Vector lo(dim_), hi(dim_);
  for (int k = 0; k < dim_; ++k) {
    auto up = maximize(Vector::Unit(dim_, k));
    auto down = maximize(-Vector::Unit(dim_, k));
    if (!up || !down) return std::nullopt;
    hi[k] = (*up)[k];
    lo[k] = (*down)[k];
  }
  return std::make_pair(lo, hi);
}

std::optional<Vector> ConvexBody::maximize(const Vector &c) const {
  switch (kind_) {
  case Kind::Box: {
    Vector z(dim_);
    for (int k = 0; k < dim_; ++k) z[k] = c[k] >= 0.0 ? upper_[k] : lower_[k];
    return z;
  }
  case Kind::Simplex: {
    Eigen::Index best = 0;
    c.maxCoeff(&best);
    return Vector(scale_ * Vector::Unit(dim_, best));
  }
  case Kind::Ball: {
    const double nc = c.norm();
    if (nc == 0.0) return center_;
    return Vector(center_ + radius_ * c / nc);
  }
  default: break;
  }
  if (!is_polyhedral()) throw Error(ErrorCode::Unsupported, "linear maximization over a non-polyhedral intersection");
  const HalfspaceSystem s = halfspaces();
  lp::LinearProgram program(dim_);
  program.objective = c;
  if (s.rows() > 0) {
    program.A_ub = s.A;
    program.b_ub = s.b;
  }
  if (s.eq_rows() > 0) {
    program.A_eq = s.A_eq;
    program.b_eq = s.b_eq;
  }
  const auto res = lp::solve(program);
  if (res.status == lp::Status::Infeasible) throw Error(ErrorCode::EmptyBody, "maximize over an empty body");
  if (res.status == lp::Status::Unbounded) return std::nullopt;
  return res.x;
}

std::string ConvexBody::kind_name() const {
  switch (kind_) {
  case Kind::Box: return "box";
  case Kind::Simplex: return "simplex";
  case Kind::HPoly: return "hpoly";
  case Kind::Ball: return "ball";
  case Kind::Intersection: return "intersection";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// ConeSection

ConeSection ConeSection::whole(int dim) {
  ConeSection c;
  c.whole_space = true;
  c.dim = dim;
  return c;
}

ConeSection ConeSection::zero(int dim) {
  ConeSection c;
  c.dim = dim;
  return c;
}

void ConeSection::add(const Vector &g) {
  const double n = g.norm();
  if (!(n > 1e-12)) return;
  const Vector unit = g / n;
  for (const auto &h : generators)
    if ((h - unit).norm() <= 1e-10) return;
  generators.push_back(unit);
}

// ---------------------------------------------------------------------------
// Projection, separation, normal cones

Vector project(const ConvexBody &body, const Vector &x, const std::optional<Vector> &warm) {
  if (x.size() != body.dim()) throw Error(ErrorCode::DimensionMismatch, "projection dimension");
  switch (body.kind()) {
  case ConvexBody::Kind::Box: return x.cwiseMax(body.lower()).cwiseMin(body.upper());
  case ConvexBody::Kind::Simplex: return project_simplex(x, body.scale());
  case ConvexBody::Kind::Ball: {
    const Vector d = x - body.center();
    const double n = d.norm();
    if (n <= body.radius()) return x;
    return body.center() + body.radius() * d / n;
  }
  case ConvexBody::Kind::HPoly: return project_polyhedral(body.system().closure(), x, warm);
  case ConvexBody::Kind::Intersection:
    if (body.is_polyhedral()) return project_polyhedral(body.halfspaces().closure(), x, warm);
    return dykstra(dykstra_parts(body), x);
  }
  return x;
}

namespace {

// Unit outward normals of faces active at y (closure), and whether y is
// strictly interior (no active rows and no equalities).
std::vector<Vector> active_normals(const HalfspaceSystem &closed, const Vector &y, double activity, bool &interior) {
  std::vector<Vector> normals;
  const double yscale = std::max(1.0, y.cwiseAbs().maxCoeff());
  for (int i = 0; i < closed.rows(); ++i) {
    const double an = closed.A.row(i).norm();
    if (an == 0.0) continue;
    if (std::abs(closed.b[i] - closed.A.row(i).dot(y)) <= activity * an * yscale)
      normals.push_back(closed.A.row(i).transpose() / an);
  }
  interior = normals.empty() && closed.eq_rows() == 0;
  return normals;
}

} // namespace

Vector separate(const ConvexBody &body, const Vector &y, const Tolerances &tol) {
  if (y.size() != body.dim()) throw Error(ErrorCode::DimensionMismatch, "separation dimension");
  const Vector p = project(body, y);
  const Vector r = y - p;
  if (r.norm() > 1e-12 * std::max(1.0, y.norm())) return r / r.norm();

  if (body.kind() == ConvexBody::Kind::Ball) {
    const Vector d = y - body.center();
    if (d.norm() < body.radius() * (1.0 - 1e-12)) throw Error(ErrorCode::InteriorPoint, "point is interior to the ball");
    return d / d.norm();
  }
  if (!body.is_polyhedral()) {
    std::vector<Vector> normals;
    for (const auto &part : body.parts()) {
      try {
        normals.push_back(separate(part, y, tol));
      } catch (const Error &e) {
        if (e.code() != ErrorCode::InteriorPoint) throw;
      }
    }
    if (normals.empty()) throw Error(ErrorCode::InteriorPoint, "point is interior to every part");
    Vector mean = Vector::Zero(y.size());
    for (const auto &n : normals) mean += n;
    if (mean.norm() < 1e-12) return normals.front();
    return mean / mean.norm();
  }

  const HalfspaceSystem closed = body.halfspaces().closure();
  bool interior = false;
  const auto normals = active_normals(closed, y, tol.activity, interior);
  if (interior) throw Error(ErrorCode::InteriorPoint, "point is strictly interior; no nonzero normal exists");
  if (normals.empty()) {
    const Vector e = closed.A_eq.row(0).transpose();
    return e / e.norm();
  }
  Vector mean = Vector::Zero(y.size());
  for (const auto &n : normals) mean += n;
  if (mean.norm() < 1e-12) return normals.front();
  return mean / mean.norm();
}

ConeSection polyhedral_normal_cone(const HalfspaceSystem &closed, const Vector &y, double activity) {
  const int n = closed.dim();
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> rhs;
  for (int i = 0; i < closed.rows(); ++i) {
    rows.push_back(closed.A.row(i));
    rhs.push_back(closed.b[i]);
  }
  for (int i = 0; i < closed.eq_rows(); ++i) {
    rows.push_back(closed.A_eq.row(i));
    rhs.push_back(closed.b_eq[i]);
    rows.push_back(-closed.A_eq.row(i));
    rhs.push_back(-closed.b_eq[i]);
  }
  const double yscale = std::max(1.0, y.cwiseAbs().maxCoeff());
  std::vector<int> active, violated, satisfied;
  std::vector<double> slack(rows.size());
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const double an = rows[j].norm();
    if (an == 0.0) continue;
    slack[j] = rhs[j] - rows[j].dot(y);
    const double thr = activity * an * yscale;
    if (std::abs(slack[j]) <= thr) active.push_back(static_cast<int>(j));
    else if (slack[j] < 0.0) violated.push_back(static_cast<int>(j));
    else satisfied.push_back(static_cast<int>(j));
  }
  std::vector<Vector> raw;
  for (int j : active) raw.push_back(rows[j].transpose());
  for (int u : violated) {
    raw.push_back(rows[u].transpose());
    for (int v : satisfied) raw.push_back(slack[v] * rows[u].transpose() - slack[u] * rows[v].transpose());
  }
  ConeSection cone = ConeSection::zero(n);
  for (const auto &g : raw) cone.add(g);
  if (static_cast<int>(cone.generators.size()) > 4 * n) cone.generators = cone::prune_redundant(cone.generators);
  return cone;
}

namespace {

// Orthonormal basis of the complement of u.
Matrix complement_basis(const Vector &u) {
  const int n = static_cast<int>(u.size());
  Matrix M = Matrix::Identity(n, n) - u * u.transpose();
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU);
  return svd.matrixU().leftCols(n - 1);
}

ConeSection ball_normal_cone(const ConvexBody &ball, const Vector &y) {
  const int n = ball.dim();
  const Vector d = y - ball.center();
  const double dist = d.norm();
  const double r = ball.radius();
  ConeSection cone = ConeSection::zero(n);
  if (dist < r * (1.0 - 1e-12)) return cone;
  const Vector axis = d / dist;
  if (dist <= r * (1.0 + 1e-12) || n == 1) {
    cone.add(axis);
    return cone;
  }
  const double cos_t = r / dist;
  const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
  const Matrix W = complement_basis(axis);
  if (n == 2) {
    cone.add(cos_t * axis + sin_t * W.col(0));
    cone.add(cos_t * axis - sin_t * W.col(0));
    return cone;
  }
  // Circular cone: infinitely many extreme rays; sample 32 of them.
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < 32; ++k) {
    Vector w(n - 1);
    if (n == 3) {
      const double a = 2.0 * M_PI * k / 32.0;
      w << std::cos(a), std::sin(a);
    } else {
      for (int j = 0; j < n - 1; ++j) w[j] = gauss(rng);
      w.normalize();
    }
    cone.add(cos_t * axis + sin_t * (W * w));
  }
  cone.approximate = true;
  return cone;
}

} // namespace

ConeSection normal_cone_generators(const ConvexBody &body, const Vector &y, const Tolerances &tol) {
  if (y.size() != body.dim()) throw Error(ErrorCode::DimensionMismatch, "normal cone dimension");
  if (body.is_empty(tol.open_margin)) return ConeSection::whole(body.dim());
  if (body.is_polyhedral()) return polyhedral_normal_cone(body.halfspaces().closure(), y, tol.activity);
  if (body.kind() == ConvexBody::Kind::Ball) return ball_normal_cone(body, y);

  // Non-polyhedral intersection: sum of part cones at boundary points,
  // separation direction outside. Exact under a constraint qualification only.
  ConeSection cone = ConeSection::zero(body.dim());
  cone.approximate = true;
  if (!body.contains(y, 1e-9)) {
    cone.add(separate(body, y, tol));
    return cone;
  }
  for (const auto &part : body.parts()) {
    const ConeSection c = normal_cone_generators(part, y, tol);
    for (const auto &g : c.generators) cone.add(g);
  }
  return cone;
}

bool polar_check(const ConeSection &cone, const Vector &d) {
  if (d.size() != cone.dim) throw Error(ErrorCode::DimensionMismatch, "polar check dimension");
  if (cone.whole_space) return d.norm() <= 1e-12;
  return std::all_of(cone.generators.begin(), cone.generators.end(),
                     [&](const Vector &g) { return g.dot(d) <= 1e-9; });
}

} // namespace gnep
