#include "gnep/error.hpp"
#include "gnep/game.hpp"
#include "gnep/lp.hpp"
#include "gnep/parallel.hpp"

#include <cmath>
#include <random>

namespace gnep {

std::string to_string(CoercivityReport::Status s) {
  switch (s) {
  case CoercivityReport::Status::HoldsOnSamples: return "holds_on_samples";
  case CoercivityReport::Status::Violated: return "violated";
  case CoercivityReport::Status::Vacuous: return "vacuous";
  }
  return "vacuous";
}

namespace {

constexpr int kNormCuts = 16;
constexpr int kCutRounds = 32;
constexpr int kBacktracks = 40;

// Largest Euclidean norm over a box.
double box_sup_norm(const Vector &lo, const Vector &hi) { return lo.cwiseAbs().cwiseMax(hi.cwiseAbs()).norm(); }

std::vector<Vector> cut_directions(const Vector &y, std::mt19937_64 &rng) {
  const int n = static_cast<int>(y.size());
  std::vector<Vector> dirs{y / y.norm()};
  for (int k = 0; k < n && static_cast<int>(dirs.size()) < kNormCuts; ++k) {
    dirs.push_back(Vector::Unit(n, k));
    if (static_cast<int>(dirs.size()) < kNormCuts) dirs.push_back(-Vector::Unit(n, k));
  }
  std::normal_distribution<double> gauss;
  while (static_cast<int>(dirs.size()) < kNormCuts) {
    Vector d(n);
    for (int k = 0; k < n; ++k) d[k] = gauss(rng);
    dirs.push_back(d / d.norm());
  }
  return dirs;
}

bool all_prefer(const GameInstance &game, const Vector &y, const Vector &z, const Tolerances &tol) {
  for (int i = 0; i < game.num_players(); ++i)
    if (!prefers(game.player(i).preference, y, game.part(z, i), tol)) return false;
  return true;
}

// A point z of F with ||z|| < ||y|| and z_i in P_i(y) for every player, from
// an LP over linearized preferences and polyhedral norm cuts.
std::optional<Vector> improving_point(const GameInstance &game, const HalfspaceSystem &F, const Vector &y,
                                      const Tolerances &tol, std::uint64_t seed) {
  const int n = game.dim();
  const double ny = y.norm();
  lp::LinearProgram program(n + 1);
  program.objective[n] = 1.0;
  auto add = [&](const Eigen::RowVectorXd &a_z, double a_sigma, double rhs) {
    Eigen::RowVectorXd row(n + 1);
    row.head(n) = a_z;
    row[n] = a_sigma;
    program.add_le(row, rhs);
  };
  for (int r = 0; r < F.rows(); ++r) add(F.A.row(r), 0.0, F.b[r]);
  for (int r = 0; r < F.eq_rows(); ++r) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n + 1);
    row.head(n) = F.A_eq.row(r);
    program.add_eq(row, F.b_eq[r]);
  }
  add(Eigen::RowVectorXd::Zero(n), 1.0, 1.0);

  for (int i = 0; i < game.num_players(); ++i) {
    const PreferenceMap &pref = game.player(i).preference;
    const Block &b = game.block(i);
    if (pref.is_utility()) {
      const LocalQuadratic u = local_utility(pref, y);
      const Vector grad = u.H * game.part(y, i) + u.g;
      const double gn = grad.norm();
      if (gn == 0.0) return std::nullopt; // y_i maximizes a concave u_i: P_i(y) is empty
      Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n);
      a.segment(b.offset, b.size) = -grad.transpose() / gn;
      add(a, 1.0, -grad.dot(game.part(y, i)) / gn);
    } else if (const auto *pp = std::get_if<PolyhedralPreference>(&pref.variant)) {
      const HalfspaceSystem rows = pp->rows.at(y);
      for (int r = 0; r < rows.rows(); ++r) {
        Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(n);
        a.segment(b.offset, b.size) = rows.A.row(r);
        add(a, rows.strict[r] ? rows.A.row(r).norm() : 0.0, rows.b[r]);
      }
    } else {
      throw Error(ErrorCode::Unsupported, "coercivity search supports utility and polyhedral preferences only");
    }
  }

  // The radial cut carries the margin as well: the norm has to decrease to
  // first order along z - y.
  std::mt19937_64 rng(seed);
  const auto dirs = cut_directions(y, rng);
  add(dirs.front().transpose(), 1.0, ny);
  for (std::size_t k = 1; k < dirs.size(); ++k) add(dirs[k].transpose(), 0.0, ny);

  for (int round = 0; round < kCutRounds; ++round) {
    const auto res = lp::solve(program);
    if (!res.optimal() || res.x[n] <= 1e-12) return std::nullopt;
    const Vector z = res.x.head(n);
    // The LP only sees linearizations; move toward y until the exact test passes.
    double t = 1.0;
    for (int k = 0; k < kBacktracks; ++k, t *= 0.5) {
      const Vector zt = y + t * (z - y);
      if (zt.norm() < ny && all_prefer(game, y, zt, tol)) return zt;
    }
    const double nz = z.norm();
    if (nz < ny) return std::nullopt;
    add(z.transpose() / nz, 0.0, ny * (1.0 - 1e-9));
  }
  return std::nullopt;
}

CoercivityReport sample_and_search(const GameInstance &game, const ConvexBody &F, double rho, int samples,
                                   std::uint64_t seed, double box_radius, const Tolerances &tol) {
  CoercivityReport report;
  report.seed = seed;
  const int n = F.dim();
  const auto bb = F.bounding_box();
  if (bb && box_sup_norm(bb->first, bb->second) <= rho) return report; // vacuous with certainty

  // Sampling box: the body's coordinate bounds where they exist, a box of
  // half-width box_radius beyond the finite bound elsewhere.
  Vector lo(n), hi(n);
  for (int k = 0; k < n; ++k) {
    const auto up = F.maximize(Vector::Unit(n, k));
    const auto down = F.maximize(-Vector::Unit(n, k));
    lo[k] = down ? (*down)[k] : (up ? (*up)[k] - 2.0 * box_radius : -box_radius);
    hi[k] = up ? (*up)[k] : lo[k] + 2.0 * box_radius;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> far;
  const int max_draws = 50 * std::max(1, samples);
  for (int draw = 0; draw < max_draws && static_cast<int>(far.size()) < samples; ++draw) {
    Vector v(n);
    for (int k = 0; k < n; ++k) v[k] = lo[k] + unit(rng) * (hi[k] - lo[k]);
    const Vector y = project(F, v);
    if (y.norm() > rho) far.push_back(y);
  }
  report.samples_outside = static_cast<int>(far.size());
  if (far.empty()) return report;

  const HalfspaceSystem system = F.halfspaces().closure();
  std::vector<std::optional<Vector>> found(far.size());
  parallel_for(far.size(), [&](std::size_t s) {
    found[s] = improving_point(game, system, far[s], tol, seed + 7919 * (s + 1));
  });
  report.status = CoercivityReport::Status::HoldsOnSamples;
  for (std::size_t s = 0; s < far.size(); ++s) {
    if (!found[s]) {
      report.status = CoercivityReport::Status::Violated;
      report.witness = far[s];
      report.improvements.clear();
      break;
    }
    report.improvements.emplace_back(far[s], *found[s]);
  }
  return report;
}

} // namespace

CoercivityReport check_coercivity_jointly_convex(const GameInstance &game, double rho, double rho_prime, int samples,
                                                 std::uint64_t seed, const Tolerances &tol) {
  if (!game.jointly_convex()) throw Error(ErrorCode::NotJointlyConvex, "coercivity check needs a jointly convex game");
  if (!(rho > 0.0) || !(rho_prime > rho)) throw Error(ErrorCode::InvalidArgument, "need rho' > rho > 0");
  const ConvexBody F = game.vi_feasible_set();
  CoercivityReport report = sample_and_search(game, F, rho, samples, seed, std::max(10.0, 4.0 * rho_prime), tol);
  const Vector z0 = project(F, Vector::Zero(F.dim()));
  report.ball_point = z0;
  report.ball_meets_feasible = z0.norm() <= rho_prime;
  return report;
}

CoercivityReport check_Cx(const GameInstance &game, const Vector &x, double rho_x, int samples, std::uint64_t seed,
                          const Tolerances &tol) {
  if (!(rho_x > 0.0)) throw Error(ErrorCode::InvalidArgument, "need rho_x > 0");
  std::vector<ConvexBody> factors;
  for (int i = 0; i < game.num_players(); ++i) {
    ConvexBody K = constraint_set(game, i, x);
    if (!K.is_polyhedral()) throw Error(ErrorCode::Unsupported, "criterion check needs polyhedral constraint sets");
    factors.push_back(std::move(K));
  }
  const ConvexBody F = ConvexBody::product(factors);
  if (F.is_empty()) throw Error(ErrorCode::EmptyConstraint, "K(x) is empty");
  return sample_and_search(game, F, rho_x, samples, seed, std::max(10.0, 4.0 * rho_x), tol);
}

} // namespace gnep
