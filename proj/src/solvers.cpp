#include "gnep/solvers.hpp"

#include "gnep/error.hpp"
#include "gnep/lp.hpp"
#include "gnep/parallel.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace gnep {

std::string to_string(Method m) { return m == Method::Projection ? "projection" : "extragradient"; }

Method parse_method(const std::string &name) {
  if (name == "projection") return Method::Projection;
  if (name == "extragradient") return Method::Extragradient;
  throw Error(ErrorCode::InvalidArgument, "unknown method '" + name + "'");
}

void SolverConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 10.0)) throw Error(ErrorCode::InvalidArgument, "step alpha must lie in (0, 10]");
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing h must be positive");
  if (!(residual_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "residual tolerance must be positive");
  if (max_iters <= 0) throw Error(ErrorCode::InvalidArgument, "max_iters must be positive");
  if (restarts < 0) throw Error(ErrorCode::InvalidArgument, "restarts must be nonnegative");
}

// ---------------------------------------------------------------------------
// Residual

namespace {

constexpr int kSupportPoints = 64;

// Columns spanning each block's candidate set for t: the generators, a
// cross-polytope of the tangent space for whole-space blocks (a subset of the
// unit ball), or the zero vector.
std::vector<Matrix> block_columns(const OperatorEval &eval) {
  std::vector<Matrix> cols;
  for (std::size_t i = 0; i < eval.blocks.size(); ++i) {
    const ConeSection &c = eval.blocks[i];
    const int ni = eval.layout[i].size;
    if (c.whole_space) {
      const Matrix &B = eval.tangent[i];
      if (B.cols() == 0) {
        cols.emplace_back(Matrix::Zero(ni, 1));
        continue;
      }
      Matrix M(ni, 2 * B.cols());
      M << B, -B;
      cols.push_back(M);
    } else if (c.generators.empty()) {
      cols.emplace_back(Matrix::Zero(ni, 1));
    } else {
      Matrix M(ni, static_cast<int>(c.generators.size()));
      for (std::size_t j = 0; j < c.generators.size(); ++j) M.col(static_cast<int>(j)) = c.generators[j];
      cols.push_back(M);
    }
  }
  return cols;
}

std::vector<Vector> support_points(const ConvexBody &K, const Vector &x) {
  const int n = K.dim();
  std::vector<Vector> pts{project(K, x)};
  std::mt19937_64 rng(0x51ULL);
  std::normal_distribution<double> gauss;
  const auto bb = K.bounding_box();
  const double reach = bb ? 10.0 * (1.0 + (bb->second - bb->first).norm()) : 1e3;
  for (int k = 0; k < kSupportPoints; ++k) {
    Vector d(n);
    if (n == 1) d[0] = k % 2 == 0 ? 1.0 : -1.0;
    else
      for (int j = 0; j < n; ++j) d[j] = gauss(rng);
    d.normalize();
    pts.push_back(project(K, x + reach * d));
  }
  return pts;
}

} // namespace

double vi_residual(const OperatorEval &eval, const Vector &x, const ConvexBody &K) {
  if (x.size() != eval.dim || K.dim() != eval.dim) throw Error(ErrorCode::DimensionMismatch, "residual dimensions");
  const int n = eval.dim;
  const auto cols = block_columns(eval);
  int nw = 0;
  for (const auto &c : cols) nw += static_cast<int>(c.cols());
  Matrix G = Matrix::Zero(n, nw);
  {
    int offset = 0;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      G.block(eval.layout[i].offset, offset, eval.layout[i].size, cols[i].cols()) = cols[i];
      offset += static_cast<int>(cols[i].cols());
    }
  }
  const Vector gx = G.transpose() * x; // t(w).x = gx.w

  auto add_simplex_rows = [&](lp::LinearProgram &program) {
    int offset = 0;
    for (const auto &c : cols) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(program.num_vars());
      row.segment(offset, c.cols()).setOnes();
      program.add_eq(row, 1.0);
      offset += static_cast<int>(c.cols());
    }
    for (int j = 0; j < nw; ++j) program.set_nonnegative(j);
  };

  if (K.is_polyhedral()) {
    // min_w max_z <t(w), x - z>  =  min  gx.w + b.lam + f.mu
    //   s.t.  G w + A' lam + E' mu = 0,  lam >= 0,  w in product of simplices.
    const HalfspaceSystem S = K.halfspaces().closure();
    const int m = S.rows(), me = S.eq_rows();
    lp::LinearProgram program(nw + m + me);
    program.objective.head(nw) = -gx;
    program.objective.segment(nw, m) = -S.b;
    program.objective.tail(me) = -S.b_eq;
    add_simplex_rows(program);
    for (int j = 0; j < m; ++j) program.set_nonnegative(nw + j);
    Matrix stationarity(n, nw + m + me);
    stationarity << G, S.A.transpose(), S.A_eq.transpose();
    for (int r = 0; r < n; ++r) program.add_eq(stationarity.row(r), 0.0);
    const auto res = lp::solve(program);
    if (res.status == lp::Status::Infeasible) return std::numeric_limits<double>::infinity();
    if (res.status == lp::Status::Unbounded) throw Error(ErrorCode::EmptyConstraint, "residual over an empty set");
    return std::max(0.0, -res.value);
  }

  // Support-point surrogate: min s  s.t.  s >= t(w).(x - z_k) for sampled z_k.
  const auto pts = support_points(K, x);
  lp::LinearProgram program(nw + 1);
  program.objective[nw] = -1.0;
  add_simplex_rows(program);
  for (const auto &z : pts) {
    Eigen::RowVectorXd row(nw + 1);
    row.head(nw) = (G.transpose() * (x - z)).transpose();
    row[nw] = -1.0;
    program.add_le(row, 0.0);
  }
  const auto res = lp::solve(program);
  if (!res.optimal()) return std::numeric_limits<double>::infinity();
  return std::max(0.0, res.x[nw]);
}

// ---------------------------------------------------------------------------
// Iterative solvers

namespace {

OperatorEval restrict_block(const OperatorEval &eval, std::size_t i) {
  OperatorEval one;
  one.blocks = {eval.blocks[i]};
  one.layout = {Block{0, eval.layout[i].size}};
  one.tangent = {eval.tangent[i]};
  one.dim = eval.layout[i].size;
  one.any_whole_space = eval.blocks[i].whole_space;
  one.approximate = eval.blocks[i].approximate;
  return one;
}

// Feasible-set oracle shared by the VI and QVI iterations.
class FeasibleSets {
public:
  FeasibleSets(const GameInstance &game, bool moving) : game_(game), moving_(moving) {
    if (!moving_) fixed_ = game.vi_feasible_set();
  }

  Vector project_point(const Vector &anchor, const Vector &y, const Vector &warm) const {
    if (!moving_) return project(*fixed_, y, warm);
    Vector out(y.size());
    for (int i = 0; i < game_.num_players(); ++i) {
      const ConvexBody K = block_set(anchor, i);
      out.segment(game_.block(i).offset, game_.block(i).size) = project(K, game_.part(y, i), game_.part(warm, i));
    }
    return out;
  }

  double residual(const OperatorEval &eval, const Vector &x) const {
    if (!moving_) return vi_residual(eval, x, *fixed_);
    // K(x) is a product, so the min-max splits into a sum over blocks.
    double total = 0.0;
    for (int i = 0; i < game_.num_players(); ++i)
      total += vi_residual(restrict_block(eval, static_cast<std::size_t>(i)), game_.part(x, i), block_set(x, i));
    return total;
  }

  double infeasibility(const Vector &x) const {
    if (!moving_) return fixed_->halfspaces().max_violation(x);
    double worst = 0.0;
    for (int i = 0; i < game_.num_players(); ++i) {
      const ConvexBody K = block_set(x, i);
      const Vector xi = game_.part(x, i);
      worst = std::max(worst, K.is_polyhedral() ? K.halfspaces().max_violation(xi) : (xi - project(K, xi)).norm());
    }
    return worst;
  }

private:
  ConvexBody block_set(const Vector &x, int i) const {
    ConvexBody K = constraint_set(game_, i, x);
    if (K.is_empty()) {
      std::string where;
      for (int k = 0; k < x.size(); ++k) where += (k ? ", " : "") + std::to_string(x[k]);
      throw Error(ErrorCode::EmptyConstraint, "K_" + std::to_string(i) + "(x) is empty at x = (" + where + ")");
    }
    return K;
  }

  const GameInstance &game_;
  bool moving_;
  std::optional<ConvexBody> fixed_;
};

constexpr int kStagnationWindow = 50;
constexpr int kPolishIters = 500;
constexpr double kMinStep = 1e-9;

struct RunOutcome {
  SolveResult result;
  double best_residual = std::numeric_limits<double>::infinity();
};

RunOutcome run_once(const GameInstance &game, const SolverConfig &config, const FeasibleSets &sets, bool moving,
                    Vector x) {
  RunOutcome out;
  SolveResult &res = out.result;
  double alpha = config.alpha;
  int since_improvement = 0;
  int polish_left = kPolishIters;
  Vector best = x;
  double best_r = std::numeric_limits<double>::infinity();
  bool have_small = false;

  for (int k = 0; k <= config.max_iters; ++k) {
    const OperatorEval eval = evaluate_T(game, x, config.tol);
    const double r = sets.residual(eval, x);
    const bool feasible = !moving || sets.infeasibility(x) <= config.tol.feasibility;
    if (config.trace) res.trace.push_back({k, r, x});
    res.iterations = k;

    const Vector t = select(eval, config.selection);
    Vector y = sets.project_point(x, x - alpha * t, x);
    if (config.method == Method::Extragradient) {
      const OperatorEval mid = evaluate_T(game, y, config.tol);
      y = sets.project_point(x, x - alpha * select(mid, config.selection), x);
    }
    const double step = (y - x).norm();

    const bool small = feasible && r <= config.residual_tol && (!moving || step <= config.residual_tol);
    if (small) {
      // Keep iterating below the residual tolerance until the certificate
      // passes: the utility gap is only bounded by |grad u| times the residual.
      if (verify_equilibrium(game, x, config.tol, config.seed).equilibrium) {
        best = x;
        best_r = r;
        break;
      }
      if (!have_small || r < best_r) {
        best = x;
        best_r = r;
      }
      have_small = true;
      if (--polish_left <= 0) break;
    } else if (!have_small && feasible && r < best_r - 1e-15) {
      best = x;
      best_r = r;
      since_improvement = 0;
    }
    if (++since_improvement >= kStagnationWindow) {
      alpha = std::max(kMinStep, 0.5 * alpha);
      since_improvement = 0;
    }
    x = y;
  }
  res.point = best;
  res.vi_residual = best_r;
  res.converged = best_r <= config.residual_tol;
  out.best_residual = best_r;
  return out;
}

Vector random_start(const GameInstance &game, std::mt19937_64 &rng) {
  const ConvexBody X = game.choice_product();
  const auto bb = X.bounding_box();
  const int n = game.dim();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector v(n);
  for (int k = 0; k < n; ++k) {
    const double lo = bb ? bb->first[k] : -1.0;
    const double hi = bb ? bb->second[k] : 1.0;
    v[k] = lo + unit(rng) * (hi - lo);
  }
  return project(X, v);
}

// Projection onto { x : x in K(x) } when the constraint maps are shared slices
// and fixed bodies; onto the choice sets otherwise or if that set is empty.
Vector qvi_start(const GameInstance &game, const Vector &v) {
  const Vector fallback = project(game.choice_product(), v);
  if (!game.shared_set() || !game.shared_set()->is_polyhedral()) return fallback;
  std::vector<ConvexBody> factors;
  for (const auto &p : game.players()) {
    if (const auto *f = std::get_if<FixedConstraint>(&p.constraint)) {
      if (!f->body.is_polyhedral()) return fallback;
      factors.push_back(ConvexBody::intersection({p.choice_set, f->body}));
    } else if (std::holds_alternative<SharedSlice>(p.constraint)) {
      factors.push_back(p.choice_set);
    } else {
      return fallback;
    }
  }
  const ConvexBody joint = ConvexBody::intersection({*game.shared_set(), ConvexBody::product(factors)});
  if (joint.is_empty()) return fallback;
  return project(joint, v);
}

SolveResult solve_common(const GameInstance &game, const SolverConfig &config, bool moving) {
  config.validate();
  const FeasibleSets sets(game, moving);
  Vector start = config.start ? *config.start : Vector::Zero(game.dim());
  if (start.size() != game.dim()) throw Error(ErrorCode::DimensionMismatch, "start point dimension");
  start = moving ? qvi_start(game, start) : project(game.vi_feasible_set(), start);

  RunOutcome best = run_once(game, config, sets, moving, start);
  std::mt19937_64 rng(config.seed);
  for (int r = 1; r <= config.restarts && !best.result.converged; ++r) {
    Vector s = random_start(game, rng);
    s = moving ? qvi_start(game, s) : project(game.vi_feasible_set(), s);
    RunOutcome next = run_once(game, config, sets, moving, s);
    next.result.restart = r;
    if (next.result.converged || next.best_residual < best.best_residual) best = std::move(next);
  }
  SolveResult result = std::move(best.result);
  result.certificate = verify_equilibrium(game, result.point, config.tol, config.seed);
  result.certificate.vi_residual = result.vi_residual;
  const OperatorEval eval = evaluate_T(game, result.point, config.tol);
  result.certificate.approximate_cones = result.certificate.approximate_cones || eval.approximate;
  return result;
}

} // namespace

SolveResult solve_vi(const GameInstance &game, const SolverConfig &config) {
  if (!game.jointly_convex()) throw Error(ErrorCode::NotJointlyConvex, "VI solver needs a jointly convex game");
  return solve_common(game, config, false);
}

SolveResult solve_qvi(const GameInstance &game, const SolverConfig &config) { return solve_common(game, config, true); }

// ---------------------------------------------------------------------------
// Grid oracle

namespace {

struct Grid {
  Vector lo;
  std::vector<long> counts;
  double total = 1.0;
};

Grid make_grid(const GameInstance &game, double h) {
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
  Grid g;
  g.lo.resize(game.dim());
  for (int i = 0; i < game.num_players(); ++i) {
    const auto bb = game.player(i).choice_set.bounding_box();
    if (!bb) throw Error(ErrorCode::PreconditionViolated, "grid oracle needs bounded choice sets");
    const Block &b = game.block(i);
    for (int k = 0; k < b.size; ++k) {
      g.lo[b.offset + k] = bb->first[k];
      const double cells = std::floor((bb->second[k] - bb->first[k]) / h + 1e-9);
      g.counts.push_back(static_cast<long>(cells) + 1);
      g.total *= cells + 1.0;
    }
  }
  return g;
}

constexpr double kMaxNodes = 1e7;

} // namespace

double grid_node_count(const GameInstance &game, double h) { return make_grid(game, h).total; }

std::vector<OracleNode> grid_oracle(const GameInstance &game, double h, const Tolerances &tol) {
  if (game.dim() > 4) throw Error(ErrorCode::PreconditionViolated, "grid oracle is limited to total dimension 4");
  const Grid grid = make_grid(game, h);
  if (grid.total > kMaxNodes)
    throw Error(ErrorCode::TooLarge, "grid has " + std::to_string(static_cast<long long>(grid.total)) + " nodes (limit 1e7)");
  const auto total = static_cast<std::size_t>(grid.total);
  const int n = game.dim();
  const ConvexBody X = game.choice_product();
  std::vector<std::optional<OracleNode>> slots(total);
  parallel_for(total, [&](std::size_t linear) {
    std::vector<long> index(n);
    std::size_t rem = linear;
    for (int k = n - 1; k >= 0; --k) {
      index[k] = static_cast<long>(rem % static_cast<std::size_t>(grid.counts[k]));
      rem /= static_cast<std::size_t>(grid.counts[k]);
    }
    Vector x(n);
    for (int k = 0; k < n; ++k) x[k] = grid.lo[k] + static_cast<double>(index[k]) * h;
    if (!X.contains(x, 1e-9)) return;
    for (int i = 0; i < game.num_players(); ++i) {
      const ConvexBody K = constraint_set(game, i, x);
      const Vector xi = game.part(x, i);
      const double slack = K.is_polyhedral() ? K.halfspaces().max_violation(xi) : (xi - project(K, xi)).norm();
      if (slack > tol.feasibility) return;
    }
    // Standing hypothesis of the operator: propagate SelfPreference.
    for (int i = 0; i < game.num_players(); ++i) (void)pref_set(game.player(i).preference, x, tol);
    EquilibriumCertificate cert = verify_equilibrium(game, x, tol);
    if (cert.equilibrium) slots[linear] = OracleNode{index, x, std::move(cert)};
  });
  std::vector<OracleNode> nodes;
  for (auto &s : slots)
    if (s) nodes.push_back(std::move(*s));
  return nodes;
}

} // namespace gnep
