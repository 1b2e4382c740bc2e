#include "gnep/economy.hpp"

#include "gnep/error.hpp"
#include "gnep/lp.hpp"

#include <cmath>
#include <memory>

namespace gnep {

void EconomyInstance::validate() const {
  if (I <= 0 || J < 0 || L <= 0 || S <= 0) throw Error(ErrorCode::InvalidArgument, "economy needs I, L, S >= 1 and J >= 0");
  if (static_cast<int>(consumers.size()) != I || static_cast<int>(producers.size()) != J)
    throw Error(ErrorCode::DimensionMismatch, "consumer/producer counts differ from I/J");
  const int h = H();
  for (int i = 0; i < I; ++i) {
    const auto &c = consumers[i];
    if (c.A.dim() != h || c.e.size() != h) throw Error(ErrorCode::DimensionMismatch, "consumer " + std::to_string(i) + " dimension");
    if (c.theta.size() != J) throw Error(ErrorCode::DimensionMismatch, "consumer " + std::to_string(i) + " share count");
    if ((c.e.array() < 0.0).any()) throw Error(ErrorCode::InvalidArgument, "endowments must be nonnegative");
    if ((c.theta.array() < 0.0).any() || (c.theta.array() > 1.0).any())
      throw Error(ErrorCode::InvalidShares, "shares must lie in [0, 1]");
  }
  for (int j = 0; j < J; ++j) {
    double total = 0.0;
    for (const auto &c : consumers) total += c.theta[j];
    if (std::abs(total - 1.0) > 1e-12)
      throw Error(ErrorCode::InvalidShares, "shares of producer " + std::to_string(j) + " sum to " + std::to_string(total));
    if (producers[j].B.dim() != h) throw Error(ErrorCode::DimensionMismatch, "producer " + std::to_string(j) + " dimension");
    if (!producers[j].B.contains(Vector::Zero(h), 1e-12))
      throw Error(ErrorCode::MissingZeroProduction, "production set " + std::to_string(j) + " does not contain 0");
  }
}

Vector pack(const EconomyInstance &econ, const Allocation &alloc) {
  const int h = econ.H();
  Vector x(econ.joint_dim());
  int off = 0;
  for (int i = 0; i < econ.I; ++i, off += h) x.segment(off, h) = alloc.a.at(i);
  for (int j = 0; j < econ.J; ++j, off += h) x.segment(off, h) = alloc.b.at(j);
  x.segment(off, h) = alloc.p;
  return x;
}

Allocation unpack(const EconomyInstance &econ, const Vector &x) {
  if (x.size() != econ.joint_dim()) throw Error(ErrorCode::DimensionMismatch, "economy point dimension");
  const int h = econ.H();
  Allocation alloc;
  int off = 0;
  for (int i = 0; i < econ.I; ++i, off += h) alloc.a.push_back(x.segment(off, h));
  for (int j = 0; j < econ.J; ++j, off += h) alloc.b.push_back(x.segment(off, h));
  alloc.p = x.segment(off, h);
  return alloc;
}

namespace {

double income(const EconomyInstance &econ, int i, const Vector &p, const std::vector<Vector> &b) {
  double profit = 0.0;
  for (int j = 0; j < econ.J; ++j) profit += econ.consumers[i].theta[j] * p.dot(b[j]);
  return p.dot(econ.consumers[i].e) + std::max(0.0, profit);
}

HalfspaceSystem budget_row(const EconomyInstance &econ, int i, const Vector &p, const std::vector<Vector> &b) {
  HalfspaceSystem s = HalfspaceSystem::in_dim(econ.H());
  s.add_row(p.transpose(), income(econ, i, p, b));
  return s;
}

} // namespace

ConvexBody budget_set(const EconomyInstance &econ, int i, const Vector &p, const std::vector<Vector> &b) {
  const ConvexBody &A = econ.consumers.at(i).A;
  HalfspaceSystem s = budget_row(econ, i, p, b);
  if (!A.is_polyhedral()) return ConvexBody::intersection({ConvexBody::hpoly(s), A});
  s.append(A.halfspaces());
  return ConvexBody::hpoly(std::move(s));
}

GameInstance to_gnep(const EconomyInstance &econ) {
  econ.validate();
  const int h = econ.H();
  const int n = econ.joint_dim();
  const int p_off = (econ.I + econ.J) * h;
  const Matrix Id = Matrix::Identity(h, h);
  std::vector<PlayerSpec> players;
  const auto shared = std::make_shared<const EconomyInstance>(econ);

  for (int i = 0; i < econ.I; ++i) {
    PlayerSpec spec;
    spec.choice_set = econ.consumers[i].A;
    spec.preference = econ.consumers[i].preference;
    spec.name = "consumer_" + std::to_string(i);
    CallbackConstraint budget;
    budget.name = "budget_" + std::to_string(i);
    // The profit clamp is resolved at each evaluation point.
    budget.rows = [shared, i](const Vector &x) {
      const Allocation alloc = unpack(*shared, x);
      return budget_row(*shared, i, alloc.p, alloc.b);
    };
    spec.constraint = budget;
    players.push_back(std::move(spec));
  }
  for (int j = 0; j < econ.J; ++j) {
    // Profit <p, b_j> as a bilinear utility: cross blocks (b_j, p) = I.
    ConcaveQuadUtility profit{Matrix::Zero(n, n), Vector::Zero(n)};
    const int off = (econ.I + j) * h;
    profit.Q.block(off, p_off, h, h) = Id;
    profit.Q.block(p_off, off, h, h) = Id;
    PlayerSpec spec;
    spec.choice_set = econ.producers[j].B;
    spec.preference = profit;
    spec.constraint = FixedConstraint{econ.producers[j].B};
    spec.name = "producer_" + std::to_string(j);
    players.push_back(std::move(spec));
  }
  {
    // Value of excess demand <p, sum(a_i - e_i) - sum b_j>.
    ConcaveQuadUtility value{Matrix::Zero(n, n), Vector::Zero(n)};
    for (int i = 0; i < econ.I; ++i) {
      value.Q.block(p_off, i * h, h, h) = Id;
      value.Q.block(i * h, p_off, h, h) = Id;
      value.c.segment(p_off, h) -= econ.consumers[i].e;
    }
    for (int j = 0; j < econ.J; ++j) {
      const int off = (econ.I + j) * h;
      value.Q.block(p_off, off, h, h) = -Id;
      value.Q.block(off, p_off, h, h) = -Id;
    }
    PlayerSpec spec;
    spec.choice_set = ConvexBody::simplex(h);
    spec.preference = value;
    spec.constraint = FixedConstraint{ConvexBody::simplex(h)};
    spec.name = "price_player";
    players.push_back(std::move(spec));
  }
  return GameInstance(std::move(players));
}

EconomyHypotheses check_hypotheses(const EconomyInstance &econ) {
  EconomyHypotheses hyp;
  const int h = econ.H();
  const GameInstance game = to_gnep(econ);
  for (int i = 0; i < econ.I; ++i) {
    const auto &c = econ.consumers[i];
    // max delta s.t. xhat in A_i, xhat + delta <= e_i, delta <= 1.
    if (c.A.is_polyhedral()) {
      const HalfspaceSystem A = c.A.halfspaces().closure();
      lp::LinearProgram program(h + 1);
      program.objective[h] = 1.0;
      for (int r = 0; r < A.rows(); ++r) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(h + 1);
        row.head(h) = A.A.row(r);
        program.add_le(row, A.b[r]);
      }
      for (int r = 0; r < A.eq_rows(); ++r) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(h + 1);
        row.head(h) = A.A_eq.row(r);
        program.add_eq(row, A.b_eq[r]);
      }
      for (int k = 0; k < h; ++k) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(h + 1);
        row[k] = 1.0;
        row[h] = 1.0;
        program.add_le(row, c.e[k]);
      }
      Eigen::RowVectorXd cap = Eigen::RowVectorXd::Zero(h + 1);
      cap[h] = 1.0;
      program.add_le(cap, 1.0);
      const auto res = lp::solve(program);
      hyp.interior_endowment.push_back(res.optimal() && res.x[h] > 0.0);
    } else {
      hyp.interior_endowment.push_back(false);
    }

    // Local non-satiation at the endowment bundle.
    const Vector a0 = project(c.A, c.e);
    Allocation alloc;
    for (int k = 0; k < econ.I; ++k) alloc.a.push_back(k == i ? a0 : project(econ.consumers[k].A, econ.consumers[k].e));
    for (int j = 0; j < econ.J; ++j) alloc.b.push_back(Vector::Zero(h));
    alloc.p = Vector::Constant(h, 1.0 / h);
    const Vector x = pack(econ, alloc);
    const PreferenceMap &pref = game.player(i).preference;
    bool improvable = false;
    if (pref.is_utility()) {
      const double delta = 1e-4;
      const ConvexBody box = ConvexBody::box((a0.array() - delta).matrix(), (a0.array() + delta).matrix());
      HalfspaceSystem s = box.halfspaces();
      if (c.A.is_polyhedral()) s.append(c.A.halfspaces());
      const LocalQuadratic u = local_utility(pref, x);
      const auto best = maximize_utility(u, ConvexBody::hpoly(s));
      improvable = best && best->value > u.value(a0) + 1e-14 * std::max(1.0, std::abs(u.value(a0)));
    } else {
      const PrefRegion region = pref_set(pref, x);
      improvable = !region.empty();
    }
    hyp.locally_nonsatiated.push_back(improvable);
  }
  return hyp;
}

Vector check_market_clearing(const CompetitiveOutcome &outcome, const EconomyInstance &econ) {
  Vector excess = Vector::Zero(econ.H());
  for (int i = 0; i < econ.I; ++i) excess += outcome.allocation.a[i] - econ.consumers[i].e;
  for (int j = 0; j < econ.J; ++j) excess -= outcome.allocation.b[j];
  return excess.cwiseMax(0.0);
}

double check_walras(const CompetitiveOutcome &outcome, const EconomyInstance &econ) {
  Vector excess = Vector::Zero(econ.H());
  for (int i = 0; i < econ.I; ++i) excess += outcome.allocation.a[i] - econ.consumers[i].e;
  for (int j = 0; j < econ.J; ++j) excess -= outcome.allocation.b[j];
  return std::abs(outcome.allocation.p.dot(excess));
}

CompetitiveOutcome diagnose(const EconomyInstance &econ, const Allocation &alloc, const EconomyTolerances &tol) {
  const GameInstance game = to_gnep(econ);
  const Vector x = pack(econ, alloc);
  CompetitiveOutcome out;
  out.allocation = alloc;
  out.hypotheses = check_hypotheses(econ);
  const EquilibriumCertificate cert = verify_equilibrium(game, x, tol.game);
  for (double s : cert.feasibility_slacks) out.max_feasibility_violation = std::max(out.max_feasibility_violation, s);
  for (int i = 0; i < econ.I; ++i) out.consumer_emptiness_slacks.push_back(cert.emptiness_slacks[i]);
  for (int j = 0; j < econ.J; ++j) out.producer_profit_gaps.push_back(cert.emptiness_slacks[econ.I + j]);
  out.fictitious_gap = cert.emptiness_slacks[econ.I + econ.J];
  out.clearing_violations = check_market_clearing(out, econ);
  out.walras_gap = check_walras(out, econ);

  bool ok = out.max_feasibility_violation <= tol.game.feasibility;
  for (double s : out.consumer_emptiness_slacks) ok = ok && s <= tol.game.open_margin;
  for (double g : out.producer_profit_gaps) ok = ok && g <= tol.profit;
  ok = ok && out.fictitious_gap <= tol.profit;
  ok = ok && (out.clearing_violations.size() == 0 || out.clearing_violations.maxCoeff() <= tol.clearing);
  ok = ok && out.walras_gap <= tol.walras;
  out.equilibrium = ok;
  return out;
}

CompetitiveOutcome solve_competitive(const EconomyInstance &econ, const SolverConfig &config,
                                     const EconomyTolerances &tol) {
  econ.validate();
  const int h = econ.H();
  for (int i = 0; i < econ.I; ++i)
    if (!econ.consumers[i].A.bounding_box())
      throw Error(ErrorCode::PreconditionViolated, "consumption set " + std::to_string(i) + " is not compact");
  for (int j = 0; j < econ.J; ++j)
    if (!econ.producers[j].B.bounding_box())
      throw Error(ErrorCode::PreconditionViolated, "production set " + std::to_string(j) + " is not compact");
  const EconomyHypotheses hyp = check_hypotheses(econ);
  for (int i = 0; i < econ.I; ++i)
    if (!hyp.locally_nonsatiated[i])
      throw Error(ErrorCode::PreconditionViolated,
                  "consumer " + std::to_string(i) + " is satiated at the endowment: a_i is not in the closure of its preference set");

  const GameInstance game = to_gnep(econ);
  SolverConfig cfg = config;
  if (!cfg.start) {
    Allocation start;
    for (const auto &c : econ.consumers) start.a.push_back(project(c.A, c.e));
    for (int j = 0; j < econ.J; ++j) start.b.push_back(Vector::Zero(h));
    start.p = Vector::Constant(h, 1.0 / h);
    cfg.start = pack(econ, start);
  }
  cfg.tol = tol.game;
  SolveResult res = solve_qvi(game, cfg);
  CompetitiveOutcome out = diagnose(econ, unpack(econ, res.point), tol);
  out.solve = std::move(res);
  return out;
}

} // namespace gnep
