#pragma once

#include "gnep/game.hpp"
#include "gnep/solvers.hpp"

#include <optional>
#include <vector>

namespace gnep {

/// Two-period exchange/production economy over H = L * S state-contingent
/// commodities. Commodity l in state s has index s * L + l.
struct EconomyInstance {
  struct Consumer {
    ConvexBody A = ConvexBody::box(Vector::Zero(1), Vector::Zero(1));
    Vector e;
    Vector theta;
    /// Preference over the consumer's own bundle (utility data of length H).
    PreferenceVariant preference = LinearUtility{};
  };
  struct Producer {
    ConvexBody B = ConvexBody::box(Vector::Zero(1), Vector::Zero(1));
  };

  int I = 0, J = 0, L = 0, S = 0;
  std::vector<Consumer> consumers;
  std::vector<Producer> producers;

  [[nodiscard]] int H() const { return L * S; }
  [[nodiscard]] int index(int l, int s) const { return s * L + l; }
  [[nodiscard]] int joint_dim() const { return (I + J + 1) * H(); }

  /// Dimensions, share sums (InvalidShares) and 0 in every B_j
  /// (MissingZeroProduction).
  void validate() const;
};

struct Allocation {
  std::vector<Vector> a;
  std::vector<Vector> b;
  Vector p;
};

Vector pack(const EconomyInstance &econ, const Allocation &alloc);
Allocation unpack(const EconomyInstance &econ, const Vector &x);

/// A_i cap { a : <p, a> <= <p, e_i> + max(0, sum_j theta_ij <p, b_j>) }.
ConvexBody budget_set(const EconomyInstance &econ, int i, const Vector &p, const std::vector<Vector> &b);

/// The (I + J + 1)-player game: consumers, producers, one price player.
/// Block order (a_1..a_I, b_1..b_J, p).
GameInstance to_gnep(const EconomyInstance &econ);

struct EconomyHypotheses {
  /// Some point of A_i lies strictly below e_i in every coordinate.
  std::vector<bool> interior_endowment;
  /// The consumer can improve within distance 1e-4 of the endowment bundle.
  std::vector<bool> locally_nonsatiated;
};

EconomyHypotheses check_hypotheses(const EconomyInstance &econ);

struct CompetitiveOutcome {
  Allocation allocation;
  double walras_gap = 0.0;
  Vector clearing_violations;
  std::vector<double> producer_profit_gaps;
  std::vector<double> consumer_emptiness_slacks;
  double fictitious_gap = 0.0;
  double max_feasibility_violation = 0.0;
  EconomyHypotheses hypotheses;
  bool equilibrium = false;
  /// Present when produced by the solver.
  std::optional<SolveResult> solve;
};

struct EconomyTolerances {
  double clearing = 1e-8;
  double walras = 1e-6;
  double profit = 1e-7;
  Tolerances game;
};

/// max(0, sum a - sum b - sum e) per commodity.
Vector check_market_clearing(const CompetitiveOutcome &outcome, const EconomyInstance &econ);
/// |<p, sum (a - e) - sum b>|.
double check_walras(const CompetitiveOutcome &outcome, const EconomyInstance &econ);

/// All diagnostics for a given allocation and price vector.
CompetitiveOutcome diagnose(const EconomyInstance &econ, const Allocation &alloc, const EconomyTolerances &tol = {});

/// Runs the QVI solver on to_gnep(econ) from (e, 0, uniform prices) and
/// diagnoses the result. Requires compact A_i, B_j and a locally nonsatiated
/// endowment bundle (PreconditionViolated otherwise).
CompetitiveOutcome solve_competitive(const EconomyInstance &econ, const SolverConfig &config = {},
                                     const EconomyTolerances &tol = {});

} // namespace gnep
