#pragma once

#include "gnep/game.hpp"
#include "gnep/normal_operator.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gnep {

enum class Method { Projection, Extragradient };
std::string to_string(Method m);
Method parse_method(const std::string &name);

struct SolverConfig {
  Method method = Method::Projection;
  double alpha = 0.5;
  SelectionRule selection = SelectionRule::MinNormHull;
  int max_iters = 5000;
  double residual_tol = 1e-6;
  double h = 0.05;
  std::uint64_t seed = 0;
  int restarts = 8;
  bool trace = false;
  std::optional<Vector> start;
  Tolerances tol;

  /// Throws InvalidArgument unless alpha in (0, 10], h > 0, residual_tol > 0.
  void validate() const;
};

struct TraceRow {
  int iter = 0;
  double residual = 0.0;
  Vector point;
};

struct SolveResult {
  Vector point;
  double vi_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// 0 for the first run, k for the k-th seeded restart.
  int restart = 0;
  std::vector<TraceRow> trace;
  EquilibriumCertificate certificate;
};

/// (min over t in T(x) of max over z in K of <t, x - z>)_+, where T(x) is the
/// product of generator hulls in `eval` and K is a polyhedral body. Uses one
/// LP over hull weights and the dual of the inner maximization. Non-polyhedral
/// K is replaced by 64 support points.
double vi_residual(const OperatorEval &eval, const Vector &x, const ConvexBody &K);

/// Projection (or extragradient) iteration for VI(T, shared set).
SolveResult solve_vi(const GameInstance &game, const SolverConfig &config = {});

/// Fixed-point iteration x <- proj_{K(x)}(x - alpha t(x)) for QVI(T, K).
SolveResult solve_qvi(const GameInstance &game, const SolverConfig &config = {});

struct OracleNode {
  std::vector<long> index;
  Vector point;
  EquilibriumCertificate certificate;
};

/// Every node lo + k h of the choice sets' bounding grid with x in K(x) that
/// verify_equilibrium certifies, ordered lexicographically by index.
std::vector<OracleNode> grid_oracle(const GameInstance &game, double h, const Tolerances &tol = {});

/// Grid size for spacing h, for callers that want to check before running.
double grid_node_count(const GameInstance &game, double h);

} // namespace gnep
