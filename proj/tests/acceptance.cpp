// Acceptance run: one PASS/FAIL line per criterion. Tolerances, seeds and
// time limits are fixed here so that a failing line is reproducible.

#include "gnep/cli.hpp"
#include "gnep/economy.hpp"
#include "gnep/error.hpp"
#include "gnep/game.hpp"
#include "gnep/normal_operator.hpp"
#include "gnep/preferences.hpp"
#include "gnep/solvers.hpp"

#include "instances.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace gnep;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

// Wraps a criterion with its time limit. Exceptions count as failures.
Outcome timed(double limit_seconds, const std::function<Outcome()> &body) {
  const auto start = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception &e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double t = seconds_since(start);
  out.detail += ", " + fmt(t) + " s (limit " + fmt(limit_seconds) + " s)";
  if (t >= limit_seconds) out.pass = false;
  return out;
}

// Separation and normal cones on random polytopes.
Outcome separation_suite() {
  std::mt19937_64 rng(101);
  std::normal_distribution<double> gauss(0.0, 1.5);
  std::uniform_int_distribution<int> cuts(1, 4);
  int bad = 0, produced = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int d = 1 + trial % 4;
    const auto s = oracle::random_polytope(d, cuts(rng), rng);
    const auto verts = oracle::vertices(s.A, s.b);
    const ConvexBody body = ConvexBody::hpoly(s);
    // Guard: the anchor is a vertex or lies outside the polytope.
    Vector y(d);
    if (trial % 2 == 0) {
      y = verts[static_cast<std::size_t>(trial / 2) % verts.size()];
    } else {
      do {
        for (int k = 0; k < d; ++k) y(k) = gauss(rng);
      } while (body.contains(y, 1e-6));
    }
    const Vector g = separate(body, y);
    const auto cone = normal_cone_generators(body, y);
    bool ok = std::abs(g.norm() - 1.0) <= 1e-12 && !cone.generators.empty();
    for (const auto &v : verts) ok = ok && g.dot(v - y) <= 1e-8;
    for (const auto &n : cone.generators) {
      ok = ok && std::abs(n.norm() - 1.0) <= 1e-12;
      for (const auto &v : verts) ok = ok && n.dot(v - y) <= 1e-8;
    }
    if (ok) ++produced;
    else ++bad;
  }
  return {bad == 0, std::to_string(produced) + "/500 anchors with unit normals valid on all vertices"};
}

// Open polyhedral preference sets: the operator's normals at a boundary
// anchor separate every interior sample strictly.
Outcome strict_inequality_suite() {
  std::mt19937_64 rng(202);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int instances = 0, violations = 0, nonpositive_margins = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 1 + trial % 4;
    auto s = oracle::random_polytope(d, 3, rng);
    // Anchor on the boundary: walk from the origin along a random ray.
    Vector dir(d);
    for (int k = 0; k < d; ++k) dir(k) = gauss(rng);
    dir /= dir.norm();
    double t = INFINITY;
    for (int r = 0; r < s.rows(); ++r) {
      const double ad = s.A.row(r).dot(dir);
      if (ad > 0) t = std::min(t, s.b(r) / ad);
    }
    const Vector x = t * dir;

    AffineRows rows;
    rows.A0 = s.A;
    rows.b0 = s.b;
    rows.D = Matrix(0, 0);
    rows.strict.assign(static_cast<std::size_t>(s.rows()), true);
    PreferenceMap pref;
    pref.variant = PolyhedralPreference{rows};
    pref.ambient = ConvexBody::box(Vector::Constant(d, -2.0), Vector::Constant(d, 2.0));
    pref.block = {0, d};
    pref.joint_dim = d;

    const auto region = pref_set(pref, x);
    double margin = 0.0;
    if (!region.pieces.empty()) {
      auto sys = region.pieces.front().halfspaces();
      if (const auto mp = sys.strict_margin_point()) margin = mp->first;
    }
    if (!(margin > 0.0)) ++nonpositive_margins;

    const auto cone = normal_map(pref, x);
    if (cone.generators.empty()) ++violations;
    for (int k = 0; k < 200; ++k) {
      const Vector z = oracle::sample_inside(s, rng, 1e-6);
      for (const auto &g : cone.generators)
        if (!(g.dot(z - x) < 0.0)) ++violations;
    }
    ++instances;
  }
  return {violations == 0 && nonpositive_margins == 0,
          std::to_string(instances) + " instances x 200 samples, " + std::to_string(violations) +
              " non-strict, " + std::to_string(nonpositive_margins) + " non-positive margins"};
}

Outcome soundness_suite(bool qvi) {
  std::mt19937_64 rng(qvi ? 404 : 303);
  int converged = 0, equilibria = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto game = qvi ? family::random_mixed_constraints(rng) : family::random_jointly_convex(rng);
    SolverConfig config;
    config.seed = static_cast<std::uint64_t>(trial);
    config.tol.open_margin = 1e-6;
    const auto res = qvi ? solve_qvi(game, config) : solve_vi(game, config);
    if (!res.converged) continue;
    ++converged;
    if (verify_equilibrium(game, res.point, config.tol, config.seed).equilibrium) ++equilibria;
  }
  const int counterexamples = converged - equilibria;
  return {counterexamples == 0 && converged > 0,
          std::to_string(converged) + "/100 converged, " + std::to_string(counterexamples) + " counterexamples"};
}

// Grid-aligned games: solver output near a certified node, and the certified
// node set equal to the closed-form enumeration.
Outcome oracle_equivalence() {
  std::mt19937_64 rng(505);
  const double h = 0.02;
  int converged = 0, far = 0, set_mismatch = 0, total_nodes = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = family::random_grid_game(rng, h);
    const auto nodes = grid_oracle(g.game, h);
    total_nodes += static_cast<int>(nodes.size());

    const int n = g.players;
    const int per_axis = static_cast<int>(std::lround(1.0 / h)) + 1;
    std::vector<Vector> expected;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    while (true) {
      Vector x(n);
      for (int k = 0; k < n; ++k) x(k) = idx[static_cast<std::size_t>(k)] * h;
      if (family::grid_game_equilibrium(g, x, 1e-7, 1e-8)) expected.push_back(x);
      int k = n - 1;
      while (k >= 0 && idx[static_cast<std::size_t>(k)] == per_axis - 1) idx[static_cast<std::size_t>(k--)] = 0;
      if (k < 0) break;
      ++idx[static_cast<std::size_t>(k)];
    }
    bool same = nodes.size() == expected.size();
    for (std::size_t k = 0; same && k < nodes.size(); ++k)
      same = (nodes[k].point - expected[k]).lpNorm<Eigen::Infinity>() <= 1e-12 && nodes[k].certificate.equilibrium;
    if (!same) ++set_mismatch;

    SolverConfig config;
    config.seed = static_cast<std::uint64_t>(trial);
    const auto res = solve_vi(g.game, config);
    if (!res.converged) continue;
    ++converged;
    double best = INFINITY;
    for (const auto &node : nodes) best = std::min(best, (node.point - res.point).lpNorm<Eigen::Infinity>());
    if (best > h + 1e-9) ++far;
  }
  return {far == 0 && set_mismatch == 0 && converged > 0,
          std::to_string(converged) + "/20 converged, " + std::to_string(far) + " farther than h, " +
              std::to_string(set_mismatch) + " node-set mismatches, " + std::to_string(total_nodes) + " nodes"};
}

Outcome splitting_game() {
  const auto game = family::splitting_game();
  const auto res = solve_vi(game);
  const double gap = std::abs(res.point.sum() - 1.0);
  const auto nodes = grid_oracle(game, 0.05);
  bool face = nodes.size() == 21;
  for (std::size_t k = 0; face && k < nodes.size(); ++k)
    face = nodes[k].index[0] + nodes[k].index[1] == 20 && nodes[k].index[0] == static_cast<long>(k);
  return {res.converged && gap <= 1e-6 && face,
          "|x1 + x2 - 1| = " + fmt(gap) + ", " + std::to_string(nodes.size()) + " oracle nodes"};
}

Outcome pure_exchange() {
  const auto econ = family::pure_exchange();
  const auto out = solve_competitive(econ);
  const Vector &p = out.allocation.p;
  const double perr = (p - Vector::Constant(2, 0.5)).lpNorm<Eigen::Infinity>();
  const double clearing = out.clearing_violations.size() ? out.clearing_violations.maxCoeff() : 0.0;
  return {perr <= 1e-4 && out.walras_gap <= 1e-6 && clearing <= 1e-8,
          "p = (" + fmt(p(0)) + ", " + fmt(p(1)) + "), walras_gap = " + fmt(out.walras_gap) +
              ", max clearing violation = " + fmt(clearing)};
}

PreferenceMap on_unit_interval(RelationOracle r) {
  PreferenceMap pref;
  pref.variant = std::move(r);
  pref.ambient = ConvexBody::box(Vector::Zero(1), Vector::Ones(1));
  pref.block = {0, 1};
  pref.joint_dim = 1;
  return pref;
}

bool same_report(const PropertyReport &a, const PropertyReport &b) {
  if (a.status != b.status || a.witness.size() != b.witness.size() || a.t != b.t) return false;
  for (std::size_t k = 0; k < a.witness.size(); ++k)
    if (a.witness[k] != b.witness[k]) return false;
  return true;
}

Outcome relation_profiles() {
  std::vector<std::string> failures;
  for (const auto &name : {std::string("strict_greater"), std::string("not_equal"), std::string("empty")}) {
    const auto pref = on_unit_interval(catalog_relation(name));
    const auto p = relation_profile(pref, 64, 0);
    const auto q = relation_profile(pref, 64, 0);
    bool ok = p.irreflexive.status == Verdict::Holds;
    if (name == "strict_greater") {
      ok = ok && p.convex.status == Verdict::Holds && p.nonsatiated.status == Verdict::Fails &&
           p.nonsatiated.witness.size() == 1 && p.nonsatiated.witness[0](0) == 1.0;
    } else if (name == "not_equal") {
      ok = ok && p.convex.status == Verdict::Fails && p.convex.witness.size() == 3 &&
           p.convex.witness[0](0) == 0.5 && p.convex.witness[1](0) == 0.0 && p.convex.witness[2](0) == 1.0 &&
           p.convex.t == 0.5;
    } else {
      ok = ok && p.nonsatiated.status == Verdict::Fails && p.nonsatiated.witness.size() == 1;
    }
    ok = ok && same_report(p.irreflexive, q.irreflexive) && same_report(p.convex, q.convex) &&
         same_report(p.nonsatiated, q.nonsatiated) && same_report(p.lsc_sampled, q.lsc_sampled);
    if (!ok) failures.push_back(name);
  }
  std::string detail = failures.empty() ? "3/3 profiles match with identical reruns" : "mismatch:";
  for (const auto &f : failures) detail += " " + f;
  return {failures.empty(), detail};
}

// One player on the orthant of R^2 with u(x) = -|x|^2.
GameInstance inward_orthant() {
  auto s = HalfspaceSystem::in_dim(2);
  s.add_row(family::unit_row(2, 0, -1.0), 0.0);
  s.add_row(family::unit_row(2, 1, -1.0), 0.0);
  std::vector<PlayerSpec> players{
      {ConvexBody::hpoly(s), ConcaveQuadUtility{-2.0 * Matrix::Identity(2, 2), Vector::Zero(2)}, SharedSlice{}}};
  return GameInstance(std::move(players), ConvexBody::hpoly(s));
}

// Two scalar players on the orthant with u_i(x) = x_i.
GameInstance outward_orthant() {
  auto s = HalfspaceSystem::in_dim(2);
  s.add_row(family::unit_row(2, 0, -1.0), 0.0);
  s.add_row(family::unit_row(2, 1, -1.0), 0.0);
  auto half = HalfspaceSystem::in_dim(1);
  half.add_row(Eigen::RowVectorXd::Constant(1, -1.0), 0.0);
  std::vector<PlayerSpec> players;
  for (int i = 0; i < 2; ++i)
    players.push_back({ConvexBody::hpoly(half), LinearUtility{Vector::Ones(1)}, SharedSlice{}});
  return GameInstance(std::move(players), ConvexBody::hpoly(s));
}

Outcome coercivity() {
  const double rho = 1.0, rho_prime = 2.0;
  const int samples = 64;
  const auto bounded = check_coercivity_jointly_convex(family::splitting_game(), rho, rho_prime, samples, 0);
  const bool vacuous = bounded.status == CoercivityReport::Status::Vacuous;

  // Every improvement must be a feasible, strictly shorter point; for
  // u = -|x|^2 that is exactly strict preference.
  const auto in = check_coercivity_jointly_convex(inward_orthant(), rho, rho_prime, samples, 0);
  bool holds = in.status == CoercivityReport::Status::HoldsOnSamples && !in.improvements.empty();
  for (const auto &[y, z] : in.improvements)
    holds = holds && y.norm() > rho && (z.array() >= -1e-9).all() && (y.array() >= -1e-9).all() && z.norm() < y.norm();

  // Any orthant point outside the ball is a valid witness: z_i > y_i >= 0 for
  // both players forces |z| > |y|.
  const auto out = check_coercivity_jointly_convex(outward_orthant(), rho, rho_prime, samples, 0);
  bool violated = out.status == CoercivityReport::Status::Violated && out.witness.has_value();
  if (violated) violated = (out.witness->array() >= -1e-9).all() && out.witness->norm() > rho;

  return {vacuous && holds && violated, "bounded " + to_string(bounded.status) + ", inward " + to_string(in.status) +
                                            " (" + std::to_string(in.improvements.size()) + " improvements), outward " +
                                            to_string(out.status)};
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Outcome reproducibility() {
  const fs::path root = fs::temp_directory_path() / "gnep_acceptance_repro";
  fs::remove_all(root);
  const auto inst = [](const std::string &name) { return (fs::path(GNEP_INSTANCE_DIR) / name).string(); };
  const std::vector<std::vector<std::string>> commands{
      {"solve", inst("splitting_game.json")},
      {"solve", inst("mixed_constraints.json"), "--seed", "9", "--trace"},
      {"solve", inst("splitting_game.json"), "--method", "extragradient"},
      {"verify", inst("splitting_game.json"), inst("point_interior.json")},
      {"oracle", inst("splitting_game.json"), "--h", "0.05"},
      {"economy", inst("pure_exchange.json"), "--trace"},
      {"economy", inst("pure_exchange.json"), "--check-only", inst("pure_exchange_outcome.json")},
      {"profile", "--relation", "not_equal", "--seed", "3"},
      {"coercivity", inst("outward_orthant.json"), "--rho", "1", "--rho-prime", "2"},
  };
  int compared = 0, differing = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    int codes[2];
    for (int rep = 0; rep < 2; ++rep) {
      auto args = commands[c];
      args.push_back("--out-dir");
      args.push_back((root / std::to_string(c) / std::to_string(rep)).string());
      std::ostringstream out, err;
      codes[rep] = cli::run(args, out, err);
    }
    if (codes[0] != codes[1]) ++differing;
    for (const auto &entry : fs::directory_iterator(root / std::to_string(c) / "0")) {
      const auto name = entry.path().filename();
      if (name.string().find("_manifest") != std::string::npos) continue;
      ++compared;
      if (slurp(entry.path()) != slurp(root / std::to_string(c) / "1" / name)) ++differing;
    }
  }
  fs::remove_all(root);
  return {differing == 0 && compared > 0,
          std::to_string(commands.size()) + " commands, " + std::to_string(compared) + " files compared, " +
              std::to_string(differing) + " differ"};
}

} // namespace

int main() {
  const std::vector<std::pair<double, std::function<Outcome()>>> criteria{
      {10.0, separation_suite},
      {10.0, strict_inequality_suite},
      {120.0, [] { return soundness_suite(false); }},
      {180.0, [] { return soundness_suite(true); }},
      {300.0, oracle_equivalence},
      {60.0, splitting_game},
      {30.0, pure_exchange},
      {5.0, relation_profiles},
      {30.0, coercivity},
      {60.0, reproducibility},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const Outcome out = timed(criteria[k].first, criteria[k].second);
    if (!out.pass) ++failures;
    std::cout << "criterion " << (k + 1) << ": " << (out.pass ? "PASS" : "FAIL") << ": " << out.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
