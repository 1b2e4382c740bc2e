#include "gnep/game.hpp"

#include "gnep/error.hpp"
#include "gnep/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gnep {

namespace {

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

// Own-block utility data becomes joint data padded with zeros.
PreferenceVariant embed(PreferenceVariant v, const Block &b, int n) {
  if (auto *lin = std::get_if<LinearUtility>(&v)) {
    if (lin->c.size() == b.size && b.size != n) {
      Vector c = Vector::Zero(n);
      c.segment(b.offset, b.size) = lin->c;
      lin->c = c;
    }
  } else if (auto *quad = std::get_if<ConcaveQuadUtility>(&v)) {
    if (quad->Q.rows() == b.size && b.size != n) {
      Matrix Q = Matrix::Zero(n, n);
      Q.block(b.offset, b.offset, b.size, b.size) = quad->Q;
      quad->Q = Q;
    }
    if (quad->c.size() == b.size && b.size != n) {
      Vector c = Vector::Zero(n);
      c.segment(b.offset, b.size) = quad->c;
      quad->c = c;
    }
  }
  return v;
}

ConvexBody with_choice(HalfspaceSystem rows, const ConvexBody &choice) {
  if (choice.is_polyhedral()) {
    rows.append(choice.halfspaces());
    return ConvexBody::hpoly(rows.closure());
  }
  if (rows.rows() + rows.eq_rows() == 0) return choice;
  return ConvexBody::intersection({ConvexBody::hpoly(rows.closure()), choice});
}

double feasibility_slack(const ConvexBody &K, const Vector &z) {
  if (K.kind() == ConvexBody::Kind::HPoly) return K.system().max_violation(z);
  if (K.is_polyhedral()) return K.halfspaces().max_violation(z);
  if (K.is_empty()) return std::numeric_limits<double>::infinity();
  return (z - project(K, z)).norm();
}

struct Emptiness {
  double sigma = -1.0;
  std::optional<Vector> witness;
};

Emptiness polyhedral_emptiness(const HalfspaceSystem &pref_rows, const ConvexBody &K) {
  HalfspaceSystem s = pref_rows;
  s.append(K.halfspaces().closure());
  Emptiness e;
  if (const auto res = s.strict_margin_point()) {
    e.sigma = res->first;
    e.witness = res->second;
  }
  return e;
}

} // namespace

std::string constraint_kind(const ConstraintMap &c) {
  return std::visit(overloaded{
                        [](const SharedSlice &) { return std::string("shared_slice"); },
                        [](const FixedConstraint &) { return std::string("fixed"); },
                        [](const ParametricConstraint &) { return std::string("parametric_polyhedral"); },
                        [](const CallbackConstraint &) { return std::string("callback"); },
                    },
                    c);
}

GameInstance::GameInstance(std::vector<PlayerSpec> players, std::optional<ConvexBody> shared_set)
    : shared_(std::move(shared_set)) {
  if (players.empty()) throw Error(ErrorCode::InvalidArgument, "a game needs at least one player");
  for (const auto &p : players) {
    blocks_.push_back({dim_, p.choice_set.dim()});
    dim_ += p.choice_set.dim();
  }
  for (std::size_t i = 0; i < players.size(); ++i) {
    auto &spec = players[i];
    Player p{spec.choice_set, PreferenceMap{}, spec.constraint, spec.name};
    p.preference.variant = embed(std::move(spec.preference), blocks_[i], dim_);
    p.preference.ambient = spec.choice_set;
    p.preference.block = blocks_[i];
    p.preference.joint_dim = dim_;
    p.preference.validate();
    if (const auto *pc = std::get_if<ParametricConstraint>(&p.constraint)) {
      pc->rows.validate(dim_);
      if (pc->rows.local_dim() != blocks_[i].size)
        throw Error(ErrorCode::DimensionMismatch, "parametric constraint width");
    }
    if (const auto *fc = std::get_if<FixedConstraint>(&p.constraint)) {
      if (fc->body.dim() != blocks_[i].size) throw Error(ErrorCode::DimensionMismatch, "fixed constraint dimension");
    }
    if (std::holds_alternative<SharedSlice>(p.constraint) && !shared_)
      throw Error(ErrorCode::NotJointlyConvex, "shared-slice constraint without a shared set");
    players_.push_back(std::move(p));
  }
  if (shared_) {
    if (shared_->dim() != dim_) throw Error(ErrorCode::DimensionMismatch, "shared set dimension differs from the joint dimension");
    if (!shared_->is_polyhedral()) throw Error(ErrorCode::Unsupported, "shared set must be polyhedral");
    if (shared_->is_empty()) throw Error(ErrorCode::EmptyBody, "shared set is empty");
    // Every choice set must contain the shared set's projection on its block.
    const HalfspaceSystem S = shared_->halfspaces().closure();
    for (std::size_t i = 0; i < players_.size(); ++i) {
      const ConvexBody &X = players_[i].choice_set;
      if (!X.is_polyhedral()) continue;
      const HalfspaceSystem H = X.halfspaces();
      const Block &b = blocks_[i];
      auto support = [&](const Eigen::RowVectorXd &a) {
        lp::LinearProgram program(dim_);
        program.objective.segment(b.offset, b.size) = a.transpose();
        program.A_ub = S.A;
        program.b_ub = S.b;
        program.A_eq = S.A_eq;
        program.b_eq = S.b_eq;
        return lp::solve(program);
      };
      auto check = [&](const Eigen::RowVectorXd &a, double rhs) {
        const auto res = support(a);
        const double tol = 1e-9 * std::max(1.0, std::abs(rhs));
        if (!res.optimal() || res.value > rhs + tol)
          throw Error(ErrorCode::InvalidArgument,
                      "choice set of player " + std::to_string(i) + " does not contain the shared set's projection");
      };
      for (int r = 0; r < H.rows(); ++r) check(H.A.row(r), H.b[r]);
      for (int r = 0; r < H.eq_rows(); ++r) {
        check(H.A_eq.row(r), H.b_eq[r]);
        check(-H.A_eq.row(r), -H.b_eq[r]);
      }
    }
  }
}

bool GameInstance::jointly_convex() const {
  return shared_.has_value() && std::all_of(players_.begin(), players_.end(), [](const Player &p) {
           return std::holds_alternative<SharedSlice>(p.constraint);
         });
}

Vector GameInstance::part(const Vector &x, int i) const { return x.segment(blocks_.at(i).offset, blocks_.at(i).size); }

Vector GameInstance::with_part(const Vector &x, int i, const Vector &z) const {
  Vector y = x;
  y.segment(blocks_.at(i).offset, blocks_.at(i).size) = z;
  return y;
}

ConvexBody GameInstance::choice_product() const {
  std::vector<ConvexBody> factors;
  for (const auto &p : players_) factors.push_back(p.choice_set);
  return ConvexBody::product(factors);
}

ConvexBody GameInstance::vi_feasible_set() const {
  if (!shared_) throw Error(ErrorCode::NotJointlyConvex, "game has no shared set");
  HalfspaceSystem s = shared_->halfspaces().closure();
  s.append(choice_product().halfspaces());
  return ConvexBody::hpoly(std::move(s));
}

ConvexBody slice_constraint(const GameInstance &game, int i, const Vector &x) {
  if (!game.shared_set()) throw Error(ErrorCode::NotJointlyConvex, "slice requested without a shared set");
  if (x.size() != game.dim()) throw Error(ErrorCode::DimensionMismatch, "slice point dimension");
  const Block &b = game.block(i);
  const HalfspaceSystem S = game.shared_set()->halfspaces().closure();
  Vector rest = x;
  rest.segment(b.offset, b.size).setZero();
  HalfspaceSystem out = HalfspaceSystem::in_dim(b.size);
  auto substitute = [&](const Matrix &A, const Vector &rhs, bool equality) {
    for (int r = 0; r < A.rows(); ++r) {
      const Eigen::RowVectorXd a = A.row(r).segment(b.offset, b.size);
      const double c = rhs[r] - A.row(r).dot(rest);
      if (a.cwiseAbs().maxCoeff() == 0.0) {
        // Row does not involve z_i: either vacuous or makes the slice empty.
        const bool ok = equality ? std::abs(c) <= 1e-12 : c >= -1e-12;
        if (ok) continue;
      }
      if (equality) out.add_eq(a, c);
      else out.add_row(a, c);
    }
  };
  substitute(S.A, S.b, false);
  substitute(S.A_eq, S.b_eq, true);
  return with_choice(std::move(out), game.player(i).choice_set);
}

ConvexBody constraint_set(const GameInstance &game, int i, const Vector &x) {
  const Player &p = game.player(i);
  return std::visit(
      overloaded{
          [&](const SharedSlice &) { return slice_constraint(game, i, x); },
          [&](const FixedConstraint &c) {
            if (c.body.is_polyhedral()) return with_choice(c.body.halfspaces(), p.choice_set);
            return ConvexBody::intersection({c.body, p.choice_set});
          },
          [&](const ParametricConstraint &c) { return with_choice(c.rows.at(x), p.choice_set); },
          [&](const CallbackConstraint &c) {
            HalfspaceSystem rows = c.rows(x);
            if (rows.dim() != p.dim()) throw Error(ErrorCode::DimensionMismatch, "callback constraint width");
            return with_choice(std::move(rows), p.choice_set);
          },
      },
      p.constraint);
}

EquilibriumCertificate verify_equilibrium(const GameInstance &game, const Vector &x, const Tolerances &tol,
                                          std::uint64_t seed) {
  if (x.size() != game.dim()) throw Error(ErrorCode::DimensionMismatch, "candidate point dimension");
  EquilibriumCertificate cert;
  cert.point = x;
  cert.tol = tol;
  cert.seed = seed;
  bool ok = true;
  for (int i = 0; i < game.num_players(); ++i) {
    const Player &p = game.player(i);
    const Vector xi = game.part(x, i);
    const ConvexBody K = constraint_set(game, i, x);
    const double slack = feasibility_slack(K, xi);
    cert.feasibility_slacks.push_back(slack);
    if (!K.is_polyhedral()) cert.approximate_cones = true;

    Emptiness e;
    const bool K_empty = K.is_empty(tol.open_margin);
    if (!K_empty) {
      std::visit(overloaded{
                     [&](const RelationOracle &o) {
                       cert.sampled_preferences = true;
                       e.sigma = 0.0;
                       for (const auto &z : relation_samples(K, o.sample_budget, o.seed ^ seed)) {
                         if (o.succ(xi, z, x)) {
                           e.sigma = 1.0;
                           e.witness = z;
                           break;
                         }
                       }
                     },
                     [&](const PolyhedralPreference &pp) { e = polyhedral_emptiness(pp.rows.at(x), K); },
                     [&](const UnionPreference &up) {
                       for (const auto &piece : up.pieces) {
                         Emptiness pe = polyhedral_emptiness(piece.at(x), K);
                         if (pe.sigma > e.sigma) e = pe;
                       }
                     },
                     [&](const auto &) {
                       const LocalQuadratic u = local_utility(p.preference, x);
                       const auto best = maximize_utility(u, K);
                       if (!best)
                         throw Error(ErrorCode::UnboundedPreferenceLP,
                                     "utility of player " + std::to_string(i) + " is unbounded on its constraint set");
                       e.sigma = best->value - u.value(xi);
                       e.witness = best->argmax;
                     },
                 },
                 p.preference.variant);
    }
    cert.emptiness_slacks.push_back(e.sigma);
    cert.improving.push_back(e.sigma > tol.open_margin ? e.witness : std::nullopt);
    ok = ok && slack <= tol.feasibility && e.sigma <= tol.open_margin;
  }
  cert.equilibrium = ok;
  return cert;
}

} // namespace gnep
