#include "gnep/economy.hpp"
#include "gnep/error.hpp"

#include "instances.hpp"

#include <gtest/gtest.h>

using namespace gnep;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v(k++) = x;
  return v;
}

ErrorCode code_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  return ErrorCode::Numerical;
}

EconomyInstance exchange_without_firm() {
  EconomyInstance econ = family::pure_exchange();
  econ.J = 0;
  econ.producers.clear();
  econ.consumers[0].theta = Vector(0);
  return econ;
}

CompetitiveOutcome outcome_with(const Allocation &alloc) {
  CompetitiveOutcome out;
  out.allocation = alloc;
  return out;
}

} // namespace

TEST(BudgetSet, DirectSubstitution) {
  const auto econ = exchange_without_firm();
  const auto M = budget_set(econ, 0, vec({0.5, 0.5}), {});
  EXPECT_TRUE(M.contains(vec({1.0, 1.0})));
  EXPECT_TRUE(M.contains(vec({2.0, 0.0})));
  EXPECT_FALSE(M.contains(vec({1.5, 1.0})));
  EXPECT_FALSE(M.contains(vec({2.5, 0.0}))); // outside A = [0, 2]^2
}

TEST(BudgetSet, NegativeProfitIsClamped) {
  auto econ = family::pure_exchange();
  econ.producers[0].B = ConvexBody::box(vec({-1.0, -1.0}), vec({0.0, 0.0}));
  const Vector p = vec({0.3, 0.7});
  const Vector b = vec({-1.0, 0.0}); // <p, b> = -0.3
  const auto M = budget_set(econ, 0, p, {b});
  // Income stays <p, e> = 1: (0, 1/0.7) is affordable, nothing more.
  EXPECT_TRUE(M.contains(vec({0.0, 1.0 / 0.7})));
  EXPECT_FALSE(M.contains(vec({0.0, 1.0 / 0.7 + 1e-3})));
  const auto positive = budget_set(econ, 0, p, {vec({0.0, 0.0})});
  EXPECT_TRUE(positive.contains(vec({0.0, 1.0 / 0.7})));
}

TEST(BudgetSet, VertexPriceConstrainsOneGood) {
  const auto econ = exchange_without_firm();
  const auto M = budget_set(econ, 0, vec({1.0, 0.0}), {});
  EXPECT_TRUE(M.contains(vec({1.0, 2.0})));
  EXPECT_FALSE(M.contains(vec({1.2, 0.0})));
}

TEST(ToGnep, PlayerLayout) {
  const auto game = to_gnep(family::pure_exchange());
  ASSERT_EQ(game.num_players(), 3);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(game.player(i).dim(), 2);
  EXPECT_EQ(game.dim(), 6);
}

TEST(ToGnep, FictitiousPlayerWithoutProducers) {
  const auto econ = exchange_without_firm();
  const auto game = to_gnep(econ);
  ASSERT_EQ(game.num_players(), 2);
  // Price player's utility <p, a - e>: at a = (2, 0), p = (0.5, 0.5) the
  // price player prefers p = (1, 0).
  const Vector x = vec({2.0, 0.0, 0.5, 0.5});
  EXPECT_TRUE(prefers(game.player(1).preference, x, vec({1.0, 0.0})));
  EXPECT_FALSE(prefers(game.player(1).preference, x, vec({0.0, 1.0})));
}

TEST(ToGnep, KnownOutcomeVerifies) {
  const auto econ = family::pure_exchange();
  const Allocation alloc{{vec({1.0, 1.0})}, {vec({0.0, 0.0})}, vec({0.5, 0.5})};
  const auto cert = verify_equilibrium(to_gnep(econ), pack(econ, alloc));
  EXPECT_TRUE(cert.equilibrium);
}

TEST(MarketClearing, Examples) {
  const auto econ = family::pure_exchange();
  const Allocation eq{{vec({1.0, 1.0})}, {vec({0.0, 0.0})}, vec({0.5, 0.5})};
  EXPECT_LE(check_market_clearing(outcome_with(eq), econ).maxCoeff(), 0.0);
  const Allocation over{{vec({1.1, 1.0})}, {vec({0.0, 0.0})}, vec({0.5, 0.5})};
  const Vector v = check_market_clearing(outcome_with(over), econ);
  EXPECT_NEAR(v(econ.index(0, 0)), 0.1, 1e-12);
  EXPECT_NEAR(v(econ.index(0, 1)), 0.0, 1e-12);
}

TEST(MarketClearing, ProductionAbsorbsExcessDemand) {
  auto econ = family::pure_exchange();
  econ.producers[0].B = ConvexBody::box(vec({0.0, 0.0}), vec({0.5, 0.5}));
  const Allocation alloc{{vec({1.5, 1.0})}, {vec({0.5, 0.0})}, vec({0.5, 0.5})};
  EXPECT_LE(check_market_clearing(outcome_with(alloc), econ).maxCoeff(), 0.0);
}

TEST(Walras, Examples) {
  const auto econ = family::pure_exchange();
  EXPECT_NEAR(check_walras(outcome_with({{vec({1.0, 1.0})}, {vec({0.0, 0.0})}, vec({0.5, 0.5})}), econ), 0.0, 1e-15);
  EXPECT_NEAR(check_walras(outcome_with({{vec({1.0, 1.5})}, {vec({0.0, 0.0})}, vec({1.0, 0.0})}), econ), 0.0, 1e-15);
  EXPECT_NEAR(check_walras(outcome_with({{vec({1.2, 1.0})}, {vec({0.0, 0.0})}, vec({0.5, 0.5})}), econ), 0.1, 1e-12);
}

TEST(Diagnose, EquilibriumAndNonEquilibrium) {
  const auto econ = family::pure_exchange();
  const auto good = diagnose(econ, {{vec({1.0, 1.0})}, {vec({0.0, 0.0})}, vec({0.5, 0.5})});
  EXPECT_TRUE(good.equilibrium);
  EXPECT_NEAR(good.walras_gap, 0.0, 1e-15);
  const auto skew = diagnose(econ, {{vec({1.0, 1.0})}, {vec({0.0, 0.0})}, vec({0.8, 0.2})});
  EXPECT_FALSE(skew.equilibrium); // the consumer can afford more of the cheap good
}

TEST(SolveCompetitive, PureExchange) {
  const auto econ = family::pure_exchange();
  const auto out = solve_competitive(econ);
  EXPECT_TRUE(out.equilibrium);
  EXPECT_NEAR(out.allocation.p(0), 0.5, 1e-4);
  EXPECT_NEAR(out.allocation.p(1), 0.5, 1e-4);
  EXPECT_LE(out.walras_gap, 1e-6);
  EXPECT_LE(out.clearing_violations.maxCoeff(), 1e-8);
  EXPECT_NEAR(out.allocation.a[0](0), 1.0, 1e-6);
}

TEST(SolveCompetitive, TwoConsumerExchangePassesDiagnostics) {
  EconomyInstance econ;
  econ.I = 2;
  econ.J = 0;
  econ.L = 1;
  econ.S = 2;
  for (int i = 0; i < 2; ++i) {
    EconomyInstance::Consumer c;
    c.A = ConvexBody::box(Vector::Zero(2), Vector::Constant(2, 2.0));
    c.e = i == 0 ? vec({1.0, 0.0}) : vec({0.0, 1.0});
    c.theta = Vector(0);
    c.preference = LinearUtility{Vector::Ones(2)};
    econ.consumers.push_back(c);
  }
  const auto out = solve_competitive(econ);
  if (out.solve && out.solve->converged) {
    EXPECT_TRUE(out.equilibrium);
    const auto again = diagnose(econ, out.allocation);
    EXPECT_EQ(again.equilibrium, out.equilibrium);
  }
  // Endowments on the boundary of A are flagged, not rejected.
  EXPECT_FALSE(out.hypotheses.interior_endowment[0]);
}

TEST(EconomyInstance, ValidationErrors) {
  auto shares = family::pure_exchange();
  shares.consumers[0].theta = vec({0.7});
  EXPECT_EQ(code_of([&] { shares.validate(); }), ErrorCode::InvalidShares);
  auto no_zero = family::pure_exchange();
  no_zero.producers[0].B = ConvexBody::box(vec({1.0, 1.0}), vec({2.0, 2.0}));
  EXPECT_EQ(code_of([&] { no_zero.validate(); }), ErrorCode::MissingZeroProduction);
}

TEST(EconomyInstance, SatiatedEndowmentIsRejected) {
  auto econ = family::pure_exchange();
  econ.consumers[0].preference = ConcaveQuadUtility{-Matrix::Identity(2, 2), vec({1.0, 1.0})};
  EXPECT_EQ(code_of([&] { solve_competitive(econ); }), ErrorCode::PreconditionViolated);
}

TEST(EconomyInstance, PackUnpackRoundTrip) {
  const auto econ = family::pure_exchange();
  const Allocation alloc{{vec({0.25, 1.5})}, {vec({0.0, 0.0})}, vec({0.6, 0.4})};
  const Allocation back = unpack(econ, pack(econ, alloc));
  EXPECT_EQ(back.a[0], alloc.a[0]);
  EXPECT_EQ(back.p, alloc.p);
}
