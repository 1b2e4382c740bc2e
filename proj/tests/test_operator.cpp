#include "gnep/error.hpp"
#include "gnep/normal_operator.hpp"

#include "instances.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace gnep;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v(k++) = x;
  return v;
}

GameInstance single_player(PreferenceVariant pref, ConvexBody X) {
  std::vector<PlayerSpec> players{{std::move(X), std::move(pref), FixedConstraint{ConvexBody::box(vec({-1e3, -1e3}), vec({1e3, 1e3}))}}};
  return GameInstance(std::move(players));
}

} // namespace

TEST(NormalMap, LinearUtilityMatchesAngularOracle) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Vector c = vec({gauss(rng), gauss(rng)});
    PreferenceMap pref;
    pref.variant = LinearUtility{c};
    pref.ambient = ConvexBody::box(vec({-5.0, -5.0}), vec({5.0, 5.0}));
    pref.block = {0, 2};
    pref.joint_dim = 2;
    const Vector x = vec({0.3, -0.2});
    const auto cone = normal_map(pref, x);
    ASSERT_EQ(cone.generators.size(), 1u);
    const Vector expected = -c / c.norm();
    EXPECT_LE((cone.generators[0] - expected).norm(), 1e-9);

    // Oracle: sampled members of the strict upper half-plane, angular grid.
    std::vector<Vector> members;
    for (int k = 0; k < 4000; ++k) {
      const Vector y = vec({u(rng), u(rng)});
      if (c.dot(y - x) > 1e-9) members.push_back(y);
    }
    const auto normals = oracle::angular_normals(members, x, 720, 2.0 * M_PI / 720.0);
    ASSERT_FALSE(normals.empty());
    for (const auto &d : normals) EXPECT_LE((d - expected).norm(), 0.05);
  }
}

TEST(NormalMap, SatiatedPlayerIsWholeSpace) {
  PreferenceMap pref;
  pref.variant = LinearUtility{vec({1.0})};
  pref.ambient = ConvexBody::box(Vector::Zero(1), Vector::Ones(1));
  pref.block = {0, 1};
  pref.joint_dim = 1;
  EXPECT_TRUE(normal_map(pref, vec({1.0})).whole_space);
  const auto left = normal_map(pref, vec({0.5}));
  ASSERT_EQ(left.generators.size(), 1u);
  EXPECT_NEAR(left.generators[0](0), -1.0, 1e-12);
}

TEST(EvaluateT, SplittingGameInterior) {
  const auto game = family::splitting_game();
  const auto eval = evaluate_T(game, vec({0.2, 0.3}));
  ASSERT_EQ(eval.blocks.size(), 2u);
  for (const auto &b : eval.blocks) {
    ASSERT_EQ(b.generators.size(), 1u);
    EXPECT_NEAR(b.generators[0](0), -1.0, 1e-12);
  }
  EXPECT_TRUE(select(eval).isApprox(vec({-1.0, -1.0})));
}

TEST(EvaluateT, SingleLinearPlayer) {
  const auto game = single_player(LinearUtility{vec({3.0, 4.0})}, ConvexBody::box(vec({-1, -1}), vec({1, 1})));
  const Vector t = select(evaluate_T(game, vec({0.0, 0.0})));
  EXPECT_NEAR(t(0), -0.6, 1e-12);
  EXPECT_NEAR(t(1), -0.8, 1e-12);
}

TEST(EvaluateT, SatiatedBlockSelectsZero) {
  const auto game = single_player(LinearUtility{vec({1.0, 0.0})}, ConvexBody::box(vec({0, 0}), vec({1, 1})));
  const auto eval = evaluate_T(game, vec({1.0, 0.5}));
  EXPECT_TRUE(eval.any_whole_space);
  EXPECT_TRUE(select(eval).isZero());
}

TEST(EvaluateT, SimplexChoiceSetProjectsOntoTangentSpace) {
  // On the price simplex the normal -c/|c| is replaced by its component in
  // the simplex's direction space.
  const auto game = single_player(LinearUtility{vec({1.0, 2.0})}, ConvexBody::simplex(2));
  const Vector t = select(evaluate_T(game, vec({0.5, 0.5})));
  EXPECT_NEAR(t.sum(), 0.0, 1e-12);
  EXPECT_NEAR(t.norm(), 1.0, 1e-12);
  EXPECT_GT(t(0), 0.0);
}

TEST(Select, Rules) {
  OperatorEval eval;
  eval.dim = 1;
  eval.layout = {{0, 1}};
  ConeSection single;
  single.dim = 1;
  single.add(vec({-1.0}));
  eval.blocks = {single};
  for (auto rule : {SelectionRule::First, SelectionRule::Centroid, SelectionRule::MinNormHull})
    EXPECT_TRUE(select(eval, rule).isApprox(vec({-1.0})));

  OperatorEval corner;
  corner.dim = 2;
  corner.layout = {{0, 2}};
  ConeSection two;
  two.dim = 2;
  two.add(vec({1.0, 0.0}));
  two.add(vec({0.0, 1.0}));
  corner.blocks = {two};
  EXPECT_TRUE(select(corner, SelectionRule::Centroid).isApprox(vec({0.5, 0.5})));
  EXPECT_TRUE(select(corner, SelectionRule::First).isApprox(vec({1.0, 0.0})));

  OperatorEval opposite = corner;
  ConeSection pair;
  pair.dim = 2;
  pair.add(vec({1.0, 0.0}));
  pair.add(vec({-1.0, 0.0}));
  opposite.blocks = {pair};
  EXPECT_LE(select(opposite, SelectionRule::MinNormHull).norm(), 1e-9);
}

TEST(Select, ParseNames) {
  EXPECT_EQ(parse_selection("first"), SelectionRule::First);
  EXPECT_EQ(parse_selection("centroid"), SelectionRule::Centroid);
  EXPECT_EQ(parse_selection("min_norm_hull"), SelectionRule::MinNormHull);
  EXPECT_ANY_THROW(parse_selection("other"));
}

TEST(EvaluateT, SelfPreferencePropagates) {
  AffineRows low, high;
  low.A0 = Matrix::Constant(1, 1, 1.0);
  low.b0 = vec({0.2});
  low.D = Matrix(0, 0);
  low.strict = {true};
  high.A0 = Matrix::Constant(1, 1, -1.0);
  high.b0 = vec({-0.8});
  high.D = Matrix(0, 0);
  high.strict = {true};
  std::vector<PlayerSpec> players{{ConvexBody::box(Vector::Zero(1), Vector::Ones(1)), UnionPreference{{low, high}},
                                   FixedConstraint{ConvexBody::box(Vector::Zero(1), Vector::Ones(1))}}};
  GameInstance game(std::move(players));
  try {
    evaluate_T(game, vec({0.5}));
    FAIL() << "expected SelfPreference";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::SelfPreference);
  }
}
