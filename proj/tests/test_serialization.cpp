#include "gnep/error.hpp"
#include "gnep/serialization.hpp"

#include "instances.hpp"

#include <gtest/gtest.h>

#include <filesystem>

using namespace gnep;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()> &f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  return ErrorCode::Numerical;
}

std::vector<fs::path> bundled(const std::string &type) {
  std::vector<fs::path> out;
  for (const auto &entry : fs::directory_iterator(GNEP_INSTANCE_DIR)) {
    const auto j = io::read_file(entry.path().string());
    if (j.is_object() && j.value("type", "") == type) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

TEST(Serialization, BundledGamesRoundTrip) {
  const auto files = bundled("game");
  ASSERT_GE(files.size(), 5u);
  for (const auto &f : files) {
    const auto first = io::game_to_json(io::game_from_json(io::read_file(f.string())));
    const auto second = io::game_to_json(io::game_from_json(first));
    EXPECT_EQ(io::dump(first), io::dump(second)) << f;
  }
}

TEST(Serialization, BundledEconomiesRoundTrip) {
  const auto files = bundled("economy");
  ASSERT_GE(files.size(), 2u);
  for (const auto &f : files) {
    const auto first = io::economy_to_json(io::economy_from_json(io::read_file(f.string())));
    const auto second = io::economy_to_json(io::economy_from_json(first));
    EXPECT_EQ(io::dump(first), io::dump(second)) << f;
  }
}

TEST(Serialization, BodiesRoundTripExactly) {
  auto s = HalfspaceSystem::in_dim(2);
  s.add_row(Eigen::RowVector2d(0.1, 1.0 / 3.0), 0.7, true);
  s.add_eq(Eigen::RowVector2d(1.0, 1.0), 1.0);
  const std::vector<ConvexBody> bodies{ConvexBody::box(Vector::Zero(2), Vector::Constant(2, 0.3)),
                                       ConvexBody::simplex(3, 2.5), ConvexBody::hpoly(s),
                                       ConvexBody::ball(Vector::Constant(2, 0.1), 1.0 / 7.0),
                                       ConvexBody::intersection({ConvexBody::ball(Vector::Zero(2), 1.0),
                                                                 ConvexBody::box(Vector::Zero(2), Vector::Ones(2))})};
  for (const auto &b : bodies) {
    const auto j = io::body_to_json(b);
    const auto back = io::body_from_json(io::parse_text(io::dump(j)));
    EXPECT_EQ(io::dump(io::body_to_json(back)), io::dump(j));
  }
  const auto hp = io::body_from_json(io::body_to_json(ConvexBody::hpoly(s)));
  EXPECT_EQ(hp.system().A(0, 1), 1.0 / 3.0);
  EXPECT_TRUE(hp.system().strict[0]);
}

TEST(Serialization, NumbersAcceptDecimalStrings) {
  const auto j = io::parse_text(R"({"kind":"box","lower":["0.25","-1e-3"],"upper":[1,"inf"]})");
  const auto b = io::body_from_json(j);
  EXPECT_EQ(b.lower()(0), 0.25);
  EXPECT_EQ(b.lower()(1), -1e-3);
  EXPECT_TRUE(std::isinf(b.upper()(1)));
  EXPECT_EQ(code_of([] { io::to_number(io::json("12abc")); }), ErrorCode::ParseError);
}

TEST(Serialization, ParseErrorsReportLineAndColumn) {
  try {
    io::parse_text("{\n  \"players\": [\n    {\"dim\": 1,,}\n  ]\n}", "bad.json");
    FAIL() << "expected ParseError";
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("bad.json:3:"), std::string::npos) << e.what();
  }
}

TEST(Serialization, SchemaErrors) {
  EXPECT_EQ(code_of([] { io::game_from_json(io::parse_text(R"({"schema_version": 99, "players": []})")); }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { io::body_from_json(io::parse_text(R"({"kind": "torus"})")); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { io::preference_from_json(io::parse_text(R"({"variant": "linear_utility"})")); }),
            ErrorCode::ParseError);
  EXPECT_EQ(code_of([] {
              io::preference_from_json(io::parse_text(R"({"variant": "relation_oracle", "relation": "nope"})"));
            }),
            ErrorCode::ParseError);
}

TEST(Serialization, CallbacksAndCustomRelationsAreNotSerializable) {
  CallbackConstraint cb{"budget", [](const Vector &) { return HalfspaceSystem::in_dim(1); }};
  EXPECT_EQ(code_of([&] { io::constraint_to_json(cb); }), ErrorCode::Unsupported);
  RelationOracle custom{"mine", [](const Vector &, const Vector &, const Vector &) { return false; }, 8, 0};
  EXPECT_EQ(code_of([&] { io::preference_to_json(custom); }), ErrorCode::Unsupported);
  EXPECT_NO_THROW(io::preference_to_json(catalog_relation("not_equal")));
}

TEST(Serialization, CertificateCarriesTolerancesAndSeed) {
  const auto game = family::splitting_game();
  Tolerances tol;
  tol.open_margin = 1e-6;
  Vector x(2);
  x << 0.3, 0.3;
  const auto j = io::certificate_to_json(verify_equilibrium(game, x, tol, 42));
  EXPECT_EQ(j.at("schema_version"), io::kSchemaVersion);
  EXPECT_EQ(j.at("seed"), 42);
  EXPECT_EQ(j.at("tolerances").at("open_margin"), 1e-6);
  EXPECT_EQ(j.at("verdict"), "not_equilibrium");
  EXPECT_EQ(io::dump(j), io::dump(io::certificate_to_json(verify_equilibrium(game, x, tol, 42))));
}

TEST(Serialization, AllocationDimensionsChecked) {
  const auto econ = family::pure_exchange();
  EXPECT_NO_THROW(io::allocation_from_json(io::parse_text(R"({"a":[[1,1]],"b":[[0,0]],"p":[0.5,0.5]})"), econ));
  EXPECT_EQ(code_of([&] { io::allocation_from_json(io::parse_text(R"({"a":[[1]],"b":[[0,0]],"p":[1]})"), econ); }),
            ErrorCode::DimensionMismatch);
}
