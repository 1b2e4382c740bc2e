#include "gnep/cli.hpp"
#include "gnep/serialization.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using gnep::cli::run;

namespace {

std::string instance(const std::string &name) { return (fs::path(GNEP_INSTANCE_DIR) / name).string(); }

struct Run {
  int code = 0;
  std::string out, err;
};

Run invoke(std::vector<std::string> args, const fs::path &out_dir) {
  args.push_back("--out-dir");
  args.push_back(out_dir.string());
  std::ostringstream out, err;
  Run r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("gnep_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

} // namespace

TEST_F(CliTest, SolveSplittingGameWithExtragradient) {
  const auto r = invoke({"solve", instance("splitting_game.json"), "--method", "extragradient"}, dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = gnep::io::read_file((dir_ / "solve_result.json").string());
  EXPECT_EQ(j.at("verdict"), "equilibrium");
  const double sum = j.at("point")[0].get<double>() + j.at("point")[1].get<double>();
  EXPECT_NEAR(sum, 1.0, 1e-6);
  EXPECT_TRUE(fs::exists(dir_ / "solve_manifest.json"));
}

TEST_F(CliTest, SolveWritesTrace) {
  const auto r = invoke({"solve", instance("splitting_game.json"), "--trace"}, dir_);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto csv = slurp(dir_ / "solve_trace.csv");
  EXPECT_EQ(csv.rfind("iter,residual,x1,x2\n", 0), 0u);
}

TEST_F(CliTest, MalformedJsonReportsPosition) {
  const auto bad = dir_ / "bad.json";
  std::ofstream(bad) << "{\n  \"players\": [\n    oops\n  ]\n}\n";
  const auto r = invoke({"solve", bad.string()}, dir_);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(":3:"), std::string::npos) << r.err;
}

TEST_F(CliTest, SelfPreferenceIsSolverFailure) {
  const auto r = invoke({"solve", instance("self_preference.json")}, dir_);
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("SelfPreference"), std::string::npos) << r.err;
}

TEST_F(CliTest, VerifyExitCodes) {
  EXPECT_EQ(invoke({"verify", instance("splitting_game.json"), instance("point_equilibrium.json")}, dir_).code, 0);
  EXPECT_EQ(invoke({"verify", instance("splitting_game.json"), instance("point_interior.json")}, dir_).code, 4);
  EXPECT_EQ(invoke({"verify", instance("splitting_game.json"), instance("point_wrong_dim.json")}, dir_).code, 5);
  const auto cert = gnep::io::read_file((dir_ / "certificate.json").string());
  EXPECT_EQ(cert.at("verdict"), "not_equilibrium");
}

TEST_F(CliTest, OracleCsv) {
  ASSERT_EQ(invoke({"oracle", instance("splitting_game.json"), "--h", "0.05"}, dir_).code, 0);
  std::istringstream csv(slurp(dir_ / "oracle.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "k1,k2,x1,x2");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 21);
  EXPECT_EQ(invoke({"oracle", instance("splitting_game.json"), "--h", "1e-5"}, dir_).code, 6);
}

TEST_F(CliTest, OracleEmptyAnswerIsValid) {
  ASSERT_EQ(invoke({"oracle", instance("offgrid_argmax.json"), "--h", "0.3"}, dir_).code, 0);
  EXPECT_EQ(slurp(dir_ / "oracle.csv"), "k1,x1\n");
}

TEST_F(CliTest, EconomySolveAndCheck) {
  ASSERT_EQ(invoke({"economy", instance("pure_exchange.json")}, dir_).code, 0);
  const auto j = gnep::io::read_file((dir_ / "economy_outcome.json").string());
  EXPECT_NEAR(j.at("allocation").at("p")[0].get<double>(), 0.5, 1e-4);
  const auto csv = slurp(dir_ / "economy_diagnostics.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);

  const auto check = invoke({"economy", instance("pure_exchange.json"), "--check-only",
                             instance("pure_exchange_outcome.json")}, dir_);
  EXPECT_EQ(check.code, 0) << check.err;
  const auto checked = gnep::io::read_file((dir_ / "economy_outcome.json").string());
  EXPECT_TRUE(checked.at("solve").is_null());
}

TEST_F(CliTest, InvalidSharesExitTwo) {
  auto j = gnep::io::read_file(instance("pure_exchange.json"));
  j["consumers"][0]["theta"] = {0.4};
  const auto bad = dir_ / "shares.json";
  std::ofstream(bad) << j.dump();
  EXPECT_EQ(invoke({"economy", bad.string()}, dir_).code, 2);
}

TEST_F(CliTest, UnknownFlagIsUsageError) {
  EXPECT_EQ(invoke({"solve", instance("splitting_game.json"), "--bogus"}, dir_).code, 2);
  EXPECT_EQ(invoke({"solve", instance("splitting_game.json"), "--method", "newton"}, dir_).code, 2);
}

TEST_F(CliTest, ProfileAndCoercivity) {
  ASSERT_EQ(invoke({"profile", "--relation", "strict_greater"}, dir_).code, 0);
  const auto p = gnep::io::read_file((dir_ / "relation_profile.json").string());
  EXPECT_EQ(p.at("nonsatiated").at("status"), "fails");
  EXPECT_EQ(invoke({"coercivity", instance("outward_orthant.json"), "--rho", "1", "--rho-prime", "2"}, dir_).code, 4);
  const auto c = gnep::io::read_file((dir_ / "coercivity.json").string());
  EXPECT_EQ(c.at("status"), "violated");
}

TEST_F(CliTest, RerunsAreByteIdentical) {
  const std::vector<std::vector<std::string>> commands{
      {"solve", instance("splitting_game.json")},
      {"solve", instance("mixed_constraints.json"), "--seed", "9"},
      {"verify", instance("splitting_game.json"), instance("point_interior.json")},
      {"oracle", instance("splitting_game.json")},
      {"economy", instance("pure_exchange.json")},
  };
  for (const auto &cmd : commands) {
    invoke(cmd, dir_ / "a");
    invoke(cmd, dir_ / "b");
    for (const auto &entry : fs::directory_iterator(dir_ / "a")) {
      const auto name = entry.path().filename();
      if (name.string().find("manifest") != std::string::npos) continue;
      EXPECT_EQ(slurp(entry.path()), slurp(dir_ / "b" / name)) << cmd[0] << " " << name;
    }
  }
}
