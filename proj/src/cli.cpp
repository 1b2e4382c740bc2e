#include "gnep/cli.hpp"

#include "gnep/economy.hpp"
#include "gnep/error.hpp"
#include "gnep/serialization.hpp"
#include "gnep/solvers.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

namespace gnep::cli {

namespace {

namespace fs = std::filesystem;
using io::json;

struct CommonFlags {
  std::string method = "projection";
  std::string selection = "min_norm_hull";
  std::string mode = "auto";
  double alpha = 0.5;
  int max_iters = 5000;
  double tol = 1e-6;
  double h = 0.05;
  std::uint64_t seed = 0;
  int restarts = 8;
  bool trace = false;
  std::string out_dir = ".";
  double feas_tol = 1e-8;
  double open_margin = 1e-7;
  double activity_tol = 1e-8;
};

void add_tolerance_flags(CLI::App *cmd, CommonFlags &f) {
  cmd->add_option("--feas-tol", f.feas_tol, "Feasibility tolerance")->capture_default_str();
  cmd->add_option("--open-margin", f.open_margin, "Margin for strict inequalities")->capture_default_str();
  cmd->add_option("--activity-tol", f.activity_tol, "Active-constraint threshold")->capture_default_str();
  cmd->add_option("--seed", f.seed, "Seed for sampling and restarts")->capture_default_str();
  cmd->add_option("--out-dir", f.out_dir, "Directory for output files")->capture_default_str();
}

void add_solver_flags(CLI::App *cmd, CommonFlags &f) {
  cmd->add_option("--method", f.method, "projection or extragradient")->capture_default_str();
  cmd->add_option("--selection", f.selection, "first, centroid or min_norm_hull")->capture_default_str();
  cmd->add_option("--alpha", f.alpha, "Step size")->capture_default_str();
  cmd->add_option("--max-iters", f.max_iters, "Iteration cap per run")->capture_default_str();
  cmd->add_option("--tol", f.tol, "Residual tolerance")->capture_default_str();
  cmd->add_option("--restarts", f.restarts, "Seeded restarts after the first run")->capture_default_str();
  cmd->add_flag("--trace", f.trace, "Write the iteration trace CSV");
}

Tolerances tolerances(const CommonFlags &f) { return Tolerances{f.feas_tol, f.open_margin, f.activity_tol}; }

SolverConfig solver_config(const CommonFlags &f) {
  SolverConfig c;
  c.method = parse_method(f.method);
  c.selection = parse_selection(f.selection);
  c.alpha = f.alpha;
  c.max_iters = f.max_iters;
  c.residual_tol = f.tol;
  c.h = f.h;
  c.seed = f.seed;
  c.restarts = f.restarts;
  c.trace = f.trace;
  c.tol = tolerances(f);
  c.validate();
  return c;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

fs::path output_path(const CommonFlags &f, const std::string &name) {
  fs::create_directories(f.out_dir);
  return fs::path(f.out_dir) / name;
}

void write_text(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << text;
}

/// Records the invocation next to its outputs. Wall time is the only field
/// that differs between reruns.
void write_manifest(const CommonFlags &f, const std::string &command, const std::vector<std::string> &inputs,
                    const json &config, const std::vector<fs::path> &outputs, double wall_seconds) {
  json m;
  m["schema_version"] = io::kSchemaVersion;
  m["type"] = "run_manifest";
  m["command"] = command;
  m["inputs"] = inputs;
  m["config"] = config;
  m["seed"] = f.seed;
  m["tool_version"] = kToolVersion;
  m["wall_time_seconds"] = wall_seconds;
  json outs = json::array();
  for (const auto &p : outputs) outs.push_back(p.string());
  m["outputs"] = outs;
  write_text(output_path(f, command + "_manifest.json"), io::dump(m));
}

json tolerance_config(const CommonFlags &f) { return io::tolerances_to_json(tolerances(f)); }

int exit_for(const Error &e) {
  switch (e.code()) {
  case ErrorCode::ParseError:
  case ErrorCode::InvalidArgument:
  case ErrorCode::InvalidShares:
  case ErrorCode::MissingZeroProduction:
  case ErrorCode::NotJointlyConvex:
  case ErrorCode::Unsupported:
    return kUsageOrParse;
  case ErrorCode::DimensionMismatch:
    return kDimensionMismatch;
  case ErrorCode::TooLarge:
    return kTooLarge;
  default:
    return kSolverFailure;
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int cmd_solve(const std::string &instance, const CommonFlags &f, std::ostream &out) {
  const auto start = std::chrono::steady_clock::now();
  const GameInstance game = io::game_from_json(io::read_file(instance));
  const SolverConfig config = solver_config(f);

  bool use_vi = game.jointly_convex();
  if (f.mode == "vi") use_vi = true;
  else if (f.mode == "qvi") use_vi = false;
  else if (f.mode != "auto") throw Error(ErrorCode::InvalidArgument, "--mode must be auto, vi or qvi");

  const SolveResult result = use_vi ? solve_vi(game, config) : solve_qvi(game, config);

  std::vector<fs::path> outputs;
  json doc = io::solve_result_to_json(result, config);
  doc["problem"] = use_vi ? "vi" : "qvi";
  outputs.push_back(output_path(f, "solve_result.json"));
  write_text(outputs.back(), io::dump(doc));

  if (config.trace) {
    std::ostringstream csv;
    csv << "iter,residual";
    for (int k = 0; k < game.dim(); ++k) csv << ",x" << (k + 1);
    csv << "\n";
    for (const auto &row : result.trace) {
      csv << row.iter << "," << format_double(row.residual);
      for (Eigen::Index k = 0; k < row.point.size(); ++k) csv << "," << format_double(row.point(k));
      csv << "\n";
    }
    outputs.push_back(output_path(f, "solve_trace.csv"));
    write_text(outputs.back(), csv.str());
  }
  json config_doc = io::config_to_json(config);
  config_doc["mode"] = f.mode;
  write_manifest(f, "solve", {instance}, config_doc, outputs, seconds_since(start));

  out << (result.certificate.equilibrium ? "equilibrium" : "not_equilibrium") << " residual "
      << format_double(result.vi_residual) << " iterations " << result.iterations << "\n";
  if (result.certificate.equilibrium) return kOk;
  return result.converged ? kNotEquilibrium : kSolverFailure;
}

int cmd_verify(const std::string &instance, const std::string &point_path, const CommonFlags &f, std::ostream &out) {
  const auto start = std::chrono::steady_clock::now();
  const GameInstance game = io::game_from_json(io::read_file(instance));
  const Vector x = io::point_from_json(io::read_file(point_path));
  if (x.size() != game.dim())
    throw Error(ErrorCode::DimensionMismatch, "point has dimension " + std::to_string(x.size()) +
                                                  " but the game has dimension " + std::to_string(game.dim()));
  const EquilibriumCertificate cert = verify_equilibrium(game, x, tolerances(f), f.seed);
  const auto path = output_path(f, "certificate.json");
  write_text(path, io::dump(io::certificate_to_json(cert)));
  write_manifest(f, "verify", {instance, point_path}, tolerance_config(f), {path}, seconds_since(start));
  out << (cert.equilibrium ? "equilibrium" : "not_equilibrium") << "\n";
  return cert.equilibrium ? kOk : kNotEquilibrium;
}

int cmd_oracle(const std::string &instance, const CommonFlags &f, std::ostream &out) {
  const auto start = std::chrono::steady_clock::now();
  const GameInstance game = io::game_from_json(io::read_file(instance));
  const auto nodes = grid_oracle(game, f.h, tolerances(f));

  std::ostringstream csv;
  for (int k = 0; k < game.dim(); ++k) csv << "k" << (k + 1) << ",";
  for (int k = 0; k < game.dim(); ++k) csv << "x" << (k + 1) << (k + 1 < game.dim() ? "," : "\n");
  for (const auto &node : nodes) {
    for (long idx : node.index) csv << idx << ",";
    for (Eigen::Index k = 0; k < node.point.size(); ++k)
      csv << format_double(node.point(k)) << (k + 1 < node.point.size() ? "," : "\n");
  }
  const auto path = output_path(f, "oracle.csv");
  write_text(path, csv.str());
  json config = tolerance_config(f);
  config["h"] = io::number(f.h);
  write_manifest(f, "oracle", {instance}, config, {path}, seconds_since(start));
  out << nodes.size() << " certified nodes\n";
  return kOk;
}

std::string diagnostics_csv(const EconomyInstance &econ, const CompetitiveOutcome &outcome) {
  std::ostringstream csv;
  csv << "l,s,index,price,demand,supply,endowment,excess,clearing_violation\n";
  const auto &alloc = outcome.allocation;
  for (int s = 0; s < econ.S; ++s) {
    for (int l = 0; l < econ.L; ++l) {
      const int h = econ.index(l, s);
      double demand = 0.0, supply = 0.0, endowment = 0.0;
      for (int i = 0; i < econ.I; ++i) {
        demand += alloc.a[i](h);
        endowment += econ.consumers[i].e(h);
      }
      for (int j = 0; j < econ.J; ++j) supply += alloc.b[j](h);
      const double excess = demand - supply - endowment;
      csv << l << "," << s << "," << h << "," << format_double(alloc.p(h)) << "," << format_double(demand) << ","
          << format_double(supply) << "," << format_double(endowment) << "," << format_double(excess) << ","
          << format_double(outcome.clearing_violations(h)) << "\n";
    }
  }
  return csv.str();
}

int cmd_economy(const std::string &instance, const std::string &check_only, const CommonFlags &f, std::ostream &out) {
  const auto start = std::chrono::steady_clock::now();
  const EconomyInstance econ = io::economy_from_json(io::read_file(instance));
  EconomyTolerances tol;
  tol.game = tolerances(f);

  CompetitiveOutcome outcome;
  json config;
  std::vector<std::string> inputs{instance};
  if (!check_only.empty()) {
    const Allocation alloc = io::allocation_from_json(io::read_file(check_only), econ);
    outcome = diagnose(econ, alloc, tol);
    inputs.push_back(check_only);
    config = tolerance_config(f);
    config["check_only"] = true;
  } else {
    const SolverConfig sc = solver_config(f);
    outcome = solve_competitive(econ, sc, tol);
    config = io::config_to_json(sc);
    config["check_only"] = false;
  }

  std::vector<fs::path> outputs{output_path(f, "economy_outcome.json"), output_path(f, "economy_diagnostics.csv")};
  write_text(outputs[0], io::dump(io::outcome_to_json(outcome, econ)));
  write_text(outputs[1], diagnostics_csv(econ, outcome));
  if (outcome.solve && f.trace) {
    std::ostringstream csv;
    csv << "iter,residual\n";
    for (const auto &row : outcome.solve->trace) csv << row.iter << "," << format_double(row.residual) << "\n";
    outputs.push_back(output_path(f, "economy_trace.csv"));
    write_text(outputs.back(), csv.str());
  }
  write_manifest(f, "economy", inputs, config, outputs, seconds_since(start));

  out << (outcome.equilibrium ? "equilibrium" : "not_equilibrium") << " walras_gap "
      << format_double(outcome.walras_gap) << "\n";
  if (outcome.equilibrium) return kOk;
  if (outcome.solve && !outcome.solve->converged) return kSolverFailure;
  return kNotEquilibrium;
}

int cmd_profile(const std::string &relation, int dim, double lower, double upper, int samples, const CommonFlags &f,
                std::ostream &out) {
  const auto start = std::chrono::steady_clock::now();
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "--dim must be positive");
  PreferenceMap pref;
  pref.variant = catalog_relation(relation);
  pref.ambient = ConvexBody::box(Vector::Constant(dim, lower), Vector::Constant(dim, upper));
  pref.block = Block{0, dim};
  pref.joint_dim = dim;
  const RelationProfile profile = relation_profile(pref, samples, f.seed);
  const auto path = output_path(f, "relation_profile.json");
  json doc = io::profile_to_json(profile);
  doc["relation"] = relation;
  doc["ambient"] = io::body_to_json(pref.ambient);
  write_text(path, io::dump(doc));
  json config{{"relation", relation}, {"dim", dim}, {"samples", samples}};
  write_manifest(f, "profile", {}, config, {path}, seconds_since(start));
  out << "irreflexive " << to_string(profile.irreflexive.status) << " convex " << to_string(profile.convex.status)
      << " nonsatiated " << to_string(profile.nonsatiated.status) << " lsc " << to_string(profile.lsc_sampled.status)
      << "\n";
  return kOk;
}

int cmd_coercivity(const std::string &instance, double rho, double rho_prime, int samples, const CommonFlags &f,
                   std::ostream &out) {
  const auto start = std::chrono::steady_clock::now();
  const GameInstance game = io::game_from_json(io::read_file(instance));
  const CoercivityReport report =
      check_coercivity_jointly_convex(game, rho, rho_prime, samples, f.seed, tolerances(f));
  const auto path = output_path(f, "coercivity.json");
  write_text(path, io::dump(io::coercivity_to_json(report)));
  json config = tolerance_config(f);
  config["rho"] = io::number(rho);
  config["rho_prime"] = io::number(rho_prime);
  config["samples"] = samples;
  write_manifest(f, "coercivity", {instance}, config, {path}, seconds_since(start));
  out << to_string(report.status) << "\n";
  return report.status == CoercivityReport::Status::Violated ? kNotEquilibrium : kOk;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Equilibrium solver and certifier for generalized games with non-ordered preferences", "gnep"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CommonFlags f;
  std::string instance, point, check_only, relation = "strict_greater";
  int dim = 1, samples = 64;
  double lower = 0.0, upper = 1.0, rho = 1.0, rho_prime = 2.0;

  auto *solve = app.add_subcommand("solve", "Solve the VI (jointly convex games) or QVI and certify the result");
  solve->add_option("instance", instance, "Game JSON")->required();
  solve->add_option("--mode", f.mode, "auto, vi or qvi")->capture_default_str();
  add_solver_flags(solve, f);
  add_tolerance_flags(solve, f);

  auto *verify = app.add_subcommand("verify", "Certify a candidate point");
  verify->add_option("instance", instance, "Game JSON")->required();
  verify->add_option("point", point, "Point JSON (array or {\"point\": [...]})")->required();
  add_tolerance_flags(verify, f);

  auto *oracle = app.add_subcommand("oracle", "List certified nodes of a uniform grid");
  oracle->add_option("instance", instance, "Game JSON")->required();
  oracle->add_option("--h", f.h, "Grid spacing")->capture_default_str();
  add_tolerance_flags(oracle, f);

  auto *economy = app.add_subcommand("economy", "Compute or check a competitive equilibrium");
  economy->add_option("instance", instance, "Economy JSON")->required();
  economy->add_option("--check-only", check_only, "Outcome or allocation JSON to diagnose without solving");
  add_solver_flags(economy, f);
  add_tolerance_flags(economy, f);

  auto *profile = app.add_subcommand("profile", "Sampled property profile of a catalog relation");
  profile->add_option("--relation", relation, "strict_greater, not_equal or empty")->capture_default_str();
  profile->add_option("--dim", dim, "Dimension of the choice box")->capture_default_str();
  profile->add_option("--lower", lower, "Lower bound of the choice box")->capture_default_str();
  profile->add_option("--upper", upper, "Upper bound of the choice box")->capture_default_str();
  profile->add_option("--samples", samples, "Sample count")->capture_default_str();
  add_tolerance_flags(profile, f);

  auto *coercive = app.add_subcommand("coercivity", "Sampled coercivity check for a jointly convex game");
  coercive->add_option("instance", instance, "Game JSON")->required();
  coercive->add_option("--rho", rho, "Radius outside which improvements are sought")->capture_default_str();
  coercive->add_option("--rho-prime", rho_prime, "Radius of the ball that must meet the feasible set")
      ->capture_default_str();
  coercive->add_option("--samples", samples, "Sample count")->capture_default_str();
  add_tolerance_flags(coercive, f);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageOrParse;
  }

  try {
    if (*solve) return cmd_solve(instance, f, out);
    if (*verify) return cmd_verify(instance, point, f, out);
    if (*oracle) return cmd_oracle(instance, f, out);
    if (*economy) return cmd_economy(instance, check_only, f, out);
    if (*profile) return cmd_profile(relation, dim, lower, upper, samples, f, out);
    if (*coercive) return cmd_coercivity(instance, rho, rho_prime, samples, f, out);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return exit_for(e);
  } catch (const fs::filesystem_error &e) {
    err << "error: " << e.what() << "\n";
    return kUsageOrParse;
  }
  return kUsageOrParse;
}

int run_main(int argc, char **argv) {
  std::vector<std::string> args;
  for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
  return run(args, std::cout, std::cerr);
}

} // namespace gnep::cli
