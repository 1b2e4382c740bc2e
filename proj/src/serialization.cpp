#include "gnep/serialization.hpp"

#include "gnep/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace gnep::io {

namespace {

[[noreturn]] void fail(const std::string &what) { throw Error(ErrorCode::ParseError, what); }

const json &field(const json &j, const char *key) {
  if (!j.is_object() || !j.contains(key)) fail(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

std::string string_field(const json &j, const char *key) {
  const json &v = field(j, key);
  if (!v.is_string()) fail(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

int int_field(const json &j, const char *key) {
  const json &v = field(j, key);
  if (!v.is_number_integer() && !v.is_number_unsigned()) fail(std::string("field \"") + key + "\" must be an integer");
  return v.get<int>();
}

void check_version(const json &j) {
  if (!j.is_object()) fail("instance must be a JSON object");
  if (!j.contains("schema_version")) return;
  const json &v = j.at("schema_version");
  if (!v.is_number_integer() || v.get<int>() != kSchemaVersion)
    fail("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
}

json bools_to_json(const std::vector<bool> &flags) {
  json out = json::array();
  for (bool f : flags) out.push_back(f);
  return out;
}

std::vector<bool> bools_from_json(const json &j, int count) {
  if (j.is_null()) return std::vector<bool>(count, false);
  if (!j.is_array()) fail("\"strict\" must be an array of booleans");
  std::vector<bool> out;
  for (const auto &v : j) {
    if (!v.is_boolean()) fail("\"strict\" must be an array of booleans");
    out.push_back(v.get<bool>());
  }
  if (static_cast<int>(out.size()) != count) fail("\"strict\" length does not match the number of rows");
  return out;
}

json optional_vector(const std::optional<Vector> &v) { return v ? vector_to_json(*v) : json(nullptr); }

json with_version(json j, const char *type) {
  j["schema_version"] = kSchemaVersion;
  j["type"] = type;
  return j;
}

json report_to_json(const PropertyReport &r) {
  json out;
  out["status"] = to_string(r.status);
  json w = json::array();
  for (const auto &v : r.witness) w.push_back(vector_to_json(v));
  out["witness"] = w;
  out["t"] = r.t ? number(*r.t) : json(nullptr);
  return out;
}

} // namespace

json parse_text(const std::string &text, const std::string &source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1, column = 1;
    for (std::size_t k = 0; k < offset; ++k) {
      if (text[k] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream msg;
    msg << source << ":" << line << ":" << column << ": malformed JSON";
    throw Error(ErrorCode::ParseError, msg.str());
  }
}

json read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

std::string dump(const json &j) { return j.dump(2) + "\n"; }

json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double to_number(const json &j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(s, &used);
    } catch (const std::exception &) {
      fail("not a number: \"" + s + "\"");
    }
    if (used != s.size()) fail("not a number: \"" + s + "\"");
    return value;
  }
  fail("expected a number");
}

json vector_to_json(const Vector &v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(number(v(k)));
  return out;
}

Vector vector_from_json(const json &j) {
  if (!j.is_array()) fail("expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = to_number(j[k]);
  return v;
}

json matrix_to_json(const Matrix &M) {
  json out = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) out.push_back(vector_to_json(M.row(r).transpose()));
  return out;
}

Matrix matrix_from_json(const json &j, int cols_if_empty) {
  if (!j.is_array()) fail("expected a row-major matrix (array of rows)");
  if (j.empty()) return Matrix(0, cols_if_empty);
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix M(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    Vector row = vector_from_json(j[r]);
    if (row.size() != cols) fail("ragged matrix rows");
    M.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return M;
}

json body_to_json(const ConvexBody &body) {
  json out;
  out["kind"] = body.kind_name();
  switch (body.kind()) {
  case ConvexBody::Kind::Box:
    out["lower"] = vector_to_json(body.lower());
    out["upper"] = vector_to_json(body.upper());
    break;
  case ConvexBody::Kind::Simplex:
    out["dim"] = body.dim();
    out["scale"] = number(body.scale());
    break;
  case ConvexBody::Kind::HPoly: {
    const auto &s = body.system();
    out["dim"] = body.dim();
    out["A"] = matrix_to_json(s.A);
    out["b"] = vector_to_json(s.b);
    out["strict"] = bools_to_json(s.strict);
    if (s.eq_rows() > 0) {
      out["A_eq"] = matrix_to_json(s.A_eq);
      out["b_eq"] = vector_to_json(s.b_eq);
    }
    break;
  }
  case ConvexBody::Kind::Ball:
    out["center"] = vector_to_json(body.center());
    out["radius"] = number(body.radius());
    break;
  case ConvexBody::Kind::Intersection: {
    json parts = json::array();
    for (const auto &p : body.parts()) parts.push_back(body_to_json(p));
    out["parts"] = parts;
    break;
  }
  }
  return out;
}

ConvexBody body_from_json(const json &j) {
  const std::string kind = string_field(j, "kind");
  if (kind == "box") return ConvexBody::box(vector_from_json(field(j, "lower")), vector_from_json(field(j, "upper")));
  if (kind == "simplex") {
    const double scale = j.contains("scale") ? to_number(j.at("scale")) : 1.0;
    return ConvexBody::simplex(int_field(j, "dim"), scale);
  }
  if (kind == "hpoly") {
    int dim = j.contains("dim") ? int_field(j, "dim") : 0;
    HalfspaceSystem s;
    s.A = matrix_from_json(field(j, "A"), dim);
    if (dim == 0) dim = static_cast<int>(s.A.cols());
    if (s.A.cols() != dim) fail("hpoly: \"A\" column count does not match \"dim\"");
    s.b = vector_from_json(field(j, "b"));
    if (s.b.size() != s.A.rows()) fail("hpoly: \"b\" length does not match \"A\"");
    s.strict = bools_from_json(j.contains("strict") ? j.at("strict") : json(nullptr), s.rows());
    s.A_eq = j.contains("A_eq") ? matrix_from_json(j.at("A_eq"), dim) : Matrix(0, dim);
    s.b_eq = j.contains("b_eq") ? vector_from_json(j.at("b_eq")) : Vector(0);
    if (s.A_eq.cols() != dim || s.b_eq.size() != s.A_eq.rows()) fail("hpoly: malformed equality rows");
    return ConvexBody::hpoly(std::move(s));
  }
  if (kind == "ball") return ConvexBody::ball(vector_from_json(field(j, "center")), to_number(field(j, "radius")));
  if (kind == "intersection") {
    std::vector<ConvexBody> parts;
    for (const auto &p : field(j, "parts")) parts.push_back(body_from_json(p));
    return ConvexBody::intersection(std::move(parts));
  }
  fail("unknown body kind \"" + kind + "\"");
}

json rows_to_json(const AffineRows &rows) {
  json out;
  out["A0"] = matrix_to_json(rows.A0);
  out["n_local"] = rows.local_dim();
  json terms = json::array();
  for (const auto &[k, M] : rows.A_terms) terms.push_back(json{{"k", k}, {"A", matrix_to_json(M)}});
  out["A_terms"] = terms;
  out["b0"] = vector_to_json(rows.b0);
  out["D"] = matrix_to_json(rows.D);
  out["strict"] = bools_to_json(rows.strict);
  return out;
}

AffineRows rows_from_json(const json &j) {
  AffineRows rows;
  const int n_local = j.contains("n_local") ? int_field(j, "n_local") : 0;
  rows.A0 = matrix_from_json(field(j, "A0"), n_local);
  rows.b0 = vector_from_json(field(j, "b0"));
  if (j.contains("A_terms")) {
    for (const auto &t : j.at("A_terms")) rows.A_terms.emplace_back(int_field(t, "k"), matrix_from_json(field(t, "A")));
  }
  rows.D = j.contains("D") ? matrix_from_json(j.at("D")) : Matrix(0, 0);
  rows.strict = bools_from_json(j.contains("strict") ? j.at("strict") : json(nullptr), rows.rows());
  return rows;
}

json preference_to_json(const PreferenceVariant &pref) {
  return std::visit(
      [](const auto &p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LinearUtility>) {
          return json{{"variant", "linear_utility"}, {"c", vector_to_json(p.c)}};
        } else if constexpr (std::is_same_v<T, ConcaveQuadUtility>) {
          return json{{"variant", "concave_quad_utility"}, {"Q", matrix_to_json(p.Q)}, {"c", vector_to_json(p.c)}};
        } else if constexpr (std::is_same_v<T, PolyhedralPreference>) {
          json out = rows_to_json(p.rows);
          out["variant"] = "parametric_polyhedral";
          return out;
        } else if constexpr (std::is_same_v<T, UnionPreference>) {
          json pieces = json::array();
          for (const auto &r : p.pieces) pieces.push_back(rows_to_json(r));
          return json{{"variant", "finite_union"}, {"pieces", pieces}};
        } else {
          const auto names = catalog_names();
          if (std::find(names.begin(), names.end(), p.name) == names.end())
            throw Error(ErrorCode::Unsupported, "relation \"" + p.name + "\" is not in the built-in catalog");
          return json{{"variant", "relation_oracle"},
                      {"relation", p.name},
                      {"sample_budget", p.sample_budget},
                      {"seed", p.seed}};
        }
      },
      pref);
}

PreferenceVariant preference_from_json(const json &j) {
  const std::string variant = string_field(j, "variant");
  if (variant == "linear_utility") return LinearUtility{vector_from_json(field(j, "c"))};
  if (variant == "concave_quad_utility") {
    Vector c = vector_from_json(field(j, "c"));
    return ConcaveQuadUtility{matrix_from_json(field(j, "Q"), static_cast<int>(c.size())), c};
  }
  if (variant == "parametric_polyhedral") return PolyhedralPreference{rows_from_json(j)};
  if (variant == "finite_union") {
    UnionPreference u;
    for (const auto &piece : field(j, "pieces")) u.pieces.push_back(rows_from_json(piece));
    return u;
  }
  if (variant == "relation_oracle") {
    RelationOracle r;
    try {
      r = catalog_relation(string_field(j, "relation"));
    } catch (const Error &e) {
      fail(e.what());
    }
    if (j.contains("sample_budget")) r.sample_budget = int_field(j, "sample_budget");
    if (j.contains("seed")) r.seed = field(j, "seed").get<std::uint64_t>();
    return r;
  }
  fail("unknown preference variant \"" + variant + "\"");
}

json constraint_to_json(const ConstraintMap &c) {
  return std::visit(
      [](const auto &k) -> json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, SharedSlice>) {
          return json{{"kind", "shared_slice"}};
        } else if constexpr (std::is_same_v<T, FixedConstraint>) {
          return json{{"kind", "fixed"}, {"body", body_to_json(k.body)}};
        } else if constexpr (std::is_same_v<T, ParametricConstraint>) {
          json out = rows_to_json(k.rows);
          out["kind"] = "parametric_polyhedral";
          return out;
        } else {
          throw Error(ErrorCode::Unsupported, "callback constraint \"" + k.name + "\" cannot be serialized");
        }
      },
      c);
}

ConstraintMap constraint_from_json(const json &j) {
  if (j.is_null()) return SharedSlice{};
  const std::string kind = string_field(j, "kind");
  if (kind == "shared_slice") return SharedSlice{};
  if (kind == "fixed") return FixedConstraint{body_from_json(field(j, "body"))};
  if (kind == "parametric_polyhedral") return ParametricConstraint{rows_from_json(j)};
  fail("unknown constraint kind \"" + kind + "\"");
}

json game_to_json(const GameInstance &game) {
  json players = json::array();
  for (const auto &p : game.players()) {
    json pj;
    pj["dim"] = p.dim();
    pj["choice_set"] = body_to_json(p.choice_set);
    pj["preference"] = preference_to_json(p.preference.variant);
    pj["constraint"] = constraint_to_json(p.constraint);
    if (!p.name.empty()) pj["name"] = p.name;
    players.push_back(pj);
  }
  json out;
  out["players"] = players;
  out["shared_set"] = game.shared_set() ? body_to_json(*game.shared_set()) : json(nullptr);
  return with_version(out, "game");
}

GameInstance game_from_json(const json &j) {
  check_version(j);
  std::vector<PlayerSpec> specs;
  std::optional<ConvexBody> shared;
  try {
    const json &players = field(j, "players");
    if (!players.is_array() || players.empty()) fail("\"players\" must be a nonempty array");
    for (const auto &pj : players) {
      PlayerSpec spec{body_from_json(field(pj, "choice_set")), preference_from_json(field(pj, "preference")),
                      constraint_from_json(pj.contains("constraint") ? pj.at("constraint") : json(nullptr)),
                      pj.contains("name") ? string_field(pj, "name") : std::string()};
      if (pj.contains("dim") && int_field(pj, "dim") != spec.choice_set.dim())
        throw Error(ErrorCode::DimensionMismatch, "player \"dim\" does not match its choice set");
      specs.push_back(std::move(spec));
    }
    if (j.contains("shared_set") && !j.at("shared_set").is_null()) shared = body_from_json(j.at("shared_set"));
  } catch (const json::exception &e) {
    fail(e.what());
  }
  return GameInstance(std::move(specs), std::move(shared));
}

json economy_to_json(const EconomyInstance &econ) {
  json out;
  out["I"] = econ.I;
  out["J"] = econ.J;
  out["L"] = econ.L;
  out["S"] = econ.S;
  json consumers = json::array();
  for (const auto &c : econ.consumers) {
    consumers.push_back(json{{"A", body_to_json(c.A)},
                             {"e", vector_to_json(c.e)},
                             {"theta", vector_to_json(c.theta)},
                             {"preference", preference_to_json(c.preference)}});
  }
  out["consumers"] = consumers;
  json producers = json::array();
  for (const auto &p : econ.producers) producers.push_back(json{{"B", body_to_json(p.B)}});
  out["producers"] = producers;
  return with_version(out, "economy");
}

EconomyInstance economy_from_json(const json &j) {
  check_version(j);
  EconomyInstance econ;
  try {
    econ.I = int_field(j, "I");
    econ.J = int_field(j, "J");
    econ.L = int_field(j, "L");
    econ.S = int_field(j, "S");
    for (const auto &cj : field(j, "consumers")) {
      EconomyInstance::Consumer c;
      c.A = body_from_json(field(cj, "A"));
      c.e = vector_from_json(field(cj, "e"));
      c.theta = cj.contains("theta") ? vector_from_json(cj.at("theta")) : Vector(0);
      c.preference = preference_from_json(field(cj, "preference"));
      econ.consumers.push_back(std::move(c));
    }
    for (const auto &pj : field(j, "producers")) econ.producers.push_back({body_from_json(field(pj, "B"))});
  } catch (const json::exception &e) {
    fail(e.what());
  }
  econ.validate();
  return econ;
}

json tolerances_to_json(const Tolerances &tol) {
  return json{{"feasibility", number(tol.feasibility)},
              {"open_margin", number(tol.open_margin)},
              {"activity", number(tol.activity)}};
}

json certificate_to_json(const EquilibriumCertificate &cert) {
  json out;
  out["point"] = vector_to_json(cert.point);
  json feas = json::array(), empt = json::array(), impr = json::array();
  for (double s : cert.feasibility_slacks) feas.push_back(number(s));
  for (double s : cert.emptiness_slacks) empt.push_back(number(s));
  for (const auto &v : cert.improving) impr.push_back(optional_vector(v));
  out["feasibility_slacks"] = feas;
  out["emptiness_slacks"] = empt;
  out["improving"] = impr;
  out["vi_residual"] = cert.vi_residual ? number(*cert.vi_residual) : json(nullptr);
  out["tolerances"] = tolerances_to_json(cert.tol);
  out["flags"] = json{{"approximate_cones", cert.approximate_cones}, {"sampled_preferences", cert.sampled_preferences}};
  out["seed"] = cert.seed;
  out["verdict"] = cert.equilibrium ? "equilibrium" : "not_equilibrium";
  return with_version(out, "certificate");
}

json config_to_json(const SolverConfig &config) {
  json out;
  out["method"] = to_string(config.method);
  out["alpha"] = number(config.alpha);
  out["selection"] = to_string(config.selection);
  out["max_iters"] = config.max_iters;
  out["residual_tol"] = number(config.residual_tol);
  out["h"] = number(config.h);
  out["seed"] = config.seed;
  out["restarts"] = config.restarts;
  out["trace"] = config.trace;
  out["start"] = optional_vector(config.start);
  out["tolerances"] = tolerances_to_json(config.tol);
  return out;
}

json solve_result_to_json(const SolveResult &result, const SolverConfig &config) {
  json out;
  out["point"] = vector_to_json(result.point);
  out["vi_residual"] = number(result.vi_residual);
  out["iterations"] = result.iterations;
  out["converged"] = result.converged;
  out["restart"] = result.restart;
  out["config"] = config_to_json(config);
  out["certificate"] = certificate_to_json(result.certificate);
  out["verdict"] = result.certificate.equilibrium ? "equilibrium" : "not_equilibrium";
  return with_version(out, "solve_result");
}

json operator_to_json(const OperatorEval &eval) {
  json blocks = json::array();
  for (std::size_t i = 0; i < eval.blocks.size(); ++i) {
    const auto &b = eval.blocks[i];
    json gens = json::array();
    for (const auto &g : b.generators) gens.push_back(vector_to_json(g));
    blocks.push_back(json{{"offset", eval.layout[i].offset},
                          {"size", eval.layout[i].size},
                          {"whole_space", b.whole_space},
                          {"approximate", b.approximate},
                          {"generators", gens}});
  }
  json out;
  out["dim"] = eval.dim;
  out["blocks"] = blocks;
  out["any_whole_space"] = eval.any_whole_space;
  out["approximate"] = eval.approximate;
  return with_version(out, "operator");
}

json allocation_to_json(const Allocation &alloc) {
  json a = json::array(), b = json::array();
  for (const auto &v : alloc.a) a.push_back(vector_to_json(v));
  for (const auto &v : alloc.b) b.push_back(vector_to_json(v));
  return json{{"a", a}, {"b", b}, {"p", vector_to_json(alloc.p)}};
}

Allocation allocation_from_json(const json &j, const EconomyInstance &econ) {
  const json &src = (j.is_object() && j.contains("allocation")) ? j.at("allocation") : j;
  Allocation alloc;
  try {
    for (const auto &v : field(src, "a")) alloc.a.push_back(vector_from_json(v));
    for (const auto &v : field(src, "b")) alloc.b.push_back(vector_from_json(v));
    alloc.p = vector_from_json(field(src, "p"));
  } catch (const json::exception &e) {
    fail(e.what());
  }
  const auto H = static_cast<Eigen::Index>(econ.H());
  bool ok = static_cast<int>(alloc.a.size()) == econ.I && static_cast<int>(alloc.b.size()) == econ.J &&
            alloc.p.size() == H;
  for (const auto &v : alloc.a) ok = ok && v.size() == H;
  for (const auto &v : alloc.b) ok = ok && v.size() == H;
  if (!ok) throw Error(ErrorCode::DimensionMismatch, "allocation does not match the economy's dimensions");
  return alloc;
}

json outcome_to_json(const CompetitiveOutcome &outcome, const EconomyInstance &econ) {
  json out;
  out["allocation"] = allocation_to_json(outcome.allocation);
  out["walras_gap"] = number(outcome.walras_gap);
  out["clearing_violations"] = vector_to_json(outcome.clearing_violations);
  json gaps = json::array(), slacks = json::array();
  for (double g : outcome.producer_profit_gaps) gaps.push_back(number(g));
  for (double s : outcome.consumer_emptiness_slacks) slacks.push_back(number(s));
  out["producer_profit_gaps"] = gaps;
  out["consumer_emptiness_slacks"] = slacks;
  out["fictitious_gap"] = number(outcome.fictitious_gap);
  out["max_feasibility_violation"] = number(outcome.max_feasibility_violation);
  out["hypotheses"] = json{{"interior_endowment", bools_to_json(outcome.hypotheses.interior_endowment)},
                           {"locally_nonsatiated", bools_to_json(outcome.hypotheses.locally_nonsatiated)}};
  out["dims"] = json{{"I", econ.I}, {"J", econ.J}, {"L", econ.L}, {"S", econ.S}};
  if (outcome.solve) {
    out["solve"] = json{{"iterations", outcome.solve->iterations},
                        {"converged", outcome.solve->converged},
                        {"restart", outcome.solve->restart},
                        {"vi_residual", number(outcome.solve->vi_residual)}};
  } else {
    out["solve"] = nullptr;
  }
  out["verdict"] = outcome.equilibrium ? "equilibrium" : "not_equilibrium";
  return with_version(out, "competitive_outcome");
}

json profile_to_json(const RelationProfile &profile) {
  json out;
  out["irreflexive"] = report_to_json(profile.irreflexive);
  out["convex"] = report_to_json(profile.convex);
  out["nonsatiated"] = report_to_json(profile.nonsatiated);
  out["lsc_sampled"] = report_to_json(profile.lsc_sampled);
  out["sample_count"] = profile.sample_count;
  out["seed"] = profile.seed;
  return with_version(out, "relation_profile");
}

json coercivity_to_json(const CoercivityReport &report) {
  json out;
  out["status"] = to_string(report.status);
  out["ball_meets_feasible"] = report.ball_meets_feasible ? json(*report.ball_meets_feasible) : json(nullptr);
  out["ball_point"] = optional_vector(report.ball_point);
  out["samples_outside"] = report.samples_outside;
  out["witness"] = optional_vector(report.witness);
  json pairs = json::array();
  for (const auto &[far, better] : report.improvements)
    pairs.push_back(json{{"far", vector_to_json(far)}, {"improving", vector_to_json(better)}});
  out["improvements"] = pairs;
  out["seed"] = report.seed;
  return with_version(out, "coercivity_report");
}

Vector point_from_json(const json &j) {
  if (j.is_array()) return vector_from_json(j);
  return vector_from_json(field(j, "point"));
}

} // namespace gnep::io
