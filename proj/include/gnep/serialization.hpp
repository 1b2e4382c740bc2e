#pragma once

#include "gnep/economy.hpp"
#include "gnep/game.hpp"
#include "gnep/normal_operator.hpp"
#include "gnep/preferences.hpp"
#include "gnep/solvers.hpp"

#include <json.hpp>

#include <string>

namespace gnep::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Parses JSON text; syntax errors become ParseError with line and column.
json parse_text(const std::string &text, const std::string &source = "<input>");
/// Reads and parses a file (ParseError when unreadable).
json read_file(const std::string &path);
/// Pretty-printed with a trailing newline. Doubles print at round-trip precision.
std::string dump(const json &j);

json number(double v);
double to_number(const json &j);
json vector_to_json(const Vector &v);
Vector vector_from_json(const json &j);
json matrix_to_json(const Matrix &M);
Matrix matrix_from_json(const json &j, int cols_if_empty = 0);

json body_to_json(const ConvexBody &body);
ConvexBody body_from_json(const json &j);

json rows_to_json(const AffineRows &rows);
AffineRows rows_from_json(const json &j);

/// Relation oracles serialize by catalog name only.
json preference_to_json(const PreferenceVariant &pref);
PreferenceVariant preference_from_json(const json &j);

/// Callback constraints are not serializable (Unsupported).
json constraint_to_json(const ConstraintMap &c);
ConstraintMap constraint_from_json(const json &j);

json game_to_json(const GameInstance &game);
GameInstance game_from_json(const json &j);

json economy_to_json(const EconomyInstance &econ);
EconomyInstance economy_from_json(const json &j);

json tolerances_to_json(const Tolerances &tol);
json certificate_to_json(const EquilibriumCertificate &cert);
json config_to_json(const SolverConfig &config);
json solve_result_to_json(const SolveResult &result, const SolverConfig &config);
json operator_to_json(const OperatorEval &eval);
json outcome_to_json(const CompetitiveOutcome &outcome, const EconomyInstance &econ);
json profile_to_json(const RelationProfile &profile);
json coercivity_to_json(const CoercivityReport &report);

/// {"a": [[...]], "b": [[...]], "p": [...]}, optionally nested under "allocation".
Allocation allocation_from_json(const json &j, const EconomyInstance &econ);
json allocation_to_json(const Allocation &alloc);

/// A bare array or {"point": [...]}.
Vector point_from_json(const json &j);

} // namespace gnep::io
