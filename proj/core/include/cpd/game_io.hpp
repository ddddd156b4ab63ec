#pragma once

// Game-spec documents (JSON):
//
//   {
//     "states": ["s0", "safe", "dead"], "failure": ["dead"],
//     "players": ["p1"],
//     "actions": {"s0": {"p1": ["go"]}, "safe": {"p1": ["stay"]}},
//     "transitions": [{"state": "s0", "joint_action": {"p1": "go"},
//                      "dist": {"safe": "0.5", "dead": "0.5"}}, ...],
//     "payoffs": [{"player": "p1", "state": "safe", "joint_action": {"p1": "stay"}, "value": 1}],
//     "discount": 0.5, "initial": "s0"
//   }
//
// Failure states take no `actions` entry; each player gets the implicit action
// "_" and the state is a self-loop. Probabilities are decimal strings (plain
// JSON numbers are also accepted). Payoffs not listed are zero.

#include "cpd/game.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace cpd {

/// Name of the synthesized action on failure states.
inline constexpr const char* kImplicitFailureAction = "_";

/// Throws ParseError (with line/field location) or ValidationError.
InstanceGame load_game(const std::filesystem::path& path);
InstanceGame parse_game(const std::string& text);
InstanceGame game_from_json(const nlohmann::json& doc);
/// Only the payoff-free part; value invariants are left to validate_game_form.
GameForm form_from_json(const nlohmann::json& doc);
/// Parses JSON text, reporting syntax errors with line and column.
nlohmann::json parse_json_text(const std::string& text);

nlohmann::json game_to_json(const InstanceGame& game);
void save_game(const InstanceGame& game, const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `p`.
std::string format_probability(double p);
/// Accepts up to 17 significant digits; throws ParseError otherwise.
double parse_probability(const std::string& text, const std::string& where);

/// Profile documents: {"policy": {player: {state: {action: prob}}}}.
/// States or players left out play their first action.
StationaryProfile profile_from_json(const GameForm& form, const nlohmann::json& doc);
nlohmann::json profile_to_json(const GameForm& form, const StationaryProfile& profile);

}  // namespace cpd
