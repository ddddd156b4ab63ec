#include "cpd/game_io.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace cpd {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& where, const std::string& what) {
    throw ParseError("field " + where + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) field_error(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) field_error(where + "/" + key, "missing");
    return *it;
}

std::vector<std::string> string_list(const json& v, const std::string& where) {
    if (!v.is_array()) field_error(where, "expected a list of strings");
    std::vector<std::string> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!v[k].is_string()) field_error(where + "/" + std::to_string(k), "expected a string");
        out.push_back(v[k].get<std::string>());
    }
    return out;
}

double number_or_decimal(const json& v, const std::string& where) {
    if (v.is_string()) return parse_probability(v.get<std::string>(), where);
    if (v.is_number()) return v.get<double>();
    field_error(where, "expected a number or decimal string");
}

std::size_t lookup(const std::vector<std::string>& ids, const std::string& id, const std::string& where,
                   const char* what) {
    for (std::size_t k = 0; k < ids.size(); ++k)
        if (ids[k] == id) return k;
    field_error(where, std::string("unknown ") + what + " '" + id + "'");
}

/// Joint index from a {player: action} map; every player must appear.
JointIndex joint_from_json(const json& v, const std::vector<std::string>& players,
                           const std::vector<std::vector<std::string>>& actions_at_state, const std::string& where) {
    if (!v.is_object()) field_error(where, "expected a map player -> action");
    if (v.size() != players.size()) field_error(where, "joint action must name every player exactly once");
    JointIndex j = 0;
    for (PlayerIndex i = 0; i < players.size(); ++i) {
        auto it = v.find(players[i]);
        if (it == v.end()) field_error(where, "missing player '" + players[i] + "'");
        if (!it->is_string()) field_error(where + "/" + players[i], "expected an action id");
        const auto a = lookup(actions_at_state[i], it->get<std::string>(), where + "/" + players[i], "action");
        j = j * actions_at_state[i].size() + a;
    }
    return j;
}

std::size_t count_significant_digits(const std::string& mantissa) {
    std::size_t count = 0;
    bool leading = true;
    for (char c : mantissa) {
        if (!std::isdigit(static_cast<unsigned char>(c))) continue;
        if (leading && c == '0') continue;
        leading = false;
        ++count;
    }
    return count;
}

std::string json_location(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
        if (text[k] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

std::string format_probability(double p) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, p);
        if (std::strtod(buf, nullptr) == p) break;
    }
    return buf;
}

double parse_probability(const std::string& text, const std::string& where) {
    std::size_t k = 0;
    if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
    const std::size_t mantissa_begin = k;
    bool digits = false, dot = false;
    for (; k < text.size(); ++k) {
        const char c = text[k];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            digits = true;
        } else if (c == '.' && !dot) {
            dot = true;
        } else {
            break;
        }
    }
    const std::string mantissa = text.substr(mantissa_begin, k - mantissa_begin);
    if (k < text.size() && (text[k] == 'e' || text[k] == 'E')) {
        ++k;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        const std::size_t exp_begin = k;
        while (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) ++k;
        if (k == exp_begin) digits = false;
    }
    if (!digits || k != text.size()) field_error(where, "malformed decimal '" + text + "'");
    if (count_significant_digits(mantissa) > 17)
        field_error(where, "decimal '" + text + "' has more than 17 significant digits");
    return std::strtod(text.c_str(), nullptr);
}

GameForm form_from_json(const json& doc) {
    if (!doc.is_object()) field_error("/", "expected a game-spec object");
    const auto states = string_list(require(doc, "states", ""), "/states");
    const auto players = string_list(require(doc, "players", ""), "/players");
    if (states.empty()) field_error("/states", "at least one state required");
    if (players.empty()) field_error("/players", "at least one player required");
    const std::size_t n = states.size();

    std::vector<bool> failure(n, false);
    if (auto it = doc.find("failure"); it != doc.end()) {
        const auto ids = string_list(*it, "/failure");
        for (std::size_t k = 0; k < ids.size(); ++k)
            failure[lookup(states, ids[k], "/failure/" + std::to_string(k), "state")] = true;
    }

    // actions[s][i]
    std::vector<std::vector<std::vector<std::string>>> actions(n);
    const json& actions_doc = require(doc, "actions", "");
    if (!actions_doc.is_object()) field_error("/actions", "expected a map state -> (player -> actions)");
    for (auto it = actions_doc.begin(); it != actions_doc.end(); ++it) {
        const auto s = lookup(states, it.key(), "/actions/" + it.key(), "state");
        if (failure[s]) field_error("/actions/" + it.key(), "failure states take no actions");
        if (!it->is_object()) field_error("/actions/" + it.key(), "expected a map player -> actions");
        actions[s].resize(players.size());
        for (auto pit = it->begin(); pit != it->end(); ++pit) {
            const std::string where = "/actions/" + it.key() + "/" + pit.key();
            const auto i = lookup(players, pit.key(), where, "player");
            actions[s][i] = string_list(*pit, where);
        }
    }
    for (StateIndex s = 0; s < n; ++s) {
        if (failure[s]) {
            actions[s].assign(players.size(), {kImplicitFailureAction});
            continue;
        }
        if (actions[s].empty()) field_error("/actions/" + states[s], "missing action sets");
        for (PlayerIndex i = 0; i < players.size(); ++i)
            if (actions[s][i].empty())
                field_error("/actions/" + states[s] + "/" + players[i], "action set missing or empty");
    }

    std::vector<std::vector<std::vector<double>>> transitions(n);
    std::vector<std::vector<bool>> seen(n);
    for (StateIndex s = 0; s < n; ++s) {
        std::size_t joint = 1;
        for (const auto& a : actions[s]) joint *= a.size();
        transitions[s].assign(joint, std::vector<double>(n, 0.0));
        seen[s].assign(joint, false);
        if (failure[s]) {
            transitions[s][0][s] = 1.0;
            seen[s][0] = true;
        }
    }
    const json& tdoc = require(doc, "transitions", "");
    if (!tdoc.is_array()) field_error("/transitions", "expected a list of records");
    for (std::size_t k = 0; k < tdoc.size(); ++k) {
        const std::string where = "/transitions/" + std::to_string(k);
        const auto& rec = tdoc[k];
        const json& sv = require(rec, "state", where);
        if (!sv.is_string()) field_error(where + "/state", "expected a state id");
        const auto s = lookup(states, sv.get<std::string>(), where + "/state", "state");
        if (failure[s]) field_error(where + "/state", "transitions of failure states are implicit");
        const auto j = joint_from_json(require(rec, "joint_action", where), players, actions[s], where + "/joint_action");
        if (seen[s][j]) field_error(where, "duplicate transition record");
        seen[s][j] = true;
        const json& dist = require(rec, "dist", where);
        if (!dist.is_object()) field_error(where + "/dist", "expected a map state -> probability");
        for (auto it = dist.begin(); it != dist.end(); ++it) {
            const auto t = lookup(states, it.key(), where + "/dist/" + it.key(), "state");
            transitions[s][j][t] = number_or_decimal(*it, where + "/dist/" + it.key());
        }
    }
    for (StateIndex s = 0; s < n; ++s)
        for (JointIndex j = 0; j < seen[s].size(); ++j)
            if (!seen[s][j])
                field_error("/transitions", "no record for state '" + states[s] + "', joint action " + std::to_string(j));

    return GameForm(states, players, std::move(actions), std::move(failure), std::move(transitions));
}

InstanceGame game_from_json(const json& doc) {
    GameForm form = form_from_json(doc);
    const auto& states = form.state_ids();
    const auto& players = form.player_ids();
    const std::size_t n = form.num_states();
    auto failure = [&form](StateIndex s) { return form.is_failure(s); };
    auto actions_at = [&form](StateIndex s) {
        std::vector<std::vector<std::string>> a(form.num_players());
        for (PlayerIndex i = 0; i < form.num_players(); ++i)
            for (ActionIndex k = 0; k < form.num_actions(s, i); ++k) a[i].push_back(form.action_id(s, i, k));
        return a;
    };

    std::vector<std::vector<std::vector<double>>> payoffs(players.size(), std::vector<std::vector<double>>(n));
    for (PlayerIndex i = 0; i < players.size(); ++i)
        for (StateIndex s = 0; s < n; ++s)
            if (!failure(s)) payoffs[i][s].assign(form.num_joint_actions(s), 0.0);
    if (auto it = doc.find("payoffs"); it != doc.end()) {
        if (!it->is_array()) field_error("/payoffs", "expected a list of records");
        for (std::size_t k = 0; k < it->size(); ++k) {
            const std::string where = "/payoffs/" + std::to_string(k);
            const auto& rec = (*it)[k];
            const json& pv = require(rec, "player", where);
            const json& sv = require(rec, "state", where);
            if (!pv.is_string() || !sv.is_string()) field_error(where, "player and state must be ids");
            const auto i = lookup(players, pv.get<std::string>(), where + "/player", "player");
            const auto s = lookup(states, sv.get<std::string>(), where + "/state", "state");
            if (failure(s))
                throw ValidationError("payoff defined on failure state " + states[s] + " (" + where + ")");
            const auto j = joint_from_json(require(rec, "joint_action", where), players, actions_at(s), where + "/joint_action");
            payoffs[i][s][j] = number_or_decimal(require(rec, "value", where), where + "/value");
        }
    }

    const json& dv = require(doc, "discount", "");
    const double discount = number_or_decimal(dv, "/discount");
    if (!(discount > 0.0 && discount < 1.0)) throw ValidationError("discount out of range (0,1)");
    const json& iv = require(doc, "initial", "");
    if (!iv.is_string()) field_error("/initial", "expected a state id");
    const auto initial = lookup(states, iv.get<std::string>(), "/initial", "state");

    return InstanceGame(std::move(form), std::move(payoffs), discount, initial);
}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("parse error at " + json_location(text, e.byte) + ": " + e.what());
    }
}

InstanceGame parse_game(const std::string& text) { return game_from_json(parse_json_text(text)); }

InstanceGame load_game(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open game file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_game(ss.str());
}

json game_to_json(const InstanceGame& game) {
    const auto& form = game.form();
    json doc;
    doc["states"] = form.state_ids();
    doc["players"] = form.player_ids();
    json failure = json::array();
    json actions = json::object();
    json transitions = json::array();
    json payoffs = json::array();
    auto joint_json = [&](StateIndex s, JointIndex j) {
        json out = json::object();
        const auto a = form.decode_joint(s, j);
        for (PlayerIndex i = 0; i < form.num_players(); ++i) out[form.player_id(i)] = form.action_id(s, i, a[i]);
        return out;
    };
    for (StateIndex s = 0; s < form.num_states(); ++s) {
        if (form.is_failure(s)) {
            failure.push_back(form.state_id(s));
            continue;
        }
        json per_player = json::object();
        for (PlayerIndex i = 0; i < form.num_players(); ++i) {
            json list = json::array();
            for (ActionIndex a = 0; a < form.num_actions(s, i); ++a) list.push_back(form.action_id(s, i, a));
            per_player[form.player_id(i)] = list;
        }
        actions[form.state_id(s)] = per_player;
        for (JointIndex j = 0; j < form.num_joint_actions(s); ++j) {
            json dist = json::object();
            const auto row = form.row(s, j);
            for (StateIndex t = 0; t < form.num_states(); ++t)
                if (row[t] != 0.0) dist[form.state_id(t)] = format_probability(row[t]);
            transitions.push_back({{"state", form.state_id(s)}, {"joint_action", joint_json(s, j)}, {"dist", dist}});
            for (PlayerIndex i = 0; i < form.num_players(); ++i) {
                const double u = game.payoff(i, s, j);
                if (u != 0.0)
                    payoffs.push_back({{"player", form.player_id(i)},
                                       {"state", form.state_id(s)},
                                       {"joint_action", joint_json(s, j)},
                                       {"value", format_probability(u)}});
            }
        }
    }
    doc["failure"] = failure;
    doc["actions"] = actions;
    doc["transitions"] = transitions;
    doc["payoffs"] = payoffs;
    doc["discount"] = format_probability(game.discount());
    doc["initial"] = form.state_id(game.initial_state());
    return doc;
}

void save_game(const InstanceGame& game, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write game file " + path.string());
    out << game_to_json(game).dump(2) << '\n';
}

StationaryProfile profile_from_json(const GameForm& form, const json& doc) {
    StationaryProfile p;
    p.dist.resize(form.num_players());
    for (PlayerIndex i = 0; i < form.num_players(); ++i) {
        p.dist[i].resize(form.num_states());
        for (StateIndex s = 0; s < form.num_states(); ++s) {
            p.dist[i][s].assign(form.num_actions(s, i), 0.0);
            p.dist[i][s][0] = 1.0;
        }
    }
    const json& policy = require(doc, "policy", "");
    if (!policy.is_object()) field_error("/policy", "expected a map player -> (state -> distribution)");
    for (auto pit = policy.begin(); pit != policy.end(); ++pit) {
        const auto i = lookup(form.player_ids(), pit.key(), "/policy/" + pit.key(), "player");
        if (!pit->is_object()) field_error("/policy/" + pit.key(), "expected a map state -> distribution");
        for (auto sit = pit->begin(); sit != pit->end(); ++sit) {
            const std::string where = "/policy/" + pit.key() + "/" + sit.key();
            const auto s = lookup(form.state_ids(), sit.key(), where, "state");
            if (form.is_failure(s)) continue;
            std::vector<double> d(form.num_actions(s, i), 0.0);
            if (sit->is_string()) {
                d[form.action_index(s, i, sit->get<std::string>())] = 1.0;
            } else if (sit->is_object()) {
                for (auto ait = sit->begin(); ait != sit->end(); ++ait) {
                    ActionIndex a = 0;
                    try {
                        a = form.action_index(s, i, ait.key());
                    } catch (const std::out_of_range& e) {
                        field_error(where + "/" + ait.key(), e.what());
                    }
                    d[a] = number_or_decimal(*ait, where + "/" + ait.key());
                }
            } else {
                field_error(where, "expected an action id or a map action -> probability");
            }
            p.dist[i][s] = std::move(d);
        }
    }
    validate_profile(form, p);
    return p;
}

json profile_to_json(const GameForm& form, const StationaryProfile& profile) {
    json policy = json::object();
    for (PlayerIndex i = 0; i < form.num_players(); ++i) {
        json per_state = json::object();
        for (StateIndex s = 0; s < form.num_states(); ++s) {
            if (form.is_failure(s)) continue;
            json d = json::object();
            for (ActionIndex a = 0; a < form.num_actions(s, i); ++a)
                if (profile.dist[i][s][a] != 0.0) d[form.action_id(s, i, a)] = format_probability(profile.dist[i][s][a]);
            per_state[form.state_id(s)] = d;
        }
        policy[form.player_id(i)] = per_state;
    }
    return json{{"policy", policy}};
}

}  // namespace cpd
