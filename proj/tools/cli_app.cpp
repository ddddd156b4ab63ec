#include "cli_app.hpp"

#include "cpd/bankrun.hpp"
#include "cpd/equilibrium.hpp"
#include "cpd/game_io.hpp"
#include "cpd/viability.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace cpd::cli {

namespace {

using nlohmann::json;

struct RunConfig {
    std::string command;
    std::string game_path;
    std::size_t horizon = kDefaultHorizon;
    double tol = kDefaultTolerance;
    std::optional<std::uint64_t> seed;
    std::size_t runs = 100'000;
    bool runs_given = false;
    std::vector<double> penalties;
    std::vector<std::string> completions;
    std::string out;
    std::string format = "json";
    std::optional<std::size_t> profile_id;
    std::string profile_path;
    std::optional<std::size_t> other_id;
    std::string other_path;
    std::size_t player = 0;
    std::size_t cap = kDefaultEnumerationCap;
    unsigned workers = 0;

    bankrun::Params params;
    std::string strategy = "weak_run";
    int m_threshold = 1;
    double q = 0.5;
    bool q_from_simulation = false;
};

class UsageError : public Error {
 public:
    using Error::Error;
};

// Exit status for a finished command whose result signals failure.
struct Outcome {
    json result;
    int status = kExitOk;
    std::string csv;  // filled for tabular commands when --format csv
};

std::string timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

json extended(const ExtendedReal& v) {
    if (v.is_negative_infinity()) return "-inf";
    return v.value();
}

bool is_stochastic(const RunConfig& c) {
    return c.command == "bankrun-simulate" || c.command == "bankrun-knife-edge" ||
           (c.command == "evaluate" && c.runs_given);
}

bool uses_game(const std::string& command) { return command.rfind("bankrun-", 0) != 0; }

json params_json(const bankrun::Params& p) {
    return {{"N", p.N},     {"p", p.p},   {"d", p.d},   {"ell", p.ell},         {"c_w", p.c_w},
            {"c_s", p.c_s}, {"L0", p.L0}, {"T", p.T_max}, {"discount", p.discount}};
}

json config_json(const RunConfig& c) {
    json j{{"command", c.command}, {"format", c.format}, {"out", c.out}, {"tol", c.tol}};
    if (c.seed) j["seed"] = *c.seed;
    if (uses_game(c.command)) {
        j["game"] = c.game_path;
        j["horizon"] = c.horizon;
        j["cap"] = c.cap;
    }
    if (c.command == "continuation" || c.command == "evaluate" || c.command == "viability" ||
        c.command == "completion-flip") {
        if (!c.profile_path.empty()) j["profile"] = c.profile_path;
        else j["profile_id"] = c.profile_id.value_or(0);
    }
    if (c.command == "completion-flip") {
        if (!c.other_path.empty()) j["other"] = c.other_path;
        else j["other_id"] = c.other_id.value_or(1);
    }
    if (c.command == "evaluate" || c.command == "equilibria" || c.command == "penalty-sweep" ||
        c.command == "completion-flip") {
        j["completion"] = c.completions;
        j["penalties"] = c.penalties;
    }
    if (c.command == "penalty-sweep" || c.command == "completion-flip") j["player"] = c.player;
    if (is_stochastic(c)) {
        j["runs"] = c.runs;
        j["workers"] = c.workers;
    }
    if (!uses_game(c.command)) {
        j["params"] = params_json(c.params);
        if (c.command == "bankrun-simulate") j["strategy"] = c.strategy;
        if (c.command == "bankrun-knife-edge") {
            j["m"] = c.m_threshold;
            j["q_model"] = c.q_from_simulation ? json("from_simulation") : json{{"fixed", c.q}};
        }
    }
    return j;
}

StationaryProfile select_profile(const InstanceGame& game, const std::optional<std::size_t>& id,
                                 const std::string& path, std::size_t default_id) {
    const auto& form = game.form();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw UsageError("cannot open profile file " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        auto profile = profile_from_json(form, parse_json_text(ss.str()));
        validate_profile(form, profile);
        return profile;
    }
    const PureProfileSpace space(form);
    const std::size_t k = id.value_or(default_id);
    if (k >= space.size())
        throw UsageError("profile id " + std::to_string(k) + " out of range (game has " + std::to_string(space.size()) +
                         " pure profiles)");
    return space.decode(k).to_stationary(form);
}

FailureCompletion single_completion(const RunConfig& c) {
    if (c.completions.size() > 1) throw UsageError("--completion takes a single value for " + c.command);
    return c.completions.empty() ? FailureCompletion::zero() : FailureCompletion::parse(c.completions.front());
}

json tail_json(const GameForm& form, const TailCertificate& t) {
    json h = json::object();
    for (StateIndex s = 0; s < form.num_states(); ++s)
        if (!form.is_failure(s)) h[form.state_id(s)] = t.harmonic[s];
    json j{{"kind", to_string(t.kind)},
           {"survival_limit", t.survival_limit},
           {"harmonic", h},
           {"used_fallback", t.used_fallback}};
    j["rcond"] = t.rcond ? json(*t.rcond) : json(nullptr);
    return j;
}

json loss_json(const LossEstimate& l) { return {{"value", l.value}, {"lo", l.lo}, {"hi", l.hi}}; }

json pure_json(const GameForm& form, const PureProfileSpace& space, std::size_t id) {
    return {{"profile_id", id}, {"policy", profile_to_json(form, space.decode(id).to_stationary(form))["policy"]}};
}

std::string num(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

Outcome cmd_validate(const RunConfig& c) {
    std::ifstream in(c.game_path);
    if (!in) throw UsageError("cannot open game file " + c.game_path);
    std::stringstream ss;
    ss << in.rdbuf();
    const json doc = parse_json_text(ss.str());
    const GameForm form = form_from_json(doc);
    json violations = json::array();
    for (const auto& v : validate_game_form(form)) {
        json e{{"kind", to_string(v.kind)}, {"state", form.state_id(v.state)}, {"message", v.message}};
        if (v.kind == Violation::Kind::EmptyActionSet) e["player"] = form.player_id(v.player);
        else e["joint_action"] = v.joint_action;
        violations.push_back(std::move(e));
    }
    if (violations.empty()) {
        try {
            game_from_json(doc);
        } catch (const ValidationError& e) {
            violations.push_back({{"kind", "instance"}, {"message", e.what()}});
        }
    }
    Outcome o;
    o.status = violations.empty() ? kExitOk : kExitValidation;
    o.result = {{"valid", violations.empty()},
                {"violations", violations},
                {"states", form.num_states()},
                {"players", form.num_players()}};
    return o;
}

Outcome cmd_continuation(const RunConfig& c, const InstanceGame& game) {
    const auto sigma = select_profile(game, c.profile_id, c.profile_path, 0);
    const auto cp = continuation_profile(game.form(), sigma, game.initial_state(), c.horizon);
    const auto loss = continuation_loss(cp);
    Outcome o;
    o.result = {{"profile", profile_to_json(game.form(), sigma)["policy"]},
                {"survival", cp.survival},
                {"tail", tail_json(game.form(), cp.tail)},
                {"loss", loss_json(loss)}};
    std::ostringstream csv;
    csv << "n,survival\n";
    for (std::size_t n = 0; n < cp.survival.size(); ++n) csv << n + 1 << ',' << num(cp.survival[n]) << '\n';
    o.csv = csv.str();
    return o;
}

Outcome cmd_evaluate(const RunConfig& c, const InstanceGame& game) {
    const auto& form = game.form();
    const auto sigma = select_profile(game, c.profile_id, c.profile_path, 0);
    const auto completion = single_completion(c);
    const auto cp = continuation_profile(form, sigma, game.initial_state(), c.horizon);
    const auto loss = continuation_loss(cp);
    json players = json::array();
    for (PlayerIndex i = 0; i < form.num_players(); ++i) {
        const auto cv = conditional_payoff(game, sigma, i, cp.tail);
        const double U = unconditional_payoff(game, sigma, i, completion);
        json pen = json::array();
        for (double M : c.penalties) {
            const auto pv = penalty_value(U, loss, PenaltyConfig{M, completion});
            pen.push_back({{"M", M}, {"value", pv.value()}, {"lo", pv.lo()}, {"hi", pv.hi()}});
        }
        json p{{"player", form.player_id(i)},
               {"conditional", extended(cv.value)},
               {"survival_mass", cv.survival_mass},
               {"unconditional", U},
               {"penalty", pen}};
        if (c.runs_given) {
            const auto mc = mc_conditional_payoff(game, sigma, i, c.horizon, c.runs, *c.seed, c.workers);
            p["monte_carlo"] = {{"estimate", mc.no_survivors() ? json(nullptr) : json(mc.estimate)},
                                {"std_error", mc.std_error},
                                {"accepted", mc.accepted},
                                {"total", mc.total},
                                {"acceptance_rate", mc.acceptance_rate()},
                                // Runs surviving to the horizon versus P(T = infinity).
                                {"acceptance_gap", mc.acceptance_rate() - cv.survival_mass},
                                {"no_survivors", mc.no_survivors()}};
        }
        players.push_back(std::move(p));
    }
    Outcome o;
    o.result = {{"profile", profile_to_json(form, sigma)["policy"]},
                {"completion", completion.to_string()},
                {"survival", cp.survival},
                {"tail", tail_json(form, cp.tail)},
                {"loss", loss_json(loss)},
                {"players", players}};
    return o;
}

Outcome cmd_viability(const RunConfig& c, const InstanceGame& game) {
    const auto& form = game.form();
    const auto kernel = viability_kernel(form);
    json states = json::array();
    for (StateIndex s : kernel.states()) states.push_back(form.state_id(s));
    json witness = json::object();
    for (const auto& [s, j] : kernel.witness) {
        json a = json::object();
        const auto acts = form.decode_joint(s, j);
        for (PlayerIndex i = 0; i < form.num_players(); ++i) a[form.player_id(i)] = form.action_id(s, i, acts[i]);
        witness[form.state_id(s)] = a;
    }
    const auto w = viab_profile_exists(form, kernel, game.initial_state());
    Outcome o;
    o.result = {{"kernel", states},
                {"witness", witness},
                {"iterations", kernel.iterations},
                {"initial", form.state_id(game.initial_state())},
                {"initial_in_kernel", kernel.contains(game.initial_state())},
                {"viable_profile_exists", w.exists}};
    o.result["witness_profile"] = w.profile ? profile_to_json(form, *w.profile)["policy"] : json(nullptr);
    if (c.profile_id || !c.profile_path.empty()) {
        const auto sigma = select_profile(game, c.profile_id, c.profile_path, 0);
        o.result["profile"] = profile_to_json(form, sigma)["policy"];
        o.result["profile_viability_preserving"] = is_viability_preserving(form, sigma, game.initial_state());
    }
    return o;
}

Outcome cmd_equilibria(const RunConfig& c, const InstanceGame& game) {
    const auto& form = game.form();
    const auto completion = single_completion(c);
    const EquilibriumOptions opts{c.horizon, c.tol, c.cap};
    ProfileTable table(game, completion, opts);
    const auto& space = table.space();

    const auto cpd = pure_nash(table, game, EvaluationOrder::cpd(), opts);
    json eq = json::array();
    for (std::size_t id : cpd.equilibria) {
        json e = pure_json(form, space, id);
        const auto& ev = table.at(id);
        e["survival_limit"] = ev.continuation.tail.survival_limit;
        e["tail_kind"] = to_string(ev.continuation.tail.kind);
        json cond = json::object();
        for (PlayerIndex i = 0; i < form.num_players(); ++i) cond[form.player_id(i)] = extended(ev.conditional[i].value);
        e["conditional"] = cond;
        eq.push_back(std::move(e));
    }
    Outcome o;
    o.result = {{"profile_count", space.size()},
                {"cpd", {{"order", cpd.order_id},
                         {"equilibria", eq},
                         {"admissible", admissibility_filter(game, cpd.equilibria, opts)},
                         {"indeterminate", cpd.indeterminate.size()}}}};

    json per_m = json::array();
    for (double M : c.penalties) {
        const auto r = pure_nash(table, game, EvaluationOrder::penalty(M, completion), opts);
        per_m.push_back({{"M", M}, {"equilibria", r.equilibria}, {"indeterminate", r.indeterminate.size()}});
    }
    o.result["penalty"] = {{"completion", completion.to_string()}, {"steps", per_m}};
    if (c.penalties.size() >= 3) {
        const auto lim = penalty_limit_check(game, c.penalties, completion, opts);
        json vanishing = json::object();
        for (const auto& [id, M] : lim.vanishing) vanishing[std::to_string(id)] = M;
        o.result["penalty_limit"] = {{"verdict", lim.verdict},
                                     {"stable_from_M", c.penalties[lim.stable_from]},
                                     {"eventual", lim.eventual},
                                     {"violations", lim.violations},
                                     {"vanishing", vanishing},
                                     {"indeterminate", lim.indeterminate}};
    }
    return o;
}

Outcome cmd_penalty_sweep(const RunConfig& c, const InstanceGame& game) {
    if (c.penalties.empty()) throw UsageError("penalty-sweep needs --penalties");
    if (c.player >= game.form().num_players()) throw UsageError("--player out of range");
    const auto completion = single_completion(c);
    const auto sweep = penalty_sweep(game, c.player, c.penalties, completion, SweepOptions{c.horizon, c.tol, c.cap});
    json rows = json::array();
    std::ostringstream csv;
    csv << "M,profile_id,U,L_mid,L_lo,L_hi,penalty_value,rank\n";
    for (const auto& r : sweep.rows) {
        rows.push_back({{"M", r.M},
                        {"profile_id", r.profile_id},
                        {"U", r.U},
                        {"L_mid", r.L_mid},
                        {"L_lo", r.L_lo},
                        {"L_hi", r.L_hi},
                        {"penalty_value", r.penalty_value},
                        {"rank", r.rank}});
        csv << num(r.M) << ',' << r.profile_id << ',' << num(r.U) << ',' << num(r.L_mid) << ',' << num(r.L_lo) << ','
            << num(r.L_hi) << ',' << num(r.penalty_value) << ',' << r.rank << '\n';
    }
    Outcome o;
    o.result = {{"player", game.form().player_id(c.player)},
                {"completion", completion.to_string()},
                {"profile_count", sweep.profile_count},
                {"rows", rows},
                {"agrees_with_cpd", sweep.agrees_with_cpd},
                {"indeterminate_pairs", sweep.indeterminate_pairs}};
    o.result["stabilization"] = sweep.stabilization ? json(*sweep.stabilization) : json(nullptr);
    o.csv = csv.str();
    return o;
}

Outcome cmd_completion_flip(const RunConfig& c, const InstanceGame& game) {
    if (c.player >= game.form().num_players()) throw UsageError("--player out of range");
    const auto first = select_profile(game, c.profile_id, c.profile_path, 0);
    const auto second = select_profile(game, c.other_id, c.other_path, 1);
    std::vector<FailureCompletion> completions;
    for (const auto& s : c.completions) completions.push_back(FailureCompletion::parse(s));
    const auto r = completion_sensitivity(game, first, second, c.player, completions, c.tol);
    json rows = json::array();
    for (std::size_t k = 0; k < completions.size(); ++k)
        rows.push_back({{"completion", completions[k].to_string()},
                        {"first", r.first_values[k]},
                        {"second", r.second_values[k]},
                        {"ordering", to_string(r.orderings[k])}});
    Outcome o;
    o.result = {{"first", profile_to_json(game.form(), first)["policy"]},
                {"second", profile_to_json(game.form(), second)["policy"]},
                {"player", game.form().player_id(c.player)},
                {"completions", rows},
                {"flip", r.flip}};
    return o;
}

bankrun::Strategy parse_strategy(const std::string& s) {
    if (s == "weak_run") return bankrun::Strategy::weak_run();
    if (s == "everyone_stays") return bankrun::Strategy::everyone_stays();
    const std::string prefix = "all_withdraw_at:";
    if (s.rfind(prefix, 0) == 0) {
        try {
            std::size_t used = 0;
            const int t = std::stoi(s.substr(prefix.size()), &used);
            if (used == s.size() - prefix.size() && t >= 1) return bankrun::Strategy::all_withdraw_at(t);
        } catch (const std::exception&) {
        }
    }
    throw UsageError("unknown strategy '" + s + "' (weak_run, everyone_stays, all_withdraw_at:<t>)");
}

Outcome cmd_bankrun_simulate(const RunConfig& c) {
    c.params.validate();
    const auto strategy = parse_strategy(c.strategy);
    const auto s = bankrun::simulate_run(c.params, strategy, c.runs, *c.seed, c.workers);
    Outcome o;
    o.result = {{"strategy", strategy.name},
                {"runs", s.runs},
                {"failures", s.failures},
                {"survival", s.survival},
                {"failure_frequency", s.failure_frequency},
                {"failure_std_error", s.failure_std_error},
                {"mean_payoff_weak", s.mean_payoff_weak},
                {"mean_payoff_strong", s.mean_payoff_strong},
                {"weak_depositors", s.weak_depositors},
                {"strong_depositors", s.strong_depositors},
                {"accounting_violations", s.accounting_violations}};
    std::ostringstream csv;
    csv << "t,survival,failures\n";
    for (std::size_t t = 0; t < s.failures.size(); ++t) csv << t + 1 << ',' << num(s.survival[t]) << ',' << s.failures[t] << '\n';
    o.csv = csv.str();
    if (s.accounting_violations > 0) o.status = kExitAnalysis;
    return o;
}

Outcome cmd_bankrun_knife_edge(const RunConfig& c) {
    const bankrun::QModel qm{c.q_from_simulation ? bankrun::QModel::Source::FromSimulation
                                                 : bankrun::QModel::Source::Fixed,
                             c.q};
    const auto r = bankrun::knife_edge_check(c.params, qm, {c.runs, *c.seed, c.m_threshold, c.workers});
    const auto& inc = r.incentive;
    Outcome o;
    o.result = {{"status", to_string(r.status)},
                {"incentive",
                 {{"q", r.q},
                  {"q_source", r.q_source == bankrun::QModel::Source::Fixed ? "fixed" : "from_simulation"},
                  {"verdict", to_string(inc.verdict)},
                  {"withdraw_value", inc.withdraw_value},
                  {"stay_value", inc.stay_value},
                  {"margin", inc.margin},
                  {"pass", inc.verdict == bankrun::Incentive::StrictWithdraw}}}};
    if (r.simulated)
        o.result["collapse"] = {{"failure_frequency", r.failure_frequency},
                                {"std_error", r.failure_std_error},
                                {"bound", r.bound},
                                {"exact_probability", r.exact_probability},
                                {"margin", r.failure_frequency - (r.bound - 4.0 * r.failure_std_error)},
                                {"pass", r.stochastic_pass}};
    if (r.exact_checked)
        o.result["exact"] = {{"N", r.exact_N},
                             {"knife_states_checked", r.knife_states_checked},
                             {"best_responses", r.best_response_count},
                             {"q", r.exact_q},
                             {"withdraw_value", r.exact_withdraw_value},
                             {"stay_value", r.exact_stay_value},
                             {"margin", r.exact_withdraw_value - r.exact_stay_value},
                             {"pass", r.exact_pass}};
    if (r.status == bankrun::KnifeEdgeReport::Status::Fail) o.status = kExitAnalysis;
    return o;
}

Outcome dispatch(const RunConfig& c) {
    if (c.command == "validate") return cmd_validate(c);
    if (c.command == "bankrun-simulate") return cmd_bankrun_simulate(c);
    if (c.command == "bankrun-knife-edge") return cmd_bankrun_knife_edge(c);
    const InstanceGame game = load_game(c.game_path);
    if (c.command == "continuation") return cmd_continuation(c, game);
    if (c.command == "evaluate") return cmd_evaluate(c, game);
    if (c.command == "viability") return cmd_viability(c, game);
    if (c.command == "equilibria") return cmd_equilibria(c, game);
    if (c.command == "penalty-sweep") return cmd_penalty_sweep(c, game);
    if (c.command == "completion-flip") return cmd_completion_flip(c, game);
    throw UsageError("unknown command " + c.command);
}

void check_ranges(RunConfig& c) {
    if (c.horizon < 1) throw UsageError("--horizon must be at least 1");
    if (!(c.tol >= 0.0)) throw UsageError("--tol must be nonnegative");
    if (c.runs < 1) throw UsageError("--runs must be at least 1");
    if (c.m_threshold < 1) throw UsageError("--m must be at least 1");
    if (!(c.q >= 0.0 && c.q <= 1.0)) throw UsageError("--q must lie in [0,1]");
    if (c.format != "json" && c.format != "csv") throw UsageError("--format must be json or csv");
    const bool tabular = c.command == "continuation" || c.command == "penalty-sweep" || c.command == "bankrun-simulate";
    if (c.format == "csv" && !tabular) throw UsageError("--format csv is only available for tabular commands");
    if (is_stochastic(c) && !c.seed) throw UsageError("--seed is required for " + c.command);
    if (c.command == "completion-flip") {
        if (c.completions.empty()) c.completions = {"zero", "terminal:-100"};
        if (c.completions.size() < 2) throw UsageError("completion-flip needs at least two --completion values");
    } else if (c.completions.empty()) {
        c.completions = {"zero"};
    }
    if (c.profile_id && !c.profile_path.empty()) throw UsageError("give either --profile or --profile-id");
    if (c.other_id && !c.other_path.empty()) throw UsageError("give either --other or --other-id");
}

void write_artifact(const RunConfig& c, const Outcome& o, std::ostream& out) {
    std::ofstream file;
    std::ostream* sink = &out;
    if (!c.out.empty()) {
        file.open(c.out);
        if (!file) throw UsageError("cannot write " + c.out);
        sink = &file;
    }
    if (c.format == "csv") {
        *sink << "# config: " << config_json(c).dump() << '\n' << o.csv;
    } else {
        const json doc{{"config", config_json(c)}, {"result", o.result}, {"generated_at", timestamp()}};
        *sink << doc.dump(2) << '\n';
    }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    CLI::App app{"Continuation-performance analysis of games with absorbing failure", "cpd"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Expand help for every command");

    std::uint64_t seed = 0;
    auto common = [&](CLI::App* sub, bool game, bool stochastic) {
        sub->add_option("--tol", c.tol, "Tie band for comparisons")->capture_default_str();
        sub->add_option("--out", c.out, "Output path (default: stdout)");
        sub->add_option("--format", c.format, "json or csv")->capture_default_str();
        if (game) {
            sub->add_option("--game", c.game_path, "Game spec (JSON)")->required()->check(CLI::ExistingFile);
            sub->add_option("--horizon", c.horizon, "Truncation horizon")->capture_default_str();
            sub->add_option("--cap", c.cap, "Cap on enumerated pure profiles")->capture_default_str();
        }
        if (stochastic) {
            sub->add_option("--seed", seed, "Random seed (mandatory for stochastic commands)");
            sub->add_option("--runs", c.runs, "Monte Carlo runs")->capture_default_str();
            sub->add_option("--workers", c.workers, "Worker threads (0 = hardware concurrency)");
        }
    };
    auto profile_flags = [&](CLI::App* sub) {
        sub->add_option("--profile-id", c.profile_id, "Pure profile index");
        sub->add_option("--profile", c.profile_path, "Profile file (JSON)")->check(CLI::ExistingFile);
    };
    auto completion_flag = [&](CLI::App* sub) {
        sub->add_option("--completion", c.completions, "zero | absorbing:<kappa> | terminal:<phi>")->allow_extra_args(false);
    };
    auto penalties_flag = [&](CLI::App* sub) {
        sub->add_option("--penalties", c.penalties, "Comma-separated penalty weights M")->delimiter(',');
    };
    auto bankrun_flags = [&](CLI::App* sub) {
        sub->add_option("--N", c.params.N, "Depositors")->capture_default_str();
        sub->add_option("--p", c.params.p, "Weak-type probability")->capture_default_str();
        sub->add_option("--d", c.params.d, "Promised payment")->capture_default_str();
        sub->add_option("--ell", c.params.ell, "Liquidation payoff")->capture_default_str();
        sub->add_option("--cw", c.params.c_w, "Weak waiting cost")->capture_default_str();
        sub->add_option("--cs", c.params.c_s, "Strong waiting cost")->capture_default_str();
        sub->add_option("--L0", c.params.L0, "Initial reserves")->capture_default_str();
        sub->add_option("--T", c.params.T_max, "Decision periods")->capture_default_str();
        sub->add_option("--discount", c.params.discount, "Discount of the exact game")->capture_default_str();
    };

    auto* validate = app.add_subcommand("validate", "Check a game spec and list violated invariants");
    common(validate, true, false);
    auto* continuation = app.add_subcommand("continuation", "Survival vector, tail certificate and loss of a profile");
    common(continuation, true, false);
    profile_flags(continuation);
    auto* evaluate = app.add_subcommand("evaluate", "Conditional, unconditional and penalty values of a profile");
    common(evaluate, true, true);
    profile_flags(evaluate);
    completion_flag(evaluate);
    penalties_flag(evaluate);
    auto* viability = app.add_subcommand("viability", "Viability kernel and viable-profile existence");
    common(viability, true, false);
    profile_flags(viability);
    auto* equilibria = app.add_subcommand("equilibria", "Pure CPD and penalty Nash sets, penalty-limit check");
    common(equilibria, true, false);
    completion_flag(equilibria);
    penalties_flag(equilibria);
    auto* sweep = app.add_subcommand("penalty-sweep", "Rank every pure profile by U - M L across M");
    common(sweep, true, false);
    completion_flag(sweep);
    penalties_flag(sweep);
    sweep->add_option("--player", c.player, "Player index")->capture_default_str();
    auto* flip = app.add_subcommand("completion-flip", "Compare two profiles under several failure completions");
    common(flip, true, false);
    profile_flags(flip);
    flip->add_option("--other-id", c.other_id, "Second pure profile index (default 1)");
    flip->add_option("--other", c.other_path, "Second profile file (JSON)")->check(CLI::ExistingFile);
    flip->add_option("--player", c.player, "Player index")->capture_default_str();
    completion_flag(flip);
    auto* simulate = app.add_subcommand("bankrun-simulate", "Monte Carlo bank-run runs under a symmetric strategy");
    common(simulate, false, true);
    bankrun_flags(simulate);
    simulate->add_option("--strategy", c.strategy, "weak_run | everyone_stays | all_withdraw_at:<t>")
        ->capture_default_str();
    auto* knife = app.add_subcommand("bankrun-knife-edge", "Check the weak-withdrawal veto at the reserve knife edge");
    common(knife, false, true);
    bankrun_flags(knife);
    knife->add_option("--m", c.m_threshold, "Knife-edge width in units of d")->capture_default_str();
    knife->add_option("--q", c.q, "Fixed failure belief")->capture_default_str();
    knife->add_flag("--q-from-simulation", c.q_from_simulation, "Estimate q from the candidate profile");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << " (run with --help for usage)\n";
        return kExitValidation;
    }

    for (auto* sub : app.get_subcommands()) {
        c.command = sub->get_name();
        const auto given = [sub](const char* name) {
            const auto* opt = sub->get_option_no_throw(name);
            return opt != nullptr && opt->count() > 0;
        };
        if (given("--seed")) c.seed = seed;
        c.runs_given = given("--runs");
    }

    try {
        check_ranges(c);
        const Outcome o = dispatch(c);
        write_artifact(c, o, out);
        return o.status;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const Error& e) {
        err << "analysis error: " << e.what() << '\n';
        return kExitAnalysis;
    } catch (const std::exception& e) {
        err << "analysis error: " << e.what() << '\n';
        return kExitAnalysis;
    }
}

}  // namespace cpd::cli
