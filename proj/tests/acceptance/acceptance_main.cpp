// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include "generators.hpp"
#include "oracles.hpp"

#include "cpd/bankrun.hpp"
#include "cpd/equilibrium.hpp"
#include "cpd/viability.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace cpd;
using namespace cpd::testing;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Verdict continuation_exactness() {
    const auto start = Clock::now();
    const auto game = load_fixture("geometric.json");
    const auto sigma = PureProfile{{{0, 0}}}.to_stationary(game.form());
    const auto S = survival_vector(game.form(), sigma, game.initial_state(), 32);
    double worst = 0.0;
    for (std::size_t n = 1; n <= 32; ++n) worst = std::max(worst, std::abs(S[n - 1] - std::ldexp(1.0, -static_cast<int>(n))));
    const double elapsed = seconds_since(start);
    return {worst <= 1e-12 && elapsed < 1.0, fmt("max |S_n - 0.5^n| = %.3g over n<=32, %.3fs", worst, elapsed)};
}

Verdict loss_anchors() {
    struct Case {
        std::size_t fail_time;
        double expected;
    };
    bool ok = true;
    std::ostringstream detail;
    for (const Case c : {Case{0, 0.0}, Case{1, 1.0}, Case{2, 0.5}}) {
        const auto game = fail_at(c.fail_time);
        const auto sigma = PureProfile{{std::vector<ActionIndex>(game.form().num_states(), 0)}}.to_stationary(game.form());
        const auto L = continuation_loss(game.form(), sigma, game.initial_state());
        const bool exact = L.lo <= c.expected && c.expected <= L.hi && std::abs(L.value - c.expected) <= L.width();
        const bool narrow = L.width() <= std::ldexp(1.0, -64);
        ok = ok && exact && narrow;
        detail << (c.fail_time == 0 ? "safe" : "fail@" + std::to_string(c.fail_time)) << " L=" << L.value << " ["
               << L.lo << "," << L.hi << "] ";
    }
    return {ok, detail.str()};
}

Verdict conditional_oracle_equivalence() {
    const auto start = Clock::now();
    std::mt19937_64 rng(20240603);
    RandomGameOptions opts;
    opts.min_states = 1;
    opts.max_states = 7;
    opts.min_actions = 1;
    opts.max_actions = 3;
    opts.discount = 0.9;
    opts.payoff_bound = 1.0;
    opts.grid = 8;
    const std::size_t H = 100, R = 100'000;
    std::size_t games = 0, failures = 0, attempts = 0;
    double worst_ratio = 0.0;
    while (games < 20 && attempts < 2000) {
        ++attempts;
        opts.players = std::uniform_int_distribution<std::size_t>(1, 2)(rng);
        const auto game = random_game(opts, rng);
        const auto sigma = random_mixed_profile(game.form(), rng);
        const auto tail = classify_tail(game.form(), sigma, game.initial_state());
        if (tail.survival_limit < 0.05) continue;
        ++games;
        const auto exact = conditional_payoff(game, sigma, 0, tail);
        const auto mc = mc_conditional_payoff(game, sigma, 0, H, R, 1000 + games);
        const double allowance =
            4.0 * mc.std_error + std::pow(game.discount(), H) * game.payoff_bound() / (1.0 - game.discount());
        const double err = mc.no_survivors() ? INFINITY : std::abs(exact.value.value() - mc.estimate);
        worst_ratio = std::max(worst_ratio, err / allowance);
        if (!(err <= allowance)) ++failures;
    }
    const double elapsed = seconds_since(start);
    return {games >= 20 && failures == 0 && elapsed < 60.0,
            fmt("%zu games, %zu outside band, worst |exact-MC|/band = %.3f, %.1fs", games, failures, worst_ratio,
                elapsed)};
}

Verdict local_eu_equivalence() {
    std::mt19937_64 rng(77);
    RandomGameOptions opts;
    opts.players = 2;
    opts.min_states = 1;
    opts.max_states = 4;
    opts.min_actions = 2;
    opts.max_actions = 3;
    opts.discount = 0.9;
    opts.payoff_only_player = 1;
    std::size_t pairs = 0, agree = 0, oracle_mismatch = 0, finite = 0;
    while (pairs < 1000) {
        const auto game = random_game(opts, rng);
        const auto& form = game.form();
        const auto base = random_mixed_profile(form, rng);
        for (int k = 0; k < 10 && pairs < 1000; ++k) {
            StationaryProfile a = base, b = base;
            a.dist[1] = random_mixed_profile(form, rng).dist[1];
            b.dist[1] = random_mixed_profile(form, rng).dist[1];
            const PlayerIndex player = pairs % 2;
            const auto va = cpd_value(game, a, player);
            const auto vb = cpd_value(game, b, player);
            if (va.continuation.survival != vb.continuation.survival) continue;  // must share survival data
            ++pairs;
            const Ordering want = compare(va.performance.value, vb.performance.value, kDefaultTolerance);
            if (cpd_compare(va, vb) == want) ++agree;
            if (va.performance.value.is_finite()) {
                ++finite;
                const double oa = oracle_conditional(game, a, player);
                const double ob = oracle_conditional(game, b, player);
                if (std::abs(oa - va.performance.value.value()) > 1e-8 || std::abs(ob - vb.performance.value.value()) > 1e-8)
                    ++oracle_mismatch;
            }
        }
    }
    return {agree == pairs && oracle_mismatch == 0,
            fmt("%zu/%zu pairs agree; %zu finite pairs, %zu conditional values off the oracle", agree, pairs, finite,
                oracle_mismatch)};
}

Verdict dominance_of_continuation() {
    std::mt19937_64 rng(4242);
    RandomGameOptions opts;
    opts.min_states = 1;
    opts.max_states = 3;
    opts.min_actions = 1;
    opts.max_actions = 2;
    opts.discount = 0.5;
    opts.payoff_bound = 1.0;
    std::vector<InstanceGame> games{load_fixture("completion_flip.json")};
    for (int g = 0; g < 200; ++g) {
        opts.players = std::uniform_int_distribution<std::size_t>(1, 2)(rng);
        games.push_back(random_game(opts, rng));
    }
    std::size_t checked = 0, correct = 0, indeterminate = 0;
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (const auto& game : games) {
        const double ubar = game.payoff_bound();
        if (ubar > 1.0 || game.discount() != 0.5) continue;
        const auto& form = game.form();
        const PureProfileSpace space(form);
        std::vector<StationaryProfile> sigma;
        std::vector<LossEstimate> loss;
        for (std::size_t id = 0; id < space.size(); ++id) {
            sigma.push_back(space.decode(id).to_stationary(form));
            loss.push_back(continuation_loss(form, sigma.back(), game.initial_state()));
        }
        const std::vector<FailureCompletion> completions{FailureCompletion::zero(),
                                                         FailureCompletion::absorbing(ubar * unit(rng)),
                                                         FailureCompletion::terminal(ubar * unit(rng))};
        for (std::size_t a = 0; a < space.size(); ++a)
            for (std::size_t b = 0; b < space.size(); ++b) {
                const double gap = loss[b].lo - loss[a].hi;  // certified: a has the lower loss
                if (gap < 0.25) continue;
                const double M = dominance_threshold(ubar, game.discount(), gap) + 1.0;
                for (const auto& c : completions)
                    for (PlayerIndex i = 0; i < form.num_players(); ++i) {
                        const auto pa = penalty_value(game, sigma[a], i, PenaltyConfig{M, c});
                        const auto pb = penalty_value(game, sigma[b], i, PenaltyConfig{M, c});
                        const Ordering o = compare_penalty(pa, pb);
                        if (o == Ordering::Indeterminate) {
                            ++indeterminate;
                            continue;
                        }
                        ++checked;
                        if (o == Ordering::Greater) ++correct;
                    }
            }
    }
    return {checked > 0 && correct == checked,
            fmt("%zu/%zu determinate comparisons favour the lower-loss profile (%zu indeterminate)", correct, checked,
                indeterminate)};
}

Verdict penalty_limit_shadow() {
    const auto start = Clock::now();
    std::mt19937_64 rng(606);
    RandomGameOptions opts;
    opts.players = 2;
    opts.min_states = 1;
    opts.max_states = 2;
    opts.min_actions = 2;
    opts.max_actions = 2;
    opts.discount = 0.9;
    opts.payoff_bound = 1.0;
    const std::vector<double> schedule{0.0, 1.0, 10.0, 1e2, 1e3, 1e4};
    std::size_t determinate = 0, verdict_true = 0, indeterminate = 0, attempts = 0;
    while (determinate < 50 && attempts < 1000) {
        ++attempts;
        const auto game = random_game(opts, rng);
        const auto report = penalty_limit_check(game, schedule, FailureCompletion::zero());
        if (report.indeterminate) {
            ++indeterminate;
            continue;
        }
        ++determinate;
        if (report.verdict) ++verdict_true;
    }
    const double elapsed = seconds_since(start);
    return {determinate >= 50 && verdict_true == determinate && elapsed < 120.0,
            fmt("verdict true on %zu/%zu determinate instances (%zu indeterminate skipped), %.1fs", verdict_true,
                determinate, indeterminate, elapsed)};
}

Verdict viability_brute_force() {
    std::mt19937_64 rng(31337);
    RandomGameOptions opts;
    opts.min_states = 1;
    opts.max_states = 3;
    opts.min_actions = 1;
    opts.max_actions = 2;
    opts.max_support = 2;
    std::size_t forms = 0, agree = 0, stable = 0, in_kernel = 0;
    for (; forms < 200; ++forms) {
        opts.players = std::uniform_int_distribution<std::size_t>(1, 2)(rng);
        const auto form = random_form(opts, rng);
        const auto kernel = viability_kernel(form);
        const bool brute = oracle_viable_from(form, 0);
        in_kernel += kernel.contains(0);
        if (kernel.contains(0) == brute && viab_profile_exists(form, 0).exists == brute) ++agree;
        bool same = true;
        for (int k = 0; k < 10; ++k) {
            const auto game = with_random_payoffs(form, 0.9, 0, 5.0, rng);
            const auto again = viability_kernel(game.form());
            same = same && again.member == kernel.member && again.witness == kernel.witness;
        }
        stable += same;
    }
    return {agree == forms && stable == forms,
            fmt("%zu/%zu forms agree with exhaustive search (%zu with s0 in kernel); %zu/%zu kernels identical under "
                "10 payoff perturbations",
                agree, forms, in_kernel, stable, forms)};
}

Verdict completion_flip() {
    const auto game = load_fixture("completion_flip.json");
    const auto& form = game.form();
    const auto safe = PureProfile{{{0, 0}}}.to_stationary(form);
    const auto risky = PureProfile{{{1, 0}}}.to_stationary(form);
    const auto r = completion_sensitivity(game, safe, risky, 0,
                                          {FailureCompletion::zero(), FailureCompletion::terminal(-100.0)});
    // Closed forms: safe earns 0.1 forever; risky earns 1 then fails at T=1.
    const double safe_value = 0.1 / (1.0 - 0.5);
    const double risky_zero = 1.0, risky_terminal = 1.0 + 0.5 * -100.0;
    const bool values = std::abs(r.first_values[0] - safe_value) <= 1e-9 &&
                        std::abs(r.first_values[1] - safe_value) <= 1e-9 &&
                        std::abs(r.second_values[0] - risky_zero) <= 1e-9 &&
                        std::abs(r.second_values[1] - risky_terminal) <= 1e-9;
    const bool opposite = r.orderings[0] == Ordering::Less && r.orderings[1] == Ordering::Greater;
    return {r.flip && opposite && values,
            fmt("safe %.6g vs risky %.6g (zero) / %.6g (terminal -100): %s then %s", r.first_values[0],
                r.second_values[0], r.second_values[1], std::string(to_string(r.orderings[0])).c_str(),
                std::string(to_string(r.orderings[1])).c_str())};
}

Verdict viability_veto_exact() {
    bankrun::Params params;
    params.N = 3;
    params.p = 0.5;
    params.d = 1.0;
    params.c_w = 0.3;
    params.ell = 0.2;
    params.L0 = 1.0;
    const auto inc = bankrun::weak_withdraw_br(params, 0.5);
    const auto report = bankrun::knife_edge_check(params, {bankrun::QModel::Source::Fixed, 0.5}, {20'000, 9, 1, 0});
    const bool ok = inc.verdict == bankrun::Incentive::StrictWithdraw && std::abs(inc.stay_value - 0.30) <= 1e-12 &&
                    report.exact_checked && report.exact_pass;
    return {ok, fmt("weak_withdraw_br: %s (stay %.2f vs withdraw %.2f); N=3 exact game: %zu best responses, W at "
                    "%zu knife-edge states, V_W=%.4f V_S=%.4f",
                    std::string(to_string(inc.verdict)).c_str(), inc.stay_value, inc.withdraw_value,
                    report.best_response_count, report.knife_states_checked, report.exact_withdraw_value,
                    report.exact_stay_value)};
}

Verdict viability_veto_stochastic() {
    const auto start = Clock::now();
    bankrun::Params params;
    params.N = 4;
    params.p = 0.5;
    params.L0 = params.d;
    const auto stats = bankrun::simulate_run(params, bankrun::Strategy::weak_run(), 100'000, 2024);
    const double freq = static_cast<double>(stats.failures.front()) / stats.runs;
    const double se = std::sqrt(freq * (1.0 - freq) / stats.runs);
    const double bound = bankrun::collapse_bound(0.5, 4);
    const double elapsed = seconds_since(start);
    return {freq >= bound - 4.0 * se && stats.accounting_violations == 0 && elapsed < 30.0,
            fmt("failure frequency %.5f vs bound %.4f - 4*%.5f, %.2fs", freq, bound, se, elapsed)};
}

Verdict scale_robustness() {
    std::vector<std::pair<std::string, InstanceGame>> games;
    for (const auto& name : valid_fixture_names()) games.emplace_back(name, load_fixture(name));
    bankrun::Params small;
    small.N = 2;
    small.L0 = 1.0;
    games.emplace_back("bankrun N=2", bankrun::build_game(small, 1).game);
    std::size_t same = 0;
    std::string differing;
    for (const auto& [name, game] : games) {
        const auto scaled = affine_payoffs(game, 3.0, 7.0);
        const auto a = pure_nash(game, EvaluationOrder::cpd()).equilibria;
        const auto b = pure_nash(scaled, EvaluationOrder::cpd()).equilibria;
        const auto ka = viability_kernel(game.form());
        const auto kb = viability_kernel(scaled.form());
        if (a == b && ka.member == kb.member && ka.witness == kb.witness) ++same;
        else differing += " " + name;
    }
    return {same == games.size(), fmt("%zu/%zu fixtures keep CPD Nash set and kernel under u -> 3u+7%s", same,
                                      games.size(), differing.c_str())};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"continuation exactness", continuation_exactness},
        {"loss anchors", loss_anchors},
        {"conditional payoff vs Monte Carlo", conditional_oracle_equivalence},
        {"local expected-utility equivalence", local_eu_equivalence},
        {"dominance of continuation", dominance_of_continuation},
        {"penalty-limit equivalence", penalty_limit_shadow},
        {"viability kernel vs brute force", viability_brute_force},
        {"completion flip", completion_flip},
        {"viability veto, exact leg", viability_veto_exact},
        {"viability veto, stochastic leg", viability_veto_stochastic},
        {"scale robustness", scale_robustness},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += !v.pass;
        std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
