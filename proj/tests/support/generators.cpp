#include "generators.hpp"

#include "cpd/game_io.hpp"

#include <algorithm>
#include <numeric>

#ifndef CPD_FIXTURE_DIR
#error "CPD_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace cpd::testing {

std::filesystem::path fixture_path(const std::string& name) { return std::filesystem::path(CPD_FIXTURE_DIR) / name; }

InstanceGame load_fixture(const std::string& name) { return load_game(fixture_path(name)); }

std::vector<std::string> valid_fixture_names() {
    return {"geometric.json",    "risky_branch.json", "completion_flip.json",
            "viability_chain.json", "leaky.json",     "stay_withdraw.json"};
}

namespace {

std::vector<double> random_row(const RandomGameOptions& opts, std::size_t n_states, std::mt19937_64& rng) {
    const std::size_t failure = n_states - 1;
    std::vector<std::size_t> candidates(n_states - 1);
    std::iota(candidates.begin(), candidates.end(), 0);
    if (std::bernoulli_distribution(opts.failure_chance)(rng)) candidates.push_back(failure);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    const std::size_t support =
        std::uniform_int_distribution<std::size_t>(1, std::min(opts.max_support, candidates.size()))(rng);
    candidates.resize(support);

    std::vector<double> row(n_states, 0.0);
    std::vector<int> units(support, 1);
    int left = opts.grid - static_cast<int>(support);
    if (left < 0) {
        units.assign(support, 0);
        units[0] = opts.grid;
        left = 0;
    }
    std::uniform_int_distribution<std::size_t> pick(0, support - 1);
    for (int k = 0; k < left; ++k) ++units[pick(rng)];
    for (std::size_t k = 0; k < support; ++k) row[candidates[k]] = static_cast<double>(units[k]) / opts.grid;
    return row;
}

}  // namespace

GameForm random_form(const RandomGameOptions& opts, std::mt19937_64& rng) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(opts.min_states, opts.max_states)(rng);
    const std::size_t total = n + 1;
    std::vector<std::string> states;
    for (std::size_t s = 0; s < n; ++s) states.push_back("s" + std::to_string(s));
    states.push_back("dead");
    std::vector<std::string> players;
    for (std::size_t i = 0; i < opts.players; ++i) players.push_back("p" + std::to_string(i + 1));

    std::uniform_int_distribution<std::size_t> n_actions(opts.min_actions, opts.max_actions);
    std::vector<std::vector<std::vector<std::string>>> actions(total);
    for (std::size_t s = 0; s < total; ++s) {
        for (std::size_t i = 0; i < opts.players; ++i) {
            const std::size_t k = s == n ? 1 : n_actions(rng);
            std::vector<std::string> ids;
            for (std::size_t a = 0; a < k; ++a) ids.push_back(s == n ? "_" : "a" + std::to_string(a));
            actions[s].push_back(std::move(ids));
        }
    }
    std::vector<bool> failure(total, false);
    failure[n] = true;

    std::vector<std::vector<std::vector<double>>> transitions(total);
    for (std::size_t s = 0; s < total; ++s) {
        std::size_t joint = 1;
        for (const auto& a : actions[s]) joint *= a.size();
        if (s == n) {
            std::vector<double> row(total, 0.0);
            row[n] = 1.0;
            transitions[s].assign(joint, row);
            continue;
        }
        if (!opts.payoff_only_player) {
            for (std::size_t j = 0; j < joint; ++j) transitions[s].push_back(random_row(opts, total, rng));
            continue;
        }
        // Rows depend on the joint action with the payoff-only player's digit removed.
        const PlayerIndex skip = *opts.payoff_only_player;
        std::size_t stride = 1;
        for (std::size_t i = opts.players; i-- > skip + 1;) stride *= actions[s][i].size();
        const std::size_t radix = actions[s][skip].size();
        std::vector<std::vector<double>> reduced(joint / radix);
        for (auto& r : reduced) r = random_row(opts, total, rng);
        for (std::size_t j = 0; j < joint; ++j) {
            const std::size_t high = j / (stride * radix), low = j % stride;
            transitions[s].push_back(reduced[high * stride + low]);
        }
    }
    return GameForm(std::move(states), std::move(players), std::move(actions), std::move(failure),
                    std::move(transitions));
}

InstanceGame with_random_payoffs(const GameForm& form, double discount, StateIndex initial, double bound,
                                 std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-bound, bound);
    std::vector<std::vector<std::vector<double>>> payoffs(form.num_players(),
                                                          std::vector<std::vector<double>>(form.num_states()));
    for (PlayerIndex i = 0; i < form.num_players(); ++i)
        for (StateIndex s = 0; s < form.num_states(); ++s)
            if (!form.is_failure(s))
                for (JointIndex j = 0; j < form.num_joint_actions(s); ++j) payoffs[i][s].push_back(u(rng));
    return InstanceGame(form, std::move(payoffs), discount, initial);
}

InstanceGame random_game(const RandomGameOptions& opts, std::mt19937_64& rng) {
    GameForm form = random_form(opts, rng);
    return with_random_payoffs(form, opts.discount, 0, opts.payoff_bound, rng);
}

StationaryProfile random_mixed_profile(const GameForm& form, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.05, 1.0);
    StationaryProfile p;
    p.dist.resize(form.num_players());
    for (PlayerIndex i = 0; i < form.num_players(); ++i) {
        p.dist[i].resize(form.num_states());
        for (StateIndex s = 0; s < form.num_states(); ++s) {
            auto& d = p.dist[i][s];
            d.resize(form.num_actions(s, i));
            for (double& x : d) x = u(rng);
            const double total = std::accumulate(d.begin(), d.end(), 0.0);
            for (double& x : d) x /= total;
            // Renormalize the last entry so the row sums to 1 in floating point.
            d.back() = 1.0 - std::accumulate(d.begin(), d.end() - 1, 0.0);
        }
    }
    return p;
}

PureProfile random_pure_profile(const GameForm& form, std::mt19937_64& rng) {
    PureProfile p;
    p.choice.resize(form.num_players());
    for (PlayerIndex i = 0; i < form.num_players(); ++i)
        for (StateIndex s = 0; s < form.num_states(); ++s)
            p.choice[i].push_back(std::uniform_int_distribution<std::size_t>(0, form.num_actions(s, i) - 1)(rng));
    return p;
}

InstanceGame fail_at(std::size_t t) {
    // States 0..t-1 walk forward, state t loops safely when t = 0, last state is F.
    const std::size_t chain = std::max<std::size_t>(t, 1);
    const std::size_t total = chain + 1;
    std::vector<std::string> states;
    for (std::size_t s = 0; s < chain; ++s) states.push_back("s" + std::to_string(s));
    states.push_back("dead");
    std::vector<std::vector<std::vector<std::string>>> actions(total, {{"go"}});
    actions[chain] = {{"_"}};
    std::vector<bool> failure(total, false);
    failure[chain] = true;
    std::vector<std::vector<std::vector<double>>> transitions(total, {std::vector<double>(total, 0.0)});
    for (std::size_t s = 0; s < chain; ++s) transitions[s][0][t == 0 ? s : s + 1] = 1.0;
    transitions[chain][0][chain] = 1.0;
    std::vector<std::vector<std::vector<double>>> payoffs(1, std::vector<std::vector<double>>(total));
    for (std::size_t s = 0; s < chain; ++s) payoffs[0][s] = {1.0};
    return InstanceGame(GameForm(states, {"p1"}, actions, failure, transitions), payoffs, 0.5, 0);
}

}  // namespace cpd::testing
