#include "cpd/bankrun.hpp"
#include "cpd/equilibrium.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace cpd;

namespace {

// n non-failure states in a ring; each of two actions either advances or
// leaks to the failure state with a state-dependent probability.
InstanceGame ring_game(std::size_t n, std::size_t players) {
    std::vector<std::string> states;
    for (std::size_t s = 0; s < n; ++s) states.push_back("s" + std::to_string(s));
    states.push_back("dead");
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < players; ++i) ids.push_back("p" + std::to_string(i));

    std::size_t joint = 1;
    for (std::size_t i = 0; i < players; ++i) joint *= 2;
    std::vector<std::vector<std::vector<std::string>>> actions(n + 1);
    std::vector<std::vector<std::vector<double>>> rows(n + 1);
    std::vector<std::vector<std::vector<double>>> payoffs(players, std::vector<std::vector<double>>(n + 1));
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t s = 0; s < n; ++s) {
        actions[s].assign(players, {"a", "b"});
        for (std::size_t j = 0; j < joint; ++j) {
            std::vector<double> row(n + 1, 0.0);
            const double leak = j == 0 ? 0.0 : 0.05 * static_cast<double>(j) / static_cast<double>(joint);
            row[(s + 1) % n] = 1.0 - leak;
            row[n] += leak;
            rows[s].push_back(row);
            for (auto& p : payoffs) p[s].push_back(u(rng));
        }
    }
    actions[n].assign(players, {"_"});
    std::vector<double> absorb(n + 1, 0.0);
    absorb[n] = 1.0;
    rows[n].push_back(absorb);
    std::vector<bool> failure(n + 1, false);
    failure[n] = true;
    return InstanceGame(GameForm(states, ids, actions, failure, rows), payoffs, 0.9, 0);
}

StationaryProfile uniform_profile(const GameForm& form) {
    StationaryProfile sigma;
    sigma.dist.resize(form.num_players());
    for (PlayerIndex i = 0; i < form.num_players(); ++i)
        for (StateIndex s = 0; s < form.num_states(); ++s) {
            const auto k = form.num_actions(s, i);
            sigma.dist[i].emplace_back(k, 1.0 / static_cast<double>(k));
        }
    return sigma;
}

void BM_SurvivalVector(benchmark::State& state) {
    const auto game = ring_game(static_cast<std::size_t>(state.range(0)), 2);
    const auto sigma = uniform_profile(game.form());
    for (auto _ : state) benchmark::DoNotOptimize(survival_vector(game.form(), sigma, 0, 256));
}
BENCHMARK(BM_SurvivalVector)->Arg(8)->Arg(64)->Arg(256);

void BM_ClassifyTail(benchmark::State& state) {
    const auto game = ring_game(static_cast<std::size_t>(state.range(0)), 2);
    const auto sigma = uniform_profile(game.form());
    for (auto _ : state) benchmark::DoNotOptimize(classify_tail(game.form(), sigma, 0));
}
BENCHMARK(BM_ClassifyTail)->Arg(8)->Arg(64)->Arg(256);

void BM_PureNashCpd(benchmark::State& state) {
    const auto game = ring_game(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(pure_nash(game, EvaluationOrder::cpd()));
}
BENCHMARK(BM_PureNashCpd)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_McConditionalPayoff(benchmark::State& state) {
    const auto game = ring_game(8, 2);
    const auto sigma = uniform_profile(game.form());
    const auto runs = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(mc_conditional_payoff(game, sigma, 0, 50, runs, 7, 1));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * runs));
}
BENCHMARK(BM_McConditionalPayoff)->Arg(10'000)->Unit(benchmark::kMillisecond);

void BM_BankrunSimulate(benchmark::State& state) {
    bankrun::Params p;
    p.N = static_cast<int>(state.range(0));
    p.L0 = 1.0;
    const auto runs = std::size_t{20'000};
    for (auto _ : state) benchmark::DoNotOptimize(bankrun::simulate_run(p, bankrun::Strategy::weak_run(), runs, 3, 1));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * runs));
}
BENCHMARK(BM_BankrunSimulate)->Arg(4)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
