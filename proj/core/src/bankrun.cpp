#include "cpd/bankrun.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <tuple>

namespace cpd::bankrun {

namespace {

constexpr int kMaxExactDepositors = 3;
constexpr std::size_t kMaxExactStates = 100'000;

bool bit(unsigned mask, int i) { return (mask >> i) & 1u; }

double waiting_cost(const Params& params, Type t) { return t == Type::Weak ? params.c_w : params.c_s; }

std::string state_name(const State& s, int N) {
    auto bits = [N](unsigned mask) {
        std::string out;
        for (int i = 0; i < N; ++i) out += bit(mask, i) ? '1' : '0';
        return out;
    };
    switch (s.kind) {
    case State::Kind::Nature: return "nature";
    case State::Kind::Closed: return "closed";
    case State::Kind::Failed: return "failed";
    case State::Kind::Matured: return "matured_r" + bits(s.remaining) + "_w" + bits(s.weak);
    case State::Kind::Active:
        return "t" + std::to_string(s.period) + "_L" + std::to_string(s.reserve) + "_r" + bits(s.remaining) + "_w" +
               bits(s.weak);
    }
    return "?";
}

}  // namespace

void Params::validate() const {
    if (N < 1) throw ValidationError("N must be at least 1");
    if (!(p > 0.0 && p <= 1.0)) throw ValidationError("weak-type probability p must lie in (0,1]");
    if (!(d > 0.0)) throw ValidationError("promised payment d must be positive");
    if (!(ell >= 0.0 && ell < d)) throw ValidationError("liquidation payoff must lie in [0, d)");
    if (!(c_s >= 0.0 && c_w > c_s)) throw ValidationError("waiting costs must satisfy c_w > c_s >= 0");
    if (!(L0 > 0.0)) throw ValidationError("initial reserves must be positive");
    if (T_max < 1) throw ValidationError("horizon T_max must be at least 1");
    if (!(discount > 0.0 && discount < 1.0)) throw ValidationError("discount out of range (0,1)");
    reserve_units();
}

long Params::reserve_units() const {
    const double ratio = L0 / d;
    const double r = std::round(ratio);
    if (!(r >= 1.0) || std::abs(ratio - r) > 1e-9 * std::max(1.0, ratio))
        throw ValidationError("reserves must be a positive integer multiple of d (L0/d = " + std::to_string(ratio) + ")");
    return static_cast<long>(r);
}

Strategy Strategy::everyone_stays() {
    return {"everyone_stays", [](Type, int, long) { return Action::Stay; }};
}

Strategy Strategy::all_withdraw_at(int period) {
    return {"all_withdraw_at_" + std::to_string(period),
            [period](Type, int t, long) { return t >= period ? Action::Withdraw : Action::Stay; }};
}

Strategy Strategy::weak_run() {
    return {"weak_run", [](Type type, int, long) { return type == Type::Weak ? Action::Withdraw : Action::Stay; }};
}

std::string_view to_string(Incentive i) {
    switch (i) {
    case Incentive::StrictWithdraw: return "strict_W";
    case Incentive::StrictStay: return "strict_S";
    case Incentive::Indifferent: return "indifferent";
    }
    return "?";
}

std::string_view to_string(KnifeEdgeReport::Status s) {
    switch (s) {
    case KnifeEdgeReport::Status::Pass: return "pass";
    case KnifeEdgeReport::Status::Fail: return "fail";
    case KnifeEdgeReport::Status::NotApplicable: return "not_applicable";
    }
    return "?";
}

WithdrawComparison weak_withdraw_br(const Params& params, double q, double tol) {
    if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("failure belief q must lie in [0,1]");
    if (!(params.d > 0.0)) throw ValidationError("promised payment d must be positive");
    if (!(params.ell >= 0.0 && params.ell < params.d)) throw ValidationError("liquidation payoff must lie in [0, d)");
    if (!(params.c_w >= 0.0)) throw ValidationError("waiting cost c_w must be nonnegative");
    WithdrawComparison out{};
    out.withdraw_value = params.d;
    out.stay_value = (1.0 - q) * (params.d - params.c_w) + q * (params.ell - params.c_w);
    out.margin = out.withdraw_value - out.stay_value;
    out.verdict = out.margin > tol ? Incentive::StrictWithdraw
                                   : (out.margin < -tol ? Incentive::StrictStay : Incentive::Indifferent);
    return out;
}

double collapse_bound(double p, int N) {
    if (!(p > 0.0 && p <= 1.0)) throw PreconditionError("p must lie in (0,1]");
    if (N < 1) throw PreconditionError("N must be at least 1");
    if (p == 1.0) return 1.0;
    return -std::expm1(N * std::log1p(-p));
}

double binomial_tail(double p, int N, long k) {
    if (k <= 0) return 1.0;
    if (k > N) return 0.0;
    double total = 0.0;
    for (long w = k; w <= N; ++w) {
        const double log_choose = std::lgamma(N + 1.0) - std::lgamma(w + 1.0) - std::lgamma(N - w + 1.0);
        const double term = (p == 1.0) ? (w == N ? 1.0 : 0.0)
                                       : std::exp(log_choose + w * std::log(p) + (N - w) * std::log1p(-p));
        total += term;
    }
    return std::min(1.0, total);
}

Game build_game(const Params& params, int m_threshold) {
    params.validate();
    if (m_threshold < 1) throw PreconditionError("m_threshold must be at least 1");
    if (params.N > kMaxExactDepositors)
        throw PreconditionError("exact bank-run game supports at most " + std::to_string(kMaxExactDepositors) +
                                " depositors (got " + std::to_string(params.N) + ")");
    const int N = params.N;
    const unsigned everyone = (1u << N) - 1u;
    const long K = params.reserve_units();

    using Key = std::tuple<int, int, long, unsigned, unsigned>;
    std::map<Key, StateIndex> index;
    std::vector<State> states;
    auto key_of = [](const State& s) {
        return Key{static_cast<int>(s.kind), s.period, s.reserve, s.remaining, s.weak};
    };
    auto intern = [&](const State& s) {
        const auto [it, inserted] = index.emplace(key_of(s), states.size());
        if (inserted) {
            states.push_back(s);
            if (states.size() > kMaxExactStates) throw PreconditionError("exact bank-run game exceeds the state cap");
        }
        return it->second;
    };
    // Successor of a non-failing period.
    auto after = [&](int period, long reserve, unsigned remaining, unsigned weak) {
        if (remaining == 0) return State{State::Kind::Closed};
        if (period < params.T_max) return State{State::Kind::Active, period + 1, reserve, remaining, weak};
        return State{State::Kind::Matured, 0, 0, remaining, weak};
    };

    struct Outcome {
        std::vector<std::pair<StateIndex, double>> dist;
        std::vector<double> payoff;  // per player
    };
    std::vector<std::vector<std::vector<std::string>>> actions;  // [s][i]
    std::vector<std::vector<Outcome>> outcomes;                   // [s][j]

    const StateIndex nature = intern(State{State::Kind::Nature});
    const StateIndex failed = intern(State{State::Kind::Failed});
    intern(State{State::Kind::Closed});

    for (StateIndex s = 0; s < states.size(); ++s) {
        const State st = states[s];
        actions.emplace_back(N, std::vector<std::string>{"-"});
        outcomes.emplace_back();
        auto& out = outcomes.back();
        switch (st.kind) {
        case State::Kind::Failed:
            out.push_back({{{s, 1.0}}, {}});
            break;
        case State::Kind::Closed:
            out.push_back({{{s, 1.0}}, std::vector<double>(N, 0.0)});
            break;
        case State::Kind::Nature: {
            Outcome o{{}, std::vector<double>(N, 0.0)};
            for (unsigned weak = 0; weak <= everyone; ++weak) {
                const int w = std::popcount(weak);
                const double prob = std::pow(params.p, w) * std::pow(1.0 - params.p, N - w);
                if (prob == 0.0) continue;
                o.dist.emplace_back(intern(State{State::Kind::Active, 1, K, everyone, weak}), prob);
            }
            out.push_back(std::move(o));
            break;
        }
        case State::Kind::Matured: {
            Outcome o{{{intern(State{State::Kind::Closed}), 1.0}}, std::vector<double>(N, 0.0)};
            for (int i = 0; i < N; ++i)
                if (bit(st.remaining, i)) o.payoff[i] = params.d;
            out.push_back(std::move(o));
            break;
        }
        case State::Kind::Active: {
            for (int i = 0; i < N; ++i)
                if (bit(st.remaining, i)) actions[s][i] = {"W", "S"};
            std::size_t joint = 1;
            for (int i = 0; i < N; ++i) joint *= actions[s][i].size();
            for (std::size_t j = 0; j < joint; ++j) {
                // Decode with player 0 most significant, as GameForm does.
                unsigned withdrawers = 0;
                std::size_t rest = j;
                for (int i = N; i-- > 0;) {
                    const std::size_t radix = actions[s][i].size();
                    if (radix == 2 && rest % radix == 0) withdrawers |= 1u << i;
                    rest /= radix;
                }
                const long m = std::popcount(withdrawers);
                const bool fails = m >= st.reserve;
                Outcome o{{}, std::vector<double>(N, 0.0)};
                for (int i = 0; i < N; ++i) {
                    if (!bit(st.remaining, i)) continue;
                    const double cost = bit(st.weak, i) ? params.c_w : params.c_s;
                    if (bit(withdrawers, i)) {
                        const double served = fails ? static_cast<double>(st.reserve) / static_cast<double>(m) : 1.0;
                        o.payoff[i] = served * params.d + (1.0 - served) * params.ell;
                    } else {
                        o.payoff[i] = -cost + (fails ? params.ell : 0.0);
                    }
                }
                if (fails) {
                    o.dist.emplace_back(failed, 1.0);
                } else {
                    o.dist.emplace_back(intern(after(st.period, st.reserve - m, st.remaining & ~withdrawers, st.weak)), 1.0);
                }
                out.push_back(std::move(o));
            }
            break;
        }
        }
    }

    const std::size_t n = states.size();
    std::vector<std::string> ids;
    std::vector<bool> failure(n, false);
    std::vector<std::vector<std::vector<double>>> transitions(n);
    std::vector<std::vector<std::vector<double>>> payoffs(N, std::vector<std::vector<double>>(n));
    for (StateIndex s = 0; s < n; ++s) {
        ids.push_back(state_name(states[s], N));
        failure[s] = states[s].kind == State::Kind::Failed;
        for (const auto& o : outcomes[s]) {
            std::vector<double> row(n, 0.0);
            for (const auto& [t, prob] : o.dist) row[t] += prob;
            transitions[s].push_back(std::move(row));
        }
        if (failure[s]) continue;
        for (int i = 0; i < N; ++i)
            for (const auto& o : outcomes[s]) payoffs[i][s].push_back(o.payoff[i]);
    }
    // Type probabilities need not sum to exactly 1 in floating point.
    {
        auto& row = transitions[nature][0];
        const double total = std::accumulate(row.begin(), row.end(), 0.0);
        for (double& x : row) x /= total;
    }
    std::vector<std::string> players;
    for (int i = 0; i < N; ++i) players.push_back("d" + std::to_string(i + 1));

    GameForm form(std::move(ids), std::move(players), std::move(actions), std::move(failure), std::move(transitions));
    Game g{InstanceGame(std::move(form), std::move(payoffs), params.discount, nature), std::move(states), {},
           m_threshold};
    for (StateIndex s = 0; s < g.states.size(); ++s) {
        const auto& st = g.states[s];
        if (st.kind == State::Kind::Active && st.reserve > 0 && st.reserve <= m_threshold)
            g.knife_edge_states.push_back(s);
    }
    return g;
}

PureProfile symmetric_profile(const Game& g, const Strategy& strategy) {
    const auto& form = g.game.form();
    PureProfile p;
    p.choice.assign(form.num_players(), std::vector<ActionIndex>(form.num_states(), 0));
    for (StateIndex s = 0; s < g.states.size(); ++s) {
        const auto& st = g.states[s];
        if (st.kind != State::Kind::Active) continue;
        for (PlayerIndex i = 0; i < form.num_players(); ++i) {
            if (!bit(st.remaining, static_cast<int>(i))) continue;
            const Type type = bit(st.weak, static_cast<int>(i)) ? Type::Weak : Type::Strong;
            p.choice[i][s] = strategy.rule(type, st.period, st.reserve) == Action::Withdraw ? 0 : 1;
        }
    }
    return p;
}

RunOutcome simulate_single_run(const Params& params, const Strategy& strategy, std::mt19937_64& rng,
                               bool forced_first) {
    const int N = params.N;
    const long K = params.reserve_units();
    RunOutcome out;
    out.types.resize(N);
    out.withdraw_period.assign(N, 0);
    out.paid.assign(N, false);
    out.payoff.assign(N, 0.0);
    std::bernoulli_distribution weak(params.p);
    for (int i = 0; i < N; ++i) out.types[i] = weak(rng) ? Type::Weak : Type::Strong;
    if (forced_first) out.types[0] = Type::Weak;

    std::vector<bool> active(N, true);
    long reserve = K;
    out.literal_reserve = K;
    std::vector<int> withdrawers;
    for (int t = 1; t <= params.T_max; ++t) {
        withdrawers.clear();
        for (int i = 0; i < N; ++i) {
            if (!active[i]) continue;
            const bool stays = forced_first && i == 0;
            if (!stays && strategy.rule(out.types[i], t, reserve) == Action::Withdraw) withdrawers.push_back(i);
        }
        const long m = static_cast<long>(withdrawers.size());
        out.literal_reserve -= m;
        for (int i : withdrawers) {
            out.withdraw_period[i] = t;
            active[i] = false;
        }
        if (m >= reserve) {
            out.failure_period = t;
            std::shuffle(withdrawers.begin(), withdrawers.end(), rng);
            for (long k = 0; k < m; ++k) {
                const int i = withdrawers[k];
                const double base = (t - 1) * waiting_cost(params, out.types[i]);
                out.paid[i] = k < reserve;
                out.payoff[i] = (out.paid[i] ? params.d : params.ell) - base;
            }
            out.paid_withdrawals += std::min(m, reserve);
            out.unpaid_withdrawals += m - std::min(m, reserve);
            for (int i = 0; i < N; ++i)
                if (active[i]) out.payoff[i] = params.ell - t * waiting_cost(params, out.types[i]);
            return out;
        }
        for (int i : withdrawers) {
            out.paid[i] = true;
            out.payoff[i] = params.d - (t - 1) * waiting_cost(params, out.types[i]);
        }
        out.paid_withdrawals += m;
        reserve -= m;
    }
    for (int i = 0; i < N; ++i)
        if (active[i]) out.payoff[i] = params.d - params.T_max * waiting_cost(params, out.types[i]);
    return out;
}

SimulationStats simulate_run(const Params& params, const Strategy& strategy, std::size_t runs, std::uint64_t seed,
                             unsigned workers) {
    if (runs == 0) throw PreconditionError("runs must be positive");
    if (!(params.p > 0.0 && params.p <= 1.0) || params.N < 1 || params.T_max < 1)
        throw ValidationError("invalid bank-run parameters");
    const long K = params.reserve_units();
    struct Partial {
        std::vector<std::size_t> failures;
        double weak_sum = 0.0, strong_sum = 0.0;
        std::size_t weak = 0, strong = 0, violations = 0;
    };
    const std::size_t chunks = (runs + kRunsPerChunk - 1) / kRunsPerChunk;
    std::vector<Partial> partial(chunks);
    parallel_chunks(chunks, workers, [&](std::size_t c) {
        Partial acc;
        acc.failures.assign(params.T_max, 0);
        const std::size_t end = std::min(runs, (c + 1) * kRunsPerChunk);
        auto rng = chunk_stream(seed, c);
        for (std::size_t run = c * kRunsPerChunk; run < end; ++run) {
            const auto o = simulate_single_run(params, strategy, rng);
            if (o.failure_period > 0) ++acc.failures[o.failure_period - 1];
            if (o.paid_withdrawals + o.literal_reserve + o.unpaid_withdrawals != K) ++acc.violations;
            for (int i = 0; i < params.N; ++i) {
                if (o.types[i] == Type::Weak) {
                    acc.weak_sum += o.payoff[i];
                    ++acc.weak;
                } else {
                    acc.strong_sum += o.payoff[i];
                    ++acc.strong;
                }
            }
        }
        partial[c] = std::move(acc);
    });

    SimulationStats s;
    s.runs = runs;
    s.seed = seed;
    s.failures.assign(params.T_max, 0);
    double weak_sum = 0.0, strong_sum = 0.0;
    for (const auto& p : partial) {
        for (int t = 0; t < params.T_max; ++t) s.failures[t] += p.failures[t];
        weak_sum += p.weak_sum;
        strong_sum += p.strong_sum;
        s.weak_depositors += p.weak;
        s.strong_depositors += p.strong;
        s.accounting_violations += p.violations;
    }
    std::size_t failed = 0;
    for (int t = 0; t < params.T_max; ++t) {
        failed += s.failures[t];
        s.survival.push_back(1.0 - static_cast<double>(failed) / static_cast<double>(runs));
    }
    s.failure_frequency = static_cast<double>(failed) / static_cast<double>(runs);
    s.failure_std_error = std::sqrt(s.failure_frequency * (1.0 - s.failure_frequency) / static_cast<double>(runs));
    s.mean_payoff_weak = s.weak_depositors ? weak_sum / s.weak_depositors : 0.0;
    s.mean_payoff_strong = s.strong_depositors ? strong_sum / s.strong_depositors : 0.0;
    return s;
}

double estimate_failure_belief(const Params& params, const Strategy& strategy, std::size_t runs, std::uint64_t seed,
                               unsigned workers) {
    if (runs == 0) throw PreconditionError("runs must be positive");
    params.reserve_units();
    const std::size_t chunks = (runs + kRunsPerChunk - 1) / kRunsPerChunk;
    std::vector<std::size_t> fails(chunks, 0);
    parallel_chunks(chunks, workers, [&](std::size_t c) {
        const std::size_t end = std::min(runs, (c + 1) * kRunsPerChunk);
        auto rng = chunk_stream(seed, c);
        for (std::size_t run = c * kRunsPerChunk; run < end; ++run) {
            if (simulate_single_run(params, strategy, rng, true).failure_period == 1) ++fails[c];
        }
    });
    return static_cast<double>(std::accumulate(fails.begin(), fails.end(), std::size_t{0})) / static_cast<double>(runs);
}

KnifeEdgeReport knife_edge_check(const Params& params, const QModel& q_model, const KnifeEdgeOptions& opts) {
    if (opts.m_threshold < 1) throw PreconditionError("m_threshold must be at least 1");
    const long K = params.reserve_units();
    if (K > opts.m_threshold)
        throw PreconditionError("reserves " + std::to_string(K) + "d are not at the knife edge (0, " +
                                std::to_string(opts.m_threshold) + "d]");
    const Strategy candidate = Strategy::weak_run();

    KnifeEdgeReport r;
    r.q_source = q_model.source;
    if (q_model.source == QModel::Source::Fixed) {
        r.q = q_model.q;
    } else {
        params.validate();
        r.q = estimate_failure_belief(params, candidate, opts.runs, opts.seed ^ 0x9e3779b97f4a7c15ULL, opts.workers);
    }
    r.incentive = weak_withdraw_br(params, r.q);
    if (r.incentive.verdict != Incentive::StrictWithdraw) {
        r.status = KnifeEdgeReport::Status::NotApplicable;
        return r;
    }
    params.validate();

    // (b) collapse frequency in the first period under the weak run.
    const auto sim = simulate_run(params, candidate, opts.runs, opts.seed, opts.workers);
    r.simulated = true;
    r.failure_frequency = static_cast<double>(sim.failures.front()) / static_cast<double>(sim.runs);
    r.failure_std_error = std::sqrt(r.failure_frequency * (1.0 - r.failure_frequency) / static_cast<double>(sim.runs));
    r.exact_probability = binomial_tail(params.p, params.N, K);
    r.bound = K == 1 ? collapse_bound(params.p, params.N) : r.exact_probability;
    r.stochastic_pass = r.failure_frequency >= r.bound - 4.0 * r.failure_std_error;

    // (c) exact best response of depositor 1 in the one-period game.
    Params small = params;
    small.N = std::min(params.N, kMaxExactDepositors);
    small.T_max = 1;
    const Game g = build_game(small, opts.m_threshold);
    const auto& form = g.game.form();
    const PureProfile cont = symmetric_profile(g, candidate);
    const auto br = best_responses(g.game, cont, 0, EvaluationOrder::penalty(0.0, FailureCompletion::zero()));
    r.exact_checked = true;
    r.exact_N = small.N;
    r.best_response_count = br.policy_ids.size();
    r.exact_q = binomial_tail(params.p, small.N - 1, K);

    const auto reachable = induced_support(form, cont.to_stationary(form));
    std::vector<bool> seen(form.num_states(), false);
    std::deque<StateIndex> queue{g.game.initial_state()};
    seen[g.game.initial_state()] = true;
    while (!queue.empty()) {
        const StateIndex s = queue.front();
        queue.pop_front();
        for (StateIndex t : reachable[s])
            if (!seen[t]) {
                seen[t] = true;
                queue.push_back(t);
            }
    }

    bool all_withdraw = !br.policies.empty();
    double type_mass = 0.0;
    for (StateIndex s : g.knife_edge_states) {
        const auto& st = g.states[s];
        if (!seen[s] || !bit(st.remaining, 0) || !bit(st.weak, 0)) continue;
        ++r.knife_states_checked;
        for (const auto& policy : br.policies) all_withdraw = all_withdraw && policy[s] == 0;

        // Depositor 1's value from this state when withdrawing vs staying.
        const int others_weak = std::popcount(st.weak & ~1u);
        const double weight = std::pow(small.p, others_weak) * std::pow(1.0 - small.p, small.N - 1 - others_weak);
        type_mass += weight;
        for (ActionIndex a : {ActionIndex{0}, ActionIndex{1}}) {
            PureProfile dev = cont;
            dev.choice[0][s] = a;
            const InstanceGame from_here(form, g.game.payoffs(), g.game.discount(), s);
            const double v = unconditional_payoff(from_here, dev.to_stationary(form), 0, FailureCompletion::zero());
            (a == 0 ? r.exact_withdraw_value : r.exact_stay_value) += weight * v;
        }
    }
    if (type_mass > 0.0) {
        r.exact_withdraw_value /= type_mass;
        r.exact_stay_value /= type_mass;
    }
    r.exact_pass = all_withdraw && r.knife_states_checked > 0 && r.exact_withdraw_value > r.exact_stay_value;

    r.status = (r.stochastic_pass && r.exact_pass) ? KnifeEdgeReport::Status::Pass : KnifeEdgeReport::Status::Fail;
    return r;
}

}  // namespace cpd::bankrun
