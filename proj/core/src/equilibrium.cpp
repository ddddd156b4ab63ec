#include "cpd/equilibrium.hpp"

#include "cpd/viability.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace cpd {

EvaluationOrder EvaluationOrder::penalty(double M, const FailureCompletion& completion) {
    if (!(std::isfinite(M) && M >= 0.0)) throw ValidationError("penalty weight M must be finite and nonnegative");
    return EvaluationOrder(Kind::Penalty, M, completion);
}

std::string EvaluationOrder::id() const {
    if (kind_ == Kind::Cpd) return "cpd";
    std::ostringstream os;
    os.precision(17);
    os << "penalty(M=" << M_ << ",completion=" << completion_.to_string() << ")";
    return os.str();
}

ProfileEvaluation evaluate_profile(const InstanceGame& game, const StationaryProfile& profile,
                                   const FailureCompletion& completion, std::size_t horizon) {
    ProfileEvaluation e;
    e.continuation = continuation_profile(game.form(), profile, game.initial_state(), horizon);
    e.loss = continuation_loss(e.continuation);
    for (PlayerIndex i = 0; i < game.form().num_players(); ++i) {
        e.conditional.push_back(conditional_payoff(game, profile, i, e.continuation.tail));
        e.unconditional.push_back(unconditional_payoff(game, profile, i, completion));
    }
    return e;
}

Ordering compare_under(const EvaluationOrder& order, const ProfileEvaluation& a, const ProfileEvaluation& b,
                       PlayerIndex player, double tol) {
    if (order.kind() == EvaluationOrder::Kind::Cpd) {
        const Ordering first = lex_compare_continuation(a.continuation, b.continuation, tol);
        if (first != Ordering::Equal) return first;
        return compare(a.conditional[player].value, b.conditional[player].value, tol);
    }
    const PenaltyConfig cfg{order.M(), order.completion()};
    return compare_penalty(penalty_value(a.unconditional[player], a.loss, cfg),
                           penalty_value(b.unconditional[player], b.loss, cfg), tol);
}

ProfileTable::ProfileTable(const InstanceGame& game, FailureCompletion completion, const EquilibriumOptions& opts)
    : game_(&game), completion_(completion), opts_(opts), space_(game.form()) {
    if (space_.size() > opts.cap) throw CapExceededError(space_.size(), opts.cap);
    cache_.resize(space_.size());
}

const ProfileEvaluation& ProfileTable::at(std::size_t profile_id) {
    auto& slot = cache_.at(profile_id);
    if (!slot)
        slot = evaluate_profile(*game_, space_.decode(profile_id).to_stationary(game_->form()), completion_,
                                opts_.horizon);
    return *slot;
}

BestResponseSet best_responses(const InstanceGame& game, const PureProfile& profile, PlayerIndex player,
                               const EvaluationOrder& order, const EquilibriumOptions& opts) {
    const auto& form = game.form();
    if (player >= form.num_players()) throw PreconditionError("player index out of range");
    const PureProfileSpace space(form);
    const std::size_t count = space.player_policy_count(player);
    if (count > opts.cap) throw CapExceededError(count, opts.cap);

    std::vector<ProfileEvaluation> evals;
    evals.reserve(count);
    PureProfile candidate = profile;
    for (std::size_t p = 0; p < count; ++p) {
        candidate.choice.at(player) = space.decode_player_policy(player, p);
        evals.push_back(evaluate_profile(game, candidate.to_stationary(form), order.completion(), opts.horizon));
    }
    BestResponseSet out;
    for (std::size_t p = 0; p < count; ++p) {
        bool beaten = false;
        for (std::size_t q = 0; q < count && !beaten; ++q) {
            if (q == p) continue;
            const Ordering o = compare_under(order, evals[q], evals[p], player, opts.tol);
            if (o == Ordering::Indeterminate) ++out.indeterminate;
            beaten = o == Ordering::Greater;
        }
        if (!beaten) {
            out.policy_ids.push_back(p);
            out.policies.push_back(space.decode_player_policy(player, p));
        }
    }
    return out;
}

EquilibriumReport pure_nash(const InstanceGame& game, const EvaluationOrder& order, const EquilibriumOptions& opts) {
    ProfileTable table(game, order.completion(), opts);
    return pure_nash(table, game, order, opts);
}

EquilibriumReport pure_nash(ProfileTable& table, const InstanceGame& game, const EvaluationOrder& order,
                            const EquilibriumOptions& opts) {
    if (order.kind() == EvaluationOrder::Kind::Penalty && !(table.completion() == order.completion()))
        throw PreconditionError("profile table completion does not match the penalty order");
    const auto& space = table.space();
    const std::size_t players = game.form().num_players();
    EquilibriumReport report;
    report.order_id = order.id();
    for (std::size_t id = 0; id < space.size(); ++id) {
        EquilibriumCertificate cert{id, {}};
        bool equilibrium = true;
        for (PlayerIndex i = 0; i < players && equilibrium; ++i) {
            PlayerCertificate pc{i, space.player_policy_of(id, i), {}};
            const std::size_t count = space.player_policy_count(i);
            for (std::size_t p = 0; p < count; ++p) {
                if (p == pc.current_policy) continue;
                const std::size_t dev = space.with_player_policy(id, i, p);
                const Ordering o = compare_under(order, table.at(dev), table.at(id), i, opts.tol);
                if (o == Ordering::Indeterminate) report.indeterminate.push_back({id, i, dev});
                if (o == Ordering::Greater) {
                    equilibrium = false;
                    break;
                }
                pc.deviations.push_back({p, dev, o});
            }
            cert.players.push_back(std::move(pc));
        }
        if (equilibrium) {
            report.equilibria.push_back(id);
            report.certificates.push_back(std::move(cert));
        }
    }
    return report;
}

PenaltyLimitReport penalty_limit_check(const InstanceGame& game, const std::vector<double>& schedule,
                                       const FailureCompletion& completion, const EquilibriumOptions& opts) {
    if (schedule.size() < 3) throw PreconditionError("penalty schedule needs at least three values");
    for (std::size_t k = 1; k < schedule.size(); ++k)
        if (!(schedule[k] > schedule[k - 1])) throw PreconditionError("penalty schedule must be strictly increasing");

    ProfileTable table(game, completion, opts);
    PenaltyLimitReport report;
    report.cpd_equilibria = pure_nash(table, game, EvaluationOrder::cpd(), opts).equilibria;
    for (double M : schedule) {
        const auto r = pure_nash(table, game, EvaluationOrder::penalty(M, completion), opts);
        report.steps.push_back({M, r.equilibria, r.indeterminate.size()});
    }

    const std::size_t last = report.steps.size() - 1;
    report.stable_from = last;
    while (report.stable_from > 0 &&
           report.steps[report.stable_from - 1].equilibria == report.steps[last].equilibria)
        --report.stable_from;
    report.eventual = report.steps[last].equilibria;
    for (std::size_t k = report.stable_from; k <= last; ++k)
        report.indeterminate = report.indeterminate || report.steps[k].indeterminate > 0;

    const std::set<std::size_t> cpd_set(report.cpd_equilibria.begin(), report.cpd_equilibria.end());
    for (std::size_t id : report.eventual)
        if (!cpd_set.contains(id)) report.violations.push_back(id);
    report.verdict = report.violations.empty();

    const std::set<std::size_t> eventual(report.eventual.begin(), report.eventual.end());
    for (std::size_t k = 0; k < last; ++k)
        for (std::size_t id : report.steps[k].equilibria)
            if (!eventual.contains(id)) report.vanishing[id] = schedule[k + 1];
    return report;
}

std::vector<std::size_t> admissibility_filter(const InstanceGame& game, const std::vector<std::size_t>& equilibria,
                                              const EquilibriumOptions& opts) {
    const auto& form = game.form();
    if (!viab_profile_exists(form, game.initial_state()).exists) return equilibria;
    const PureProfileSpace space(form);
    if (space.size() > opts.cap) throw CapExceededError(space.size(), opts.cap);
    std::vector<std::size_t> kept;
    for (std::size_t id : equilibria) {
        const auto tail = classify_tail(form, space.decode(id).to_stationary(form), game.initial_state());
        if (tail.kind == TailKind::AlmostSureSurvival) kept.push_back(id);
    }
    return kept;
}

}  // namespace cpd
