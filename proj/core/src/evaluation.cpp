#include "cpd/evaluation.hpp"

#include <cmath>

namespace cpd {

CpdValue cpd_value(const InstanceGame& game, const StationaryProfile& profile, PlayerIndex player, std::size_t horizon) {
    CpdValue v;
    v.continuation = continuation_profile(game.form(), profile, game.initial_state(), horizon);
    v.performance = conditional_payoff(game, profile, player, v.continuation.tail);
    return v;
}

Ordering cpd_compare(const CpdValue& a, const CpdValue& b, double tol) {
    return cpd_compare(ContinuationOrderCriterion{}, a, b, tol);
}

Ordering cpd_compare(const TailCriterion& criterion, const CpdValue& a, const CpdValue& b, double tol) {
    const Ordering first = criterion.compare(a.continuation, b.continuation, tol);
    if (first != Ordering::Equal) return first;
    return compare(a.performance.value, b.performance.value, tol);
}

PenaltyValue penalty_value(double unconditional, const LossEstimate& loss, const PenaltyConfig& cfg) {
    if (!(std::isfinite(cfg.M) && cfg.M >= 0.0)) throw ValidationError("penalty weight M must be finite and nonnegative");
    return PenaltyValue{unconditional, loss, cfg.M, cfg.completion};
}

PenaltyValue penalty_value(const InstanceGame& game, const StationaryProfile& profile, PlayerIndex player,
                           const PenaltyConfig& cfg, std::size_t horizon) {
    const double U = unconditional_payoff(game, profile, player, cfg.completion);
    const auto L = continuation_loss(game.form(), profile, game.initial_state(), horizon);
    return penalty_value(U, L, cfg);
}

Ordering compare_penalty(const PenaltyValue& a, const PenaltyValue& b, double tol) {
    const double diff = a.value() - b.value();
    const double spread = 0.5 * ((a.hi() - a.lo()) + (b.hi() - b.lo()));
    if (diff - spread > tol) return Ordering::Greater;
    if (diff + spread < -tol) return Ordering::Less;
    if (std::abs(diff) + spread <= tol) return Ordering::Equal;
    return Ordering::Indeterminate;
}

double dominance_threshold(double payoff_bound, double discount, double loss_gap) {
    if (!(loss_gap > 0.0)) throw PreconditionError("loss gap must be positive");
    if (!(discount > 0.0 && discount < 1.0)) throw PreconditionError("discount out of range (0,1)");
    if (!(payoff_bound >= 0.0)) throw PreconditionError("payoff bound must be nonnegative");
    return 2.0 * payoff_bound / ((1.0 - discount) * loss_gap);
}

PenaltySweep penalty_sweep(const InstanceGame& game, PlayerIndex player, const std::vector<double>& M_values,
                           const FailureCompletion& completion, const SweepOptions& opts) {
    if (M_values.empty()) throw PreconditionError("penalty sweep needs at least one M");
    for (std::size_t k = 0; k < M_values.size(); ++k) {
        if (!(std::isfinite(M_values[k]) && M_values[k] >= 0.0))
            throw ValidationError("penalty weights must be finite and nonnegative");
        if (k > 0 && !(M_values[k] > M_values[k - 1])) throw PreconditionError("penalty weights must be strictly increasing");
    }
    const auto& form = game.form();
    const PureProfileSpace space(form);
    if (space.size() > opts.cap) throw CapExceededError(space.size(), opts.cap);
    const std::size_t n = space.size();

    std::vector<ContinuationProfile> cont(n);
    std::vector<LossEstimate> loss(n);
    std::vector<double> U(n);
    for (std::size_t id = 0; id < n; ++id) {
        const auto sigma = space.decode(id).to_stationary(form);
        cont[id] = continuation_profile(form, sigma, game.initial_state(), opts.horizon);
        loss[id] = continuation_loss(cont[id]);
        U[id] = unconditional_payoff(game, sigma, player, completion);
    }
    // Lex continuation ordering of every distinct pair, fixed across M.
    std::vector<Ordering> lex(n * n, Ordering::Equal);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            lex[a * n + b] = lex_compare_continuation(cont[a], cont[b], opts.tol);
            lex[b * n + a] = reverse(lex[a * n + b]);
        }

    PenaltySweep out;
    out.M_values = M_values;
    out.completion = completion;
    out.profile_count = n;
    for (double M : M_values) {
        std::vector<PenaltyValue> pv(n);
        for (std::size_t id = 0; id < n; ++id) pv[id] = penalty_value(U[id], loss[id], PenaltyConfig{M, completion});
        std::vector<std::size_t> ahead(n, 0);
        bool agrees = true;
        std::size_t indeterminate = 0;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) {
                const Ordering o = compare_penalty(pv[a], pv[b], opts.tol);
                if (o == Ordering::Greater) ++ahead[b];
                if (o == Ordering::Less) ++ahead[a];
                const Ordering want = lex[a * n + b];
                if (want == Ordering::Equal) continue;
                if (o == Ordering::Indeterminate) ++indeterminate;
                if (o != want) agrees = false;
            }
        for (std::size_t id = 0; id < n; ++id)
            out.rows.push_back({id, M, U[id], loss[id].value, loss[id].lo, loss[id].hi, pv[id].value(), ahead[id] + 1});
        out.agrees_with_cpd.push_back(agrees);
        out.indeterminate_pairs.push_back(indeterminate);
    }
    for (std::size_t k = M_values.size(); k-- > 0;) {
        if (!out.agrees_with_cpd[k]) break;
        out.stabilization = M_values[k];
    }
    return out;
}

CompletionSensitivity completion_sensitivity(const InstanceGame& game, const StationaryProfile& first,
                                             const StationaryProfile& second, PlayerIndex player,
                                             const std::vector<FailureCompletion>& completions, double tol) {
    if (completions.size() < 2) throw PreconditionError("completion sensitivity needs at least two completions");
    CompletionSensitivity out;
    out.completions = completions;
    for (const auto& c : completions) {
        const double a = unconditional_payoff(game, first, player, c);
        const double b = unconditional_payoff(game, second, player, c);
        out.first_values.push_back(a);
        out.second_values.push_back(b);
        out.orderings.push_back(compare(a, b, tol));
    }
    for (const Ordering o : out.orderings) out.flip = out.flip || o != out.orderings.front();
    return out;
}

}  // namespace cpd
