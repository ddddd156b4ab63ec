#include "cpd/viability.hpp"

#include <deque>

namespace cpd {

std::vector<StateIndex> ViabilityKernel::states() const {
    std::vector<StateIndex> out;
    for (StateIndex s = 0; s < member.size(); ++s)
        if (member[s]) out.push_back(s);
    return out;
}

ViabilityKernel viability_kernel(const GameForm& form) {
    const std::size_t n = form.num_states();
    ViabilityKernel k;
    k.member.assign(n, false);
    for (StateIndex s = 0; s < n; ++s) k.member[s] = !form.is_failure(s);

    auto stays_inside = [&](StateIndex s, JointIndex j) {
        const auto row = form.row(s, j);
        for (StateIndex t = 0; t < n; ++t)
            if (row[t] > 0.0 && !k.member[t]) return false;
        return true;
    };

    for (bool changed = true; changed;) {
        changed = false;
        ++k.iterations;
        std::vector<bool> next = k.member;
        for (StateIndex s = 0; s < n; ++s) {
            if (!k.member[s]) continue;
            bool ok = false;
            for (JointIndex j = 0; j < form.num_joint_actions(s) && !ok; ++j) ok = stays_inside(s, j);
            if (!ok) {
                next[s] = false;
                changed = true;
            }
        }
        k.member = std::move(next);
    }

    for (StateIndex s = 0; s < n; ++s) {
        if (!k.member[s]) continue;
        for (JointIndex j = 0; j < form.num_joint_actions(s); ++j)
            if (stays_inside(s, j)) {
                k.witness[s] = j;
                break;
            }
    }
    return k;
}

bool is_viability_preserving(const GameForm& form, const StationaryProfile& profile, StateIndex s0) {
    if (s0 >= form.num_states() || form.is_failure(s0)) throw PreconditionError("initial state must be a non-failure state");
    validate_profile(form, profile);
    const auto succ = induced_support(form, profile);
    std::vector<bool> seen(form.num_states(), false);
    std::deque<StateIndex> queue{s0};
    seen[s0] = true;
    while (!queue.empty()) {
        const StateIndex s = queue.front();
        queue.pop_front();
        if (form.is_failure(s)) return false;
        for (StateIndex t : succ[s])
            if (!seen[t]) {
                seen[t] = true;
                queue.push_back(t);
            }
    }
    return true;
}

ViabilityWitness viab_profile_exists(const GameForm& form, StateIndex s0) {
    return viab_profile_exists(form, viability_kernel(form), s0);
}

ViabilityWitness viab_profile_exists(const GameForm& form, const ViabilityKernel& kernel, StateIndex s0) {
    if (s0 >= form.num_states() || form.is_failure(s0)) throw PreconditionError("initial state must be a non-failure state");
    ViabilityWitness out;
    if (!kernel.contains(s0)) return out;
    PureProfile pure;
    pure.choice.assign(form.num_players(), std::vector<ActionIndex>(form.num_states(), 0));
    for (const auto& [s, j] : kernel.witness) {
        const auto actions = form.decode_joint(s, j);
        for (PlayerIndex i = 0; i < form.num_players(); ++i) pure.choice[i][s] = actions[i];
    }
    out.exists = true;
    out.profile = pure.to_stationary(form);
    return out;
}

}  // namespace cpd
