#pragma once

// Payoff-free viability analysis. Everything here is decided on supports
// (graph algorithms); no probability is compared against a threshold.

#include "cpd/game.hpp"

#include <map>
#include <optional>
#include <vector>

namespace cpd {

struct ViabilityKernel {
    /// Membership flag per state (always false on F).
    std::vector<bool> member;
    /// Witness joint action for each kernel state.
    std::map<StateIndex, JointIndex> witness;
    /// Shrinking iterations until the fixed point was reached.
    std::size_t iterations = 0;

    bool contains(StateIndex s) const { return member.at(s); }
    std::vector<StateIndex> states() const;
    bool empty() const { return witness.empty(); }
};

/// Greatest fixed point of V -> {s not in F : some joint action keeps supp P(.|s,a) inside V}.
/// The witness is the smallest such joint-action index.
ViabilityKernel viability_kernel(const GameForm& form);

/// True iff F is unreachable from s0 in the support graph of the induced chain.
bool is_viability_preserving(const GameForm& form, const StationaryProfile& profile, StateIndex s0);

struct ViabilityWitness {
    bool exists = false;
    /// Kernel states play their witness joint action; all others play action 0.
    std::optional<StationaryProfile> profile;
};

ViabilityWitness viab_profile_exists(const GameForm& form, StateIndex s0);
ViabilityWitness viab_profile_exists(const GameForm& form, const ViabilityKernel& kernel, StateIndex s0);

}  // namespace cpd
