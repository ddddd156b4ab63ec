#pragma once

// Pure stationary Nash equilibria under CPD or penalty orders.

#include "cpd/evaluation.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cpd {

class EvaluationOrder {
 public:
    enum class Kind { Cpd, Penalty };

    static EvaluationOrder cpd() { return EvaluationOrder(Kind::Cpd, 0.0, FailureCompletion::zero()); }
    static EvaluationOrder penalty(double M, const FailureCompletion& completion);

    Kind kind() const { return kind_; }
    double M() const { return M_; }
    const FailureCompletion& completion() const { return completion_; }
    std::string id() const;

 private:
    EvaluationOrder(Kind k, double M, FailureCompletion c) : kind_(k), M_(M), completion_(c) {}
    Kind kind_;
    double M_;
    FailureCompletion completion_;
};

struct EquilibriumOptions {
    std::size_t horizon = kDefaultHorizon;
    double tol = kDefaultTolerance;
    std::size_t cap = kDefaultEnumerationCap;
};

/// Everything any order needs about one pure profile.
struct ProfileEvaluation {
    ContinuationProfile continuation;
    LossEstimate loss;
    std::vector<ConditionalValue> conditional;  // per player
    std::vector<double> unconditional;          // per player, under the table's completion
};

ProfileEvaluation evaluate_profile(const InstanceGame& game, const StationaryProfile& profile,
                                   const FailureCompletion& completion, std::size_t horizon);

/// Outcome of evaluating `a` against `b` for `player` under `order`.
/// Penalty orders require the evaluations to use the order's completion.
Ordering compare_under(const EvaluationOrder& order, const ProfileEvaluation& a, const ProfileEvaluation& b,
                       PlayerIndex player, double tol);

/// Lazily filled evaluations of every pure profile of a game.
class ProfileTable {
 public:
    ProfileTable(const InstanceGame& game, FailureCompletion completion, const EquilibriumOptions& opts);

    const PureProfileSpace& space() const { return space_; }
    const FailureCompletion& completion() const { return completion_; }
    const ProfileEvaluation& at(std::size_t profile_id);

 private:
    const InstanceGame* game_;
    FailureCompletion completion_;
    EquilibriumOptions opts_;
    PureProfileSpace space_;
    std::vector<std::optional<ProfileEvaluation>> cache_;
};

struct BestResponseSet {
    /// Player policy ids (PureProfileSpace::decode_player_policy) that no other policy beats.
    std::vector<std::size_t> policy_ids;
    std::vector<std::vector<ActionIndex>> policies;
    std::size_t indeterminate = 0;
};

/// All order-maximal pure stationary policies of `player` against the other
/// players' policies in `profile` (their entries for `player` are ignored).
/// Ties are kept. Throws CapExceededError when player policies exceed the cap.
BestResponseSet best_responses(const InstanceGame& game, const PureProfile& profile, PlayerIndex player,
                               const EvaluationOrder& order, const EquilibriumOptions& opts = {});

struct DeviationOutcome {
    std::size_t policy_id;
    std::size_t profile_id;
    /// Deviation evaluated against the equilibrium profile.
    Ordering outcome;
};

struct PlayerCertificate {
    PlayerIndex player;
    std::size_t current_policy;
    std::vector<DeviationOutcome> deviations;
};

struct EquilibriumCertificate {
    std::size_t profile_id;
    std::vector<PlayerCertificate> players;
};

struct IndeterminateComparison {
    std::size_t profile_id;
    PlayerIndex player;
    std::size_t deviation_profile_id;
};

struct EquilibriumReport {
    std::string order_id;
    std::vector<std::size_t> equilibria;
    std::vector<EquilibriumCertificate> certificates;
    std::vector<IndeterminateComparison> indeterminate;
};

EquilibriumReport pure_nash(const InstanceGame& game, const EvaluationOrder& order, const EquilibriumOptions& opts = {});
EquilibriumReport pure_nash(ProfileTable& table, const InstanceGame& game, const EvaluationOrder& order,
                            const EquilibriumOptions& opts = {});

struct PenaltyLimitStep {
    double M;
    std::vector<std::size_t> equilibria;
    std::size_t indeterminate = 0;
};

struct PenaltyLimitReport {
    std::vector<PenaltyLimitStep> steps;
    std::vector<std::size_t> cpd_equilibria;
    /// Index into steps from which the penalty Nash sets stop changing.
    std::size_t stable_from = 0;
    /// Profiles in every penalty Nash set from stable_from on.
    std::vector<std::size_t> eventual;
    /// Eventual profiles missing from the CPD Nash set.
    std::vector<std::size_t> violations;
    /// Profile id -> first swept M after its last appearance.
    std::map<std::size_t, double> vanishing;
    /// Indeterminate comparisons occurred in the stable tail.
    bool indeterminate = false;
    bool verdict = false;
};

/// Throws PreconditionError unless the schedule has at least three strictly increasing values.
PenaltyLimitReport penalty_limit_check(const InstanceGame& game, const std::vector<double>& schedule,
                                       const FailureCompletion& completion, const EquilibriumOptions& opts = {});

/// Drops equilibria with survival limit < 1 when a viability-preserving profile
/// exists from the initial state; otherwise returns the input unchanged.
std::vector<std::size_t> admissibility_filter(const InstanceGame& game, const std::vector<std::size_t>& equilibria,
                                              const EquilibriumOptions& opts = {});

}  // namespace cpd
