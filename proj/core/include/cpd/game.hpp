#pragma once

// Game-form and instance-game data model.
//
// A GameForm is the payoff-free skeleton: states, per-state action sets for
// every player, a dense transition kernel per (state, joint action) and an
// absorbing failure set. Joint actions are indexed in mixed radix with player 0
// most significant. An InstanceGame adds stage payoffs on non-failure states,
// a discount factor and an initial state.

#include "cpd/types.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace cpd {

class GameForm {
 public:
    /// `actions[s][i]` lists the action ids of player i at state s.
    /// `transitions[s][j]` is the dense row P(. | s, joint action j) over all states.
    /// Only the shape is checked here (std::invalid_argument); value invariants
    /// are reported by validate_game_form.
    GameForm(std::vector<std::string> states, std::vector<std::string> players,
             std::vector<std::vector<std::vector<std::string>>> actions, std::vector<bool> failure,
             std::vector<std::vector<std::vector<double>>> transitions);

    std::size_t num_states() const { return states_.size(); }
    std::size_t num_players() const { return players_.size(); }

    const std::string& state_id(StateIndex s) const { return states_.at(s); }
    const std::string& player_id(PlayerIndex i) const { return players_.at(i); }
    const std::string& action_id(StateIndex s, PlayerIndex i, ActionIndex a) const {
        return actions_.at(s).at(i).at(a);
    }
    const std::vector<std::string>& state_ids() const { return states_; }
    const std::vector<std::string>& player_ids() const { return players_; }

    std::size_t num_actions(StateIndex s, PlayerIndex i) const { return actions_[s][i].size(); }
    std::size_t num_joint_actions(StateIndex s) const { return transitions_[s].size(); }

    bool is_failure(StateIndex s) const { return failure_[s]; }
    const std::vector<bool>& failure_mask() const { return failure_; }
    std::vector<StateIndex> non_failure_states() const;

    /// Per-player action indices of joint action j at s.
    std::vector<ActionIndex> decode_joint(StateIndex s, JointIndex j) const;
    JointIndex encode_joint(StateIndex s, std::span<const ActionIndex> actions) const;

    std::span<const double> row(StateIndex s, JointIndex j) const { return transitions_[s][j]; }

    /// Throws std::out_of_range on unknown ids.
    StateIndex state_index(const std::string& id) const;
    PlayerIndex player_index(const std::string& id) const;
    ActionIndex action_index(StateIndex s, PlayerIndex i, const std::string& id) const;

    friend bool operator==(const GameForm&, const GameForm&) = default;

 private:
    std::vector<std::string> states_;
    std::vector<std::string> players_;
    std::vector<std::vector<std::vector<std::string>>> actions_;
    std::vector<bool> failure_;
    std::vector<std::vector<std::vector<double>>> transitions_;
};

struct Violation {
    enum class Kind { EmptyActionSet, NegativeProbability, RowSum, Absorption };
    Kind kind;
    StateIndex state;
    JointIndex joint_action;  // unused for EmptyActionSet
    PlayerIndex player;       // EmptyActionSet only
    std::string message;
};

std::string_view to_string(Violation::Kind k);

/// Row sums must be 1 within this tolerance.
inline constexpr double kStochasticTolerance = 1e-12;

/// Reports every violated invariant; an empty vector means the form is valid.
std::vector<Violation> validate_game_form(const GameForm& form);

class InstanceGame {
 public:
    /// `payoffs[i][s][j]` is u_i(s, j); rows for failure states must be empty.
    /// Throws ValidationError if the form is invalid, a payoff is attached to a
    /// failure state, the discount is outside (0,1), or the initial state fails.
    InstanceGame(GameForm form, std::vector<std::vector<std::vector<double>>> payoffs, double discount,
                 StateIndex initial_state);

    const GameForm& form() const { return form_; }
    double discount() const { return discount_; }
    StateIndex initial_state() const { return initial_; }

    double payoff(PlayerIndex i, StateIndex s, JointIndex j) const { return payoffs_[i][s][j]; }
    const std::vector<std::vector<std::vector<double>>>& payoffs() const { return payoffs_; }

    /// ū = max |u_i(s,a)| over players, non-failure states and joint actions.
    double payoff_bound() const { return payoff_bound_; }

    friend bool operator==(const InstanceGame&, const InstanceGame&) = default;

 private:
    GameForm form_;
    std::vector<std::vector<std::vector<double>>> payoffs_;
    double discount_;
    StateIndex initial_;
    double payoff_bound_ = 0.0;
};

/// Same game with every stage payoff replaced by alpha * u + beta.
InstanceGame affine_payoffs(const InstanceGame& game, double alpha, double beta);

/// Stationary Markov profile: `dist[i][s][a]` = probability player i plays a at s.
/// Entries for failure states are ignored by every analysis.
struct StationaryProfile {
    std::vector<std::vector<std::vector<double>>> dist;

    friend bool operator==(const StationaryProfile&, const StationaryProfile&) = default;
};

/// Deterministic stationary profile: `choice[i][s]` is an action index.
struct PureProfile {
    std::vector<std::vector<ActionIndex>> choice;

    StationaryProfile to_stationary(const GameForm& form) const;
    friend bool operator==(const PureProfile&, const PureProfile&) = default;
};

/// Throws ValidationError if the profile does not match the form's shape or a
/// distribution on a non-failure state does not sum to 1 within 1e-12.
void validate_profile(const GameForm& form, const StationaryProfile& profile);

/// Probability of joint action j at s under the profile (product of marginals).
double joint_probability(const GameForm& form, const StationaryProfile& profile, StateIndex s, JointIndex j);

/// Dense row-stochastic matrix of the chain induced by the profile on all states.
Eigen::MatrixXd induced_kernel(const GameForm& form, const StationaryProfile& profile);

/// Support graph of the induced chain: succ[s] lists s' with positive probability.
/// Decided from supports only (positive action weight and positive transition entry).
std::vector<std::vector<StateIndex>> induced_support(const GameForm& form, const StationaryProfile& profile);

/// Mixed-radix index space of deterministic profiles, digits ordered by
/// (player, non-failure state) with the last digit varying fastest.
class PureProfileSpace {
 public:
    explicit PureProfileSpace(const GameForm& form);

    /// Total number of pure profiles, saturating at SIZE_MAX.
    std::size_t size() const { return size_; }
    PureProfile decode(std::size_t id) const;
    std::size_t encode(const PureProfile& profile) const;

    /// Number of pure policies of player i alone.
    std::size_t player_policy_count(PlayerIndex i) const;
    /// Profile id obtained by replacing player i's policy in `id` with policy `policy_id`.
    std::size_t with_player_policy(std::size_t id, PlayerIndex i, std::size_t policy_id) const;
    /// Player i's policy index inside profile `id`.
    std::size_t player_policy_of(std::size_t id, PlayerIndex i) const;
    std::vector<ActionIndex> decode_player_policy(PlayerIndex i, std::size_t policy_id) const;

 private:
    struct Digit {
        PlayerIndex player;
        StateIndex state;
        std::size_t radix;
        std::size_t stride;
    };
    std::size_t num_players_ = 0;
    std::size_t num_states_ = 0;
    std::vector<Digit> digits_;
    std::size_t size_ = 1;
};

/// Every deterministic profile in lexicographic index order.
/// Throws CapExceededError (reporting the product size) when the count exceeds `cap`.
std::vector<PureProfile> enumerate_pure_profiles(const GameForm& form, std::size_t cap = kDefaultEnumerationCap);

}  // namespace cpd
