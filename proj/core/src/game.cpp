#include "cpd/game.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cpd {

namespace {

std::size_t saturating_mul(std::size_t a, std::size_t b) {
    if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) return std::numeric_limits<std::size_t>::max();
    return a * b;
}

}  // namespace

GameForm::GameForm(std::vector<std::string> states, std::vector<std::string> players,
                   std::vector<std::vector<std::vector<std::string>>> actions, std::vector<bool> failure,
                   std::vector<std::vector<std::vector<double>>> transitions)
    : states_(std::move(states)),
      players_(std::move(players)),
      actions_(std::move(actions)),
      failure_(std::move(failure)),
      transitions_(std::move(transitions)) {
    const std::size_t n = states_.size();
    if (n == 0) throw std::invalid_argument("game form needs at least one state");
    if (players_.empty()) throw std::invalid_argument("game form needs at least one player");
    if (actions_.size() != n || failure_.size() != n || transitions_.size() != n)
        throw std::invalid_argument("per-state tables must have one entry per state");
    for (StateIndex s = 0; s < n; ++s) {
        if (actions_[s].size() != players_.size())
            throw std::invalid_argument("state " + states_[s] + ": action table needs one entry per player");
        std::size_t joint = 1;
        for (const auto& a : actions_[s]) joint = saturating_mul(joint, a.size());
        if (transitions_[s].size() != joint)
            throw std::invalid_argument("state " + states_[s] + ": expected " + std::to_string(joint) +
                                        " transition rows, got " + std::to_string(transitions_[s].size()));
        for (const auto& row : transitions_[s])
            if (row.size() != n)
                throw std::invalid_argument("state " + states_[s] + ": transition row has wrong length");
    }
}

std::vector<StateIndex> GameForm::non_failure_states() const {
    std::vector<StateIndex> out;
    for (StateIndex s = 0; s < num_states(); ++s)
        if (!failure_[s]) out.push_back(s);
    return out;
}

std::vector<ActionIndex> GameForm::decode_joint(StateIndex s, JointIndex j) const {
    std::vector<ActionIndex> out(num_players());
    for (std::size_t k = num_players(); k-- > 0;) {
        const std::size_t radix = actions_[s][k].size();
        out[k] = j % radix;
        j /= radix;
    }
    return out;
}

JointIndex GameForm::encode_joint(StateIndex s, std::span<const ActionIndex> actions) const {
    JointIndex j = 0;
    for (PlayerIndex i = 0; i < num_players(); ++i) j = j * actions_[s][i].size() + actions[i];
    return j;
}

StateIndex GameForm::state_index(const std::string& id) const {
    for (StateIndex s = 0; s < states_.size(); ++s)
        if (states_[s] == id) return s;
    throw std::out_of_range("unknown state '" + id + "'");
}

PlayerIndex GameForm::player_index(const std::string& id) const {
    for (PlayerIndex i = 0; i < players_.size(); ++i)
        if (players_[i] == id) return i;
    throw std::out_of_range("unknown player '" + id + "'");
}

ActionIndex GameForm::action_index(StateIndex s, PlayerIndex i, const std::string& id) const {
    const auto& list = actions_.at(s).at(i);
    for (ActionIndex a = 0; a < list.size(); ++a)
        if (list[a] == id) return a;
    throw std::out_of_range("unknown action '" + id + "' for player " + players_[i] + " at state " + states_[s]);
}

std::string_view to_string(Violation::Kind k) {
    switch (k) {
    case Violation::Kind::EmptyActionSet: return "empty_action_set";
    case Violation::Kind::NegativeProbability: return "negative_probability";
    case Violation::Kind::RowSum: return "row_sum";
    case Violation::Kind::Absorption: return "absorption";
    }
    return "?";
}

std::vector<Violation> validate_game_form(const GameForm& form) {
    std::vector<Violation> out;
    for (StateIndex s = 0; s < form.num_states(); ++s) {
        for (PlayerIndex i = 0; i < form.num_players(); ++i) {
            if (form.num_actions(s, i) == 0) {
                out.push_back({Violation::Kind::EmptyActionSet, s, 0, i,
                               "state " + form.state_id(s) + ": player " + form.player_id(i) + " has no actions"});
            }
        }
        for (JointIndex j = 0; j < form.num_joint_actions(s); ++j) {
            const auto row = form.row(s, j);
            double sum = 0.0;
            bool negative = false;
            for (double p : row) {
                if (!(p >= 0.0)) negative = true;  // also catches NaN
                sum += p;
            }
            std::ostringstream where;
            where << "(" << form.state_id(s) << ", joint action " << j << ")";
            if (negative)
                out.push_back({Violation::Kind::NegativeProbability, s, j, 0, where.str() + ": negative probability"});
            if (!(std::abs(sum - 1.0) <= kStochasticTolerance)) {
                std::ostringstream msg;
                msg.precision(17);
                msg << where.str() << ": row sums to " << sum;
                out.push_back({Violation::Kind::RowSum, s, j, 0, msg.str()});
            }
            if (form.is_failure(s) && row[s] != 1.0)
                out.push_back({Violation::Kind::Absorption, s, j, 0, where.str() + ": failure state is not absorbing"});
        }
    }
    return out;
}

InstanceGame::InstanceGame(GameForm form, std::vector<std::vector<std::vector<double>>> payoffs, double discount,
                           StateIndex initial_state)
    : form_(std::move(form)), payoffs_(std::move(payoffs)), discount_(discount), initial_(initial_state) {
    if (const auto v = validate_game_form(form_); !v.empty()) {
        std::string msg = "invalid game form:";
        for (const auto& x : v) msg += "\n  " + x.message;
        throw ValidationError(msg);
    }
    if (!(discount_ > 0.0 && discount_ < 1.0)) throw ValidationError("discount out of range (0,1)");
    if (initial_ >= form_.num_states()) throw ValidationError("initial state index out of range");
    if (form_.is_failure(initial_)) throw ValidationError("initial state " + form_.state_id(initial_) + " is a failure state");
    if (payoffs_.size() != form_.num_players()) throw ValidationError("payoff table needs one entry per player");
    for (PlayerIndex i = 0; i < form_.num_players(); ++i) {
        if (payoffs_[i].size() != form_.num_states()) throw ValidationError("payoff table needs one entry per state");
        for (StateIndex s = 0; s < form_.num_states(); ++s) {
            if (form_.is_failure(s)) {
                if (!payoffs_[i][s].empty())
                    throw ValidationError("payoff defined on failure state " + form_.state_id(s));
                continue;
            }
            if (payoffs_[i][s].size() != form_.num_joint_actions(s))
                throw ValidationError("state " + form_.state_id(s) + ": payoff row has wrong length");
            for (double u : payoffs_[i][s]) {
                if (!std::isfinite(u)) throw ValidationError("non-finite payoff at state " + form_.state_id(s));
                payoff_bound_ = std::max(payoff_bound_, std::abs(u));
            }
        }
    }
}

InstanceGame affine_payoffs(const InstanceGame& game, double alpha, double beta) {
    auto payoffs = game.payoffs();
    for (auto& per_player : payoffs)
        for (auto& per_state : per_player)
            for (double& u : per_state) u = alpha * u + beta;
    return InstanceGame(game.form(), std::move(payoffs), game.discount(), game.initial_state());
}

StationaryProfile PureProfile::to_stationary(const GameForm& form) const {
    StationaryProfile out;
    out.dist.resize(form.num_players());
    for (PlayerIndex i = 0; i < form.num_players(); ++i) {
        out.dist[i].resize(form.num_states());
        for (StateIndex s = 0; s < form.num_states(); ++s) {
            out.dist[i][s].assign(form.num_actions(s, i), 0.0);
            out.dist[i][s][form.is_failure(s) ? 0 : choice.at(i).at(s)] = 1.0;
        }
    }
    return out;
}

void validate_profile(const GameForm& form, const StationaryProfile& profile) {
    if (profile.dist.size() != form.num_players()) throw ValidationError("profile needs one policy per player");
    for (PlayerIndex i = 0; i < form.num_players(); ++i) {
        if (profile.dist[i].size() != form.num_states())
            throw ValidationError("profile for player " + form.player_id(i) + " needs one entry per state");
        for (StateIndex s = 0; s < form.num_states(); ++s) {
            if (form.is_failure(s)) continue;
            const auto& d = profile.dist[i][s];
            if (d.size() != form.num_actions(s, i))
                throw ValidationError("profile for player " + form.player_id(i) + " at state " + form.state_id(s) +
                                      " has wrong support size");
            double sum = 0.0;
            for (double p : d) {
                if (!(p >= 0.0)) throw ValidationError("negative action probability at state " + form.state_id(s));
                sum += p;
            }
            if (std::abs(sum - 1.0) > kStochasticTolerance)
                throw ValidationError("action distribution of player " + form.player_id(i) + " at state " +
                                      form.state_id(s) + " does not sum to 1");
        }
    }
}

double joint_probability(const GameForm& form, const StationaryProfile& profile, StateIndex s, JointIndex j) {
    if (form.is_failure(s)) return j == 0 ? 1.0 : 0.0;
    double p = 1.0;
    for (std::size_t k = form.num_players(); k-- > 0;) {
        const std::size_t radix = form.num_actions(s, k);
        p *= profile.dist[k][s][j % radix];
        j /= radix;
    }
    return p;
}

Eigen::MatrixXd induced_kernel(const GameForm& form, const StationaryProfile& profile) {
    const std::size_t n = form.num_states();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (StateIndex s = 0; s < n; ++s) {
        if (form.is_failure(s)) {
            K(s, s) = 1.0;
            continue;
        }
        for (JointIndex j = 0; j < form.num_joint_actions(s); ++j) {
            const double w = joint_probability(form, profile, s, j);
            if (w == 0.0) continue;
            const auto row = form.row(s, j);
            for (StateIndex t = 0; t < n; ++t) K(s, t) += w * row[t];
        }
    }
    return K;
}

std::vector<std::vector<StateIndex>> induced_support(const GameForm& form, const StationaryProfile& profile) {
    const std::size_t n = form.num_states();
    std::vector<std::vector<StateIndex>> succ(n);
    for (StateIndex s = 0; s < n; ++s) {
        if (form.is_failure(s)) {
            succ[s].push_back(s);
            continue;
        }
        std::vector<bool> hit(n, false);
        for (JointIndex j = 0; j < form.num_joint_actions(s); ++j) {
            if (joint_probability(form, profile, s, j) <= 0.0) continue;
            const auto row = form.row(s, j);
            for (StateIndex t = 0; t < n; ++t)
                if (row[t] > 0.0) hit[t] = true;
        }
        for (StateIndex t = 0; t < n; ++t)
            if (hit[t]) succ[s].push_back(t);
    }
    return succ;
}

PureProfileSpace::PureProfileSpace(const GameForm& form)
    : num_players_(form.num_players()), num_states_(form.num_states()) {
    for (PlayerIndex i = 0; i < form.num_players(); ++i)
        for (StateIndex s = 0; s < form.num_states(); ++s)
            if (!form.is_failure(s)) digits_.push_back({i, s, form.num_actions(s, i), 0});
    std::size_t stride = 1;
    for (std::size_t k = digits_.size(); k-- > 0;) {
        digits_[k].stride = stride;
        stride = saturating_mul(stride, digits_[k].radix);
    }
    size_ = stride;
}

PureProfile PureProfileSpace::decode(std::size_t id) const {
    PureProfile p;
    p.choice.assign(num_players_, std::vector<ActionIndex>(num_states_, 0));
    for (const auto& d : digits_) p.choice[d.player][d.state] = (id / d.stride) % d.radix;
    return p;
}

std::size_t PureProfileSpace::encode(const PureProfile& profile) const {
    std::size_t id = 0;
    for (const auto& d : digits_) id += profile.choice.at(d.player).at(d.state) * d.stride;
    return id;
}

std::size_t PureProfileSpace::player_policy_count(PlayerIndex i) const {
    std::size_t n = 1;
    for (const auto& d : digits_)
        if (d.player == i) n = saturating_mul(n, d.radix);
    return n;
}

std::size_t PureProfileSpace::player_policy_of(std::size_t id, PlayerIndex i) const {
    std::size_t policy = 0;
    for (const auto& d : digits_)
        if (d.player == i) policy = policy * d.radix + (id / d.stride) % d.radix;
    return policy;
}

std::size_t PureProfileSpace::with_player_policy(std::size_t id, PlayerIndex i, std::size_t policy_id) const {
    // Player digits are contiguous, so the block is a single mixed-radix number.
    for (std::size_t k = digits_.size(); k-- > 0;) {
        const auto& d = digits_[k];
        if (d.player != i) continue;
        const std::size_t old_digit = (id / d.stride) % d.radix;
        const std::size_t new_digit = policy_id % d.radix;
        policy_id /= d.radix;
        id = id - old_digit * d.stride + new_digit * d.stride;
    }
    return id;
}

std::vector<ActionIndex> PureProfileSpace::decode_player_policy(PlayerIndex i, std::size_t policy_id) const {
    std::vector<ActionIndex> out(num_states_, 0);
    for (std::size_t k = digits_.size(); k-- > 0;) {
        const auto& d = digits_[k];
        if (d.player != i) continue;
        out[d.state] = policy_id % d.radix;
        policy_id /= d.radix;
    }
    return out;
}

std::vector<PureProfile> enumerate_pure_profiles(const GameForm& form, std::size_t cap) {
    const PureProfileSpace space(form);
    if (space.size() > cap) throw CapExceededError(space.size(), cap);
    std::vector<PureProfile> out;
    out.reserve(space.size());
    for (std::size_t id = 0; id < space.size(); ++id) out.push_back(space.decode(id));
    return out;
}

}  // namespace cpd
