#pragma once

// Bank-run game with absorbing failure.
//
// Reserves are counted in units of the promised payment d. In period t every
// remaining depositor chooses W (withdraw) or S (stay); with m withdrawals and
// k reserve units the bank fails in that period iff m >= k. Withdrawers in a
// failing period are served in a uniformly random arrival order: the first k
// receive d, the rest the liquidation payoff ell. Stayers pay their waiting
// cost c_theta for every period they stay (including a failing one) and
// receive ell on failure. Depositors still in the bank after the last decision
// period T_max are repaid d at maturity.

#include "cpd/equilibrium.hpp"
#include "cpd/parallel.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace cpd::bankrun {

struct Params {
    int N = 4;
    double p = 0.5;  // probability of a weak type
    double d = 1.0;
    double ell = 0.2;
    double c_w = 0.3;
    double c_s = 0.1;
    double L0 = 1.0;
    int T_max = 1;
    /// Discount factor of the exact game; the simulation is undiscounted.
    double discount = 0.999;

    /// Throws ValidationError on any violated invariant.
    void validate() const;
    /// L0 / d; throws ValidationError unless L0 is a positive integer multiple of d.
    long reserve_units() const;
};

enum class Type { Weak, Strong };
enum class Action { Withdraw, Stay };

/// Symmetric rule applied by every depositor of a type: (type, period, reserve units) -> action.
struct Strategy {
    std::string name;
    std::function<Action(Type, int, long)> rule;

    static Strategy everyone_stays();
    static Strategy all_withdraw_at(int period);
    /// Weak types withdraw at the first opportunity, strong types stay.
    static Strategy weak_run();
};

enum class Incentive { StrictWithdraw, StrictStay, Indifferent };
std::string_view to_string(Incentive i);

struct WithdrawComparison {
    Incentive verdict;
    double withdraw_value;  // d
    double stay_value;      // (1-q)(d-c_w) + q(ell-c_w)
    double margin;          // withdraw - stay
};

/// Weak type's one-period withdrawal incentive at a knife-edge history.
/// Uses only d, ell, c_w; throws ValidationError if they are out of range or q is outside [0,1].
WithdrawComparison weak_withdraw_br(const Params& params, double q, double tol = 1e-12);

/// 1 - (1-p)^N.
double collapse_bound(double p, int N);
/// P(at least k of N depositors are weak).
double binomial_tail(double p, int N, long k);

struct State {
    enum class Kind { Nature, Active, Matured, Closed, Failed };
    Kind kind;
    int period = 0;
    long reserve = 0;
    unsigned remaining = 0;  // bit i set: depositor i still in the bank
    unsigned weak = 0;       // bit i set: depositor i is weak
};

struct Game {
    InstanceGame game;
    std::vector<State> states;
    /// Active states with reserves in (0, m_threshold * d].
    std::vector<StateIndex> knife_edge_states;
    int m_threshold = 1;
};

/// Exact instance game over reachable states, for N <= 3.
/// Throws PreconditionError past the cap and ValidationError on invalid params.
Game build_game(const Params& params, int m_threshold);

/// Pure profile in which every depositor follows `strategy` given its own type.
PureProfile symmetric_profile(const Game& g, const Strategy& strategy);

struct RunOutcome {
    std::vector<Type> types;
    std::vector<int> withdraw_period;  // 0 = never withdrew
    std::vector<bool> paid;            // received d
    std::vector<double> payoff;
    int failure_period = 0;  // 0 = no failure
    long paid_withdrawals = 0;
    long unpaid_withdrawals = 0;
    long literal_reserve = 0;  // L0/d minus every attempted withdrawal
};

/// One run; `forced_first` pins depositor 0 to a weak type that stays when set.
RunOutcome simulate_single_run(const Params& params, const Strategy& strategy, std::mt19937_64& rng,
                               bool forced_first = false);

struct SimulationStats {
    std::size_t runs = 0;
    std::uint64_t seed = 0;
    /// Entry t-1: runs failing in period t.
    std::vector<std::size_t> failures;
    /// Entry t-1: fraction of runs without failure through period t.
    std::vector<double> survival;
    double failure_frequency = 0.0;
    double failure_std_error = 0.0;
    double mean_payoff_weak = 0.0;
    double mean_payoff_strong = 0.0;
    std::size_t weak_depositors = 0;
    std::size_t strong_depositors = 0;
    std::size_t accounting_violations = 0;
};

SimulationStats simulate_run(const Params& params, const Strategy& strategy, std::size_t runs, std::uint64_t seed,
                             unsigned workers = 0);

/// Frequency of failure in period 1 when depositor 0 is weak and stays while
/// everyone else follows `strategy`.
double estimate_failure_belief(const Params& params, const Strategy& strategy, std::size_t runs, std::uint64_t seed,
                               unsigned workers = 0);

struct QModel {
    enum class Source { Fixed, FromSimulation };
    Source source = Source::Fixed;
    double q = 0.5;
};

struct KnifeEdgeOptions {
    std::size_t runs = 100'000;
    std::uint64_t seed = 1;
    int m_threshold = 1;
    unsigned workers = 0;
};

struct KnifeEdgeReport {
    enum class Status { Pass, Fail, NotApplicable };
    Status status = Status::NotApplicable;

    // (a) incentive inequality
    double q = 0.0;
    QModel::Source q_source = QModel::Source::Fixed;
    WithdrawComparison incentive{};

    // (b) simulated collapse frequency
    bool simulated = false;
    double failure_frequency = 0.0;
    double failure_std_error = 0.0;
    double bound = 0.0;
    double exact_probability = 0.0;
    bool stochastic_pass = false;

    // (c) exact best response on the small game
    bool exact_checked = false;
    int exact_N = 0;
    std::size_t knife_states_checked = 0;
    std::size_t best_response_count = 0;
    double exact_q = 0.0;
    double exact_withdraw_value = 0.0;
    double exact_stay_value = 0.0;
    bool exact_pass = false;
};

std::string_view to_string(KnifeEdgeReport::Status s);

/// Runs the three legs. Legs (b) and (c) run only when (a) finds a strict
/// withdrawal incentive; otherwise the report is NotApplicable.
/// Throws PreconditionError unless L0 lies in (0, m_threshold * d].
KnifeEdgeReport knife_edge_check(const Params& params, const QModel& q_model, const KnifeEdgeOptions& opts = {});

}  // namespace cpd::bankrun
