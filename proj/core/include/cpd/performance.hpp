#pragma once

// Survival-conditioned and unconditional discounted payoffs.

#include "cpd/continuation.hpp"

#include <cstdint>
#include <string>

namespace cpd {

/// Extrinsic rule for payoffs after entry into F.
class FailureCompletion {
 public:
    enum class Mode { ZeroAfterFailure, AbsorbingConstant, TerminalPenalty };

    static FailureCompletion zero() { return {Mode::ZeroAfterFailure, 0.0}; }
    /// kappa per period from the failure date on.
    static FailureCompletion absorbing(double kappa);
    /// Lump sum phi, discounted by delta^T.
    static FailureCompletion terminal(double phi);
    /// "zero", "absorbing:<kappa>", "terminal:<phi>". Throws ParseError.
    static FailureCompletion parse(const std::string& text);

    Mode mode() const { return mode_; }
    double parameter() const { return parameter_; }
    /// Value of the collapsed failure node at the failure date.
    double failure_value(double discount) const;
    std::string to_string() const;

    friend bool operator==(const FailureCompletion&, const FailureCompletion&) = default;

 private:
    FailureCompletion(Mode m, double p) : mode_(m), parameter_(p) {}
    Mode mode_;
    double parameter_;
};

struct ConditionalValue {
    /// E[sum_t delta^t u_i(s_t,a_t) | T = infinity], or -inf when h(s0) = 0.
    ExtendedReal value = ExtendedReal::negative_infinity();
    double survival_mass = 0.0;
    bool used_fallback = false;
};

/// Exact conditional value through the h-transformed chain.
ConditionalValue conditional_payoff(const InstanceGame& game, const StationaryProfile& profile, PlayerIndex player);
ConditionalValue conditional_payoff(const InstanceGame& game, const StationaryProfile& profile, PlayerIndex player,
                                    const TailCertificate& tail);

struct McEstimate {
    double estimate = 0.0;  // NaN when no run survived
    double std_error = 0.0;
    std::size_t accepted = 0;
    std::size_t total = 0;
    std::uint64_t seed = 0;
    std::size_t horizon = 0;

    double acceptance_rate() const { return total == 0 ? 0.0 : static_cast<double>(accepted) / total; }
    bool no_survivors() const { return accepted == 0; }
};

/// Rejection estimator: simulates `runs` paths of length `horizon`, keeps those
/// with T > horizon. Per-run streams derive from (seed, run index), so results
/// do not depend on `workers` (0 = hardware concurrency).
McEstimate mc_conditional_payoff(const InstanceGame& game, const StationaryProfile& profile, PlayerIndex player,
                                 std::size_t horizon, std::size_t runs, std::uint64_t seed, unsigned workers = 0);

/// Discounted expected payoff over the full chain, with F collapsed to one
/// absorbing node valued by the completion.
double unconditional_payoff(const InstanceGame& game, const StationaryProfile& profile, PlayerIndex player,
                            const FailureCompletion& completion = FailureCompletion::zero());

}  // namespace cpd
