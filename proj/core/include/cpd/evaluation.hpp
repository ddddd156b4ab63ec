#pragma once

// Continuation-performance evaluation and its scalar penalty counterparts.

#include "cpd/continuation.hpp"
#include "cpd/performance.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cpd {

struct CpdValue {
    ContinuationProfile continuation;
    ConditionalValue performance;
};

CpdValue cpd_value(const InstanceGame& game, const StationaryProfile& profile, PlayerIndex player,
                   std::size_t horizon = kDefaultHorizon);

/// Ordering of profiles that may only look at the law of the failure time.
/// Implementations receive survival data and nothing else.
class TailCriterion {
 public:
    virtual ~TailCriterion() = default;
    virtual std::string id() const = 0;
    virtual Ordering compare(const ContinuationProfile& a, const ContinuationProfile& b, double tol) const = 0;
};

/// Lexicographic order on the continuation profile (the default).
class ContinuationOrderCriterion final : public TailCriterion {
 public:
    std::string id() const override { return "continuation_profile"; }
    Ordering compare(const ContinuationProfile& a, const ContinuationProfile& b, double tol) const override {
        return lex_compare_continuation(a, b, tol);
    }
};

/// Scalar criterion: the survival probability h(s0) alone.
class SurvivalLimitCriterion final : public TailCriterion {
 public:
    std::string id() const override { return "survival_limit"; }
    Ordering compare(const ContinuationProfile& a, const ContinuationProfile& b, double tol) const override {
        return cpd::compare(a.tail.survival_limit, b.tail.survival_limit, tol);
    }
};

/// Tail criterion first, then the conditional value with -inf below every finite value.
Ordering cpd_compare(const CpdValue& a, const CpdValue& b, double tol = kDefaultTolerance);
Ordering cpd_compare(const TailCriterion& criterion, const CpdValue& a, const CpdValue& b,
                     double tol = kDefaultTolerance);

struct PenaltyConfig {
    double M = 0.0;
    FailureCompletion completion = FailureCompletion::zero();
};

/// U^M = U - M L carried as an interval from the loss bracket.
struct PenaltyValue {
    double unconditional = 0.0;
    LossEstimate loss;
    double M = 0.0;
    FailureCompletion completion = FailureCompletion::zero();

    double value() const { return unconditional - M * loss.value; }
    double lo() const { return unconditional - M * loss.hi; }
    double hi() const { return unconditional - M * loss.lo; }
};

/// Throws ValidationError unless M is finite and nonnegative.
PenaltyValue penalty_value(const InstanceGame& game, const StationaryProfile& profile, PlayerIndex player,
                           const PenaltyConfig& cfg, std::size_t horizon = kDefaultHorizon);
PenaltyValue penalty_value(double unconditional, const LossEstimate& loss, const PenaltyConfig& cfg);

/// Interval-aware comparison: strict only when the intervals are separated by
/// more than tol, Equal only when they agree within tol, otherwise Indeterminate.
Ordering compare_penalty(const PenaltyValue& a, const PenaltyValue& b, double tol = kDefaultTolerance);

/// M* = 2 ubar / ((1 - delta) Delta). Beyond it a loss gap of Delta outweighs
/// any payoff difference. Throws PreconditionError for Delta <= 0, delta outside
/// (0,1) or ubar < 0.
double dominance_threshold(double payoff_bound, double discount, double loss_gap);

struct SweepOptions {
    std::size_t horizon = kDefaultHorizon;
    double tol = kDefaultTolerance;
    std::size_t cap = kDefaultEnumerationCap;
};

struct SweepRow {
    std::size_t profile_id;
    double M;
    double U;
    double L_mid;
    double L_lo;
    double L_hi;
    double penalty_value;
    std::size_t rank;  // 1 + number of profiles strictly ahead
};

struct PenaltySweep {
    std::vector<double> M_values;
    FailureCompletion completion = FailureCompletion::zero();
    std::size_t profile_count = 0;
    /// Row-major: M index outer, profile id inner.
    std::vector<SweepRow> rows;
    /// Per M: whether every continuation-distinct pair is ordered as CPD orders it.
    std::vector<bool> agrees_with_cpd;
    /// Per M: number of indeterminate comparisons among continuation-distinct pairs.
    std::vector<std::size_t> indeterminate_pairs;
    /// First swept M after which agreement holds for every larger swept M.
    std::optional<double> stabilization;
};

/// Ranks every pure profile by U^M for each swept M. M values must be strictly increasing.
PenaltySweep penalty_sweep(const InstanceGame& game, PlayerIndex player, const std::vector<double>& M_values,
                           const FailureCompletion& completion, const SweepOptions& opts = {});

struct CompletionSensitivity {
    std::vector<FailureCompletion> completions;
    std::vector<double> first_values;
    std::vector<double> second_values;
    /// Ordering of the first profile against the second, per completion.
    std::vector<Ordering> orderings;
    bool flip = false;
};

/// Throws PreconditionError for fewer than two completions.
CompletionSensitivity completion_sensitivity(const InstanceGame& game, const StationaryProfile& first,
                                             const StationaryProfile& second, PlayerIndex player,
                                             const std::vector<FailureCompletion>& completions,
                                             double tol = kDefaultTolerance);

}  // namespace cpd
