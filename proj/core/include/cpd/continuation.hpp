#pragma once

// Survival structure of the chain induced by a stationary profile.
//
// Time convention: s_0 is the (non-failure) initial state and T is the first
// t >= 1 with s_t in F. Entry n-1 of a survival vector is P(T > n).

#include "cpd/game.hpp"

#include <optional>
#include <vector>

namespace cpd {

enum class TailKind { AlmostSureSurvival, AlmostSureFailure, Mixed };

std::string_view to_string(TailKind k);

struct TailCertificate {
    TailKind kind = TailKind::Mixed;
    /// h(s0) = P(T = infinity). Exactly 1 or 0 for the certified kinds.
    double survival_limit = 0.0;
    /// h(s) for every state (0 on failure states).
    std::vector<double> harmonic;
    /// Reciprocal condition estimate of the transient block, when a solve was needed.
    std::optional<double> rcond;
    bool used_fallback = false;
};

struct ContinuationProfile {
    /// (P(T>1), ..., P(T>N_h)).
    std::vector<double> survival;
    TailCertificate tail;

    std::size_t horizon() const { return survival.size(); }
};

/// Continuation loss with the bracket implied by truncation at the horizon.
struct LossEstimate {
    double value = 0.0;  // bracket midpoint
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
};

/// Forward propagation of the mass restricted to S \ F. Entries are
/// non-increasing and exactly 1 while no failure state has been reached in the
/// support graph. Throws PreconditionError if s0 is a failure state or horizon is 0.
std::vector<double> survival_vector(const GameForm& form, const StationaryProfile& profile, StateIndex s0,
                                    std::size_t horizon);

/// Exact classification of the tail of T.
///
/// States with F unreachable in the support graph get h = 1; states that cannot
/// reach such a state get h = 0; the rest solve h_T = Q_TT h_T + Q_TS 1. A
/// near-singular transient block falls back to monotone iteration from h = 1.
TailCertificate classify_tail(const GameForm& form, const StationaryProfile& profile, StateIndex s0);

ContinuationProfile continuation_profile(const GameForm& form, const StationaryProfile& profile, StateIndex s0,
                                         std::size_t horizon = kDefaultHorizon);

/// L = sum_n 2^-n (1 - P(T>n)); the remainder beyond the horizon is bracketed by
/// the last survival entry and the tail limit.
LossEstimate continuation_loss(const ContinuationProfile& profile);
LossEstimate continuation_loss(const GameForm& form, const StationaryProfile& profile, StateIndex s0,
                               std::size_t horizon = kDefaultHorizon);

/// First coordinate differing by more than tol decides; then the tail limit.
/// Throws PreconditionError on horizon mismatch.
Ordering lex_compare_continuation(const ContinuationProfile& a, const ContinuationProfile& b,
                                  double tol = kDefaultTolerance);

}  // namespace cpd
