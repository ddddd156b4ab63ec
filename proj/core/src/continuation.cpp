#include "cpd/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace cpd {

namespace {

constexpr double kSingularRcond = 1e-13;
constexpr double kFallbackTolerance = 1e-12;
constexpr std::size_t kFallbackMaxIterations = 10'000'000;
constexpr double kResidualTolerance = 1e-9;

/// States that can reach some member of `targets` (targets included).
std::vector<bool> backward_reachable(const std::vector<std::vector<StateIndex>>& succ, const std::vector<bool>& targets) {
    const std::size_t n = succ.size();
    std::vector<std::vector<StateIndex>> pred(n);
    for (StateIndex s = 0; s < n; ++s)
        for (StateIndex t : succ[s]) pred[t].push_back(s);
    std::vector<bool> mark = targets;
    std::deque<StateIndex> queue;
    for (StateIndex s = 0; s < n; ++s)
        if (mark[s]) queue.push_back(s);
    while (!queue.empty()) {
        const StateIndex t = queue.front();
        queue.pop_front();
        for (StateIndex s : pred[t])
            if (!mark[s]) {
                mark[s] = true;
                queue.push_back(s);
            }
    }
    return mark;
}

}  // namespace

std::string_view to_string(TailKind k) {
    switch (k) {
    case TailKind::AlmostSureSurvival: return "almost_sure_survival";
    case TailKind::AlmostSureFailure: return "almost_sure_failure";
    case TailKind::Mixed: return "mixed";
    }
    return "?";
}

std::vector<double> survival_vector(const GameForm& form, const StationaryProfile& profile, StateIndex s0,
                                    std::size_t horizon) {
    if (s0 >= form.num_states() || form.is_failure(s0)) throw PreconditionError("initial state must be a non-failure state");
    if (horizon == 0) throw PreconditionError("horizon must be at least 1");
    validate_profile(form, profile);

    const Eigen::MatrixXd K = induced_kernel(form, profile);
    const std::size_t n = form.num_states();
    // One-step failure probability per state; exactly 0 when F has no support edge.
    std::vector<double> fail_step(n, 0.0);
    const auto succ = induced_support(form, profile);
    for (StateIndex s = 0; s < n; ++s) {
        if (form.is_failure(s)) continue;
        bool reaches = false;
        for (StateIndex t : succ[s]) reaches = reaches || form.is_failure(t);
        if (!reaches) continue;
        double f = 0.0;
        for (StateIndex t = 0; t < n; ++t)
            if (form.is_failure(t)) f += K(s, t);
        fail_step[s] = std::clamp(f, 0.0, 1.0);
    }

    Eigen::VectorXd mass = Eigen::VectorXd::Zero(n);
    mass(s0) = 1.0;
    std::vector<double> out;
    out.reserve(horizon);
    double survival = 1.0;
    for (std::size_t step = 0; step < horizon; ++step) {
        double failed = 0.0;
        for (StateIndex s = 0; s < n; ++s) failed += mass(s) * fail_step[s];
        survival = std::max(0.0, survival - failed);
        out.push_back(survival);

        Eigen::VectorXd next = K.transpose() * mass;
        for (StateIndex s = 0; s < n; ++s)
            if (form.is_failure(s)) next(s) = 0.0;
        mass = next;
    }
    return out;
}

TailCertificate classify_tail(const GameForm& form, const StationaryProfile& profile, StateIndex s0) {
    if (s0 >= form.num_states() || form.is_failure(s0)) throw PreconditionError("initial state must be a non-failure state");
    validate_profile(form, profile);
    const std::size_t n = form.num_states();
    const auto succ = induced_support(form, profile);

    const auto reaches_failure = backward_reachable(succ, form.failure_mask());
    std::vector<bool> safe(n, false);
    for (StateIndex s = 0; s < n; ++s) safe[s] = !form.is_failure(s) && !reaches_failure[s];
    const auto positive = backward_reachable(succ, safe);

    TailCertificate cert;
    cert.harmonic.assign(n, 0.0);
    std::vector<StateIndex> transient;
    for (StateIndex s = 0; s < n; ++s) {
        if (safe[s]) {
            cert.harmonic[s] = 1.0;
        } else if (positive[s] && !form.is_failure(s)) {
            transient.push_back(s);
        }
    }

    if (!transient.empty()) {
        const Eigen::MatrixXd K = induced_kernel(form, profile);
        const auto m = static_cast<Eigen::Index>(transient.size());
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(m);
        for (Eigen::Index r = 0; r < m; ++r) {
            const StateIndex s = transient[r];
            for (Eigen::Index c = 0; c < m; ++c) A(r, c) -= K(s, transient[c]);
            for (StateIndex t = 0; t < n; ++t)
                if (safe[t]) b(r) += K(s, t);
        }
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
        cert.rcond = lu.rcond();
        Eigen::VectorXd h;
        bool ok = *cert.rcond > kSingularRcond;
        if (ok) {
            h = lu.solve(b);
            ok = h.allFinite();
        }
        if (!ok) {
            // Monotone iteration h <- Q h + Q_TS 1 from h = 1 on the transient block.
            cert.used_fallback = true;
            const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(m, m) - A;
            h = Eigen::VectorXd::Ones(m);
            std::size_t it = 0;
            for (; it < kFallbackMaxIterations; ++it) {
                Eigen::VectorXd next = Q * h + b;
                const double change = (next - h).cwiseAbs().maxCoeff();
                h = std::move(next);
                if (change < kFallbackTolerance) break;
            }
            if (it == kFallbackMaxIterations)
                throw SolveError("harmonic iteration did not converge (rcond " + std::to_string(*cert.rcond) + ")");
        }
        const double residual = (A * h - b).cwiseAbs().maxCoeff();
        if (residual > kResidualTolerance)
            throw SolveError("harmonic residual " + std::to_string(residual) + " exceeds tolerance (rcond " +
                             std::to_string(*cert.rcond) + ")");
        // Transient states lie strictly inside (0,1); keep rounding from
        // producing the values reserved for certified states.
        const double below_one = std::nextafter(1.0, 0.0);
        for (Eigen::Index r = 0; r < m; ++r)
            cert.harmonic[transient[r]] = std::clamp(h(r), std::numeric_limits<double>::min(), below_one);
    }

    if (safe[s0]) {
        cert.kind = TailKind::AlmostSureSurvival;
    } else if (!positive[s0]) {
        cert.kind = TailKind::AlmostSureFailure;
    } else {
        cert.kind = TailKind::Mixed;
    }
    cert.survival_limit = cert.harmonic[s0];
    return cert;
}

ContinuationProfile continuation_profile(const GameForm& form, const StationaryProfile& profile, StateIndex s0,
                                         std::size_t horizon) {
    ContinuationProfile c;
    c.survival = survival_vector(form, profile, s0, horizon);
    c.tail = classify_tail(form, profile, s0);
    return c;
}

LossEstimate continuation_loss(const ContinuationProfile& profile) {
    const std::size_t N = profile.horizon();
    if (N == 0) throw PreconditionError("continuation profile is empty");
    const double last = profile.survival[N - 1];
    const double limit = std::min(profile.tail.survival_limit, last);
    // Summed from the tail up so that dyadic terms accumulate exactly.
    auto sum_with_remainder = [&](double remainder) {
        double acc = remainder;
        for (std::size_t n = N; n >= 1; --n) acc += std::ldexp(1.0 - profile.survival[n - 1], -static_cast<int>(n));
        return acc;
    };
    LossEstimate L;
    L.lo = sum_with_remainder(std::ldexp(1.0 - last, -static_cast<int>(N)));
    L.hi = sum_with_remainder(std::ldexp(1.0 - limit, -static_cast<int>(N)));
    L.value = sum_with_remainder(std::ldexp((1.0 - last) + (1.0 - limit), -static_cast<int>(N) - 1));
    return L;
}

LossEstimate continuation_loss(const GameForm& form, const StationaryProfile& profile, StateIndex s0,
                               std::size_t horizon) {
    return continuation_loss(continuation_profile(form, profile, s0, horizon));
}

Ordering lex_compare_continuation(const ContinuationProfile& a, const ContinuationProfile& b, double tol) {
    if (a.horizon() != b.horizon()) throw PreconditionError("continuation profiles have different horizons");
    for (std::size_t n = 0; n < a.horizon(); ++n) {
        const Ordering o = compare(a.survival[n], b.survival[n], tol);
        if (o != Ordering::Equal) return o;
    }
    return compare(a.tail.survival_limit, b.tail.survival_limit, tol);
}

}  // namespace cpd
