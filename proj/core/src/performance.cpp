#include "cpd/performance.hpp"

#include "cpd/parallel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace cpd {

namespace {

constexpr double kSingularRcond = 1e-13;
constexpr double kIterationTolerance = 1e-12;

/// Solves (I - delta P) v = r; falls back to value iteration when the LU
/// factorization looks singular. Sets `fallback` when the iteration was used.
Eigen::VectorXd discounted_solve(const Eigen::MatrixXd& P, const Eigen::VectorXd& r, double delta, bool& fallback) {
    const auto m = P.rows();
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m) - delta * P;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
    const double rcond = lu.rcond();
    if (rcond > kSingularRcond) {
        Eigen::VectorXd v = lu.solve(r);
        if (v.allFinite()) return v;
    }
    fallback = true;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
    // Contraction with modulus delta: stop once the a-posteriori error is below tolerance.
    for (std::size_t it = 0; it < 100'000'000; ++it) {
        Eigen::VectorXd next = r + delta * (P * v);
        const double change = (next - v).cwiseAbs().maxCoeff();
        v = std::move(next);
        if (change < kIterationTolerance) return v;
    }
    std::ostringstream msg;
    msg << "value iteration did not converge (rcond " << rcond << ")";
    throw SolveError(msg.str());
}

/// Inverse-CDF draw from a discrete distribution given as cumulative sums.
std::size_t draw(const std::vector<double>& cdf, double u) {
    for (std::size_t k = 0; k + 1 < cdf.size(); ++k)
        if (u < cdf[k]) return k;
    return cdf.size() - 1;
}

std::vector<double> cumulative(std::span<const double> p) {
    std::vector<double> out(p.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        acc += p[k];
        out[k] = acc;
    }
    // Zero-probability trailing entries must never be drawn.
    std::size_t last = p.size();
    while (last > 0 && p[last - 1] == 0.0) --last;
    for (std::size_t k = last == 0 ? 0 : last - 1; k < p.size(); ++k) out[k] = std::numeric_limits<double>::infinity();
    return out;
}

}  // namespace

FailureCompletion FailureCompletion::absorbing(double kappa) {
    if (!std::isfinite(kappa)) throw ValidationError("absorbing completion needs a finite kappa");
    return {Mode::AbsorbingConstant, kappa};
}

FailureCompletion FailureCompletion::terminal(double phi) {
    if (!std::isfinite(phi)) throw ValidationError("terminal completion needs a finite penalty");
    return {Mode::TerminalPenalty, phi};
}

FailureCompletion FailureCompletion::parse(const std::string& text) {
    if (text == "zero") return zero();
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ParseError("completion must be zero, absorbing:<kappa> or terminal:<phi>");
    const std::string head = text.substr(0, colon);
    const std::string tail = text.substr(colon + 1);
    char* end = nullptr;
    const double v = std::strtod(tail.c_str(), &end);
    if (tail.empty() || end != tail.c_str() + tail.size() || !std::isfinite(v))
        throw ParseError("completion parameter '" + tail + "' is not a finite number");
    if (head == "absorbing") return absorbing(v);
    if (head == "terminal") return terminal(v);
    throw ParseError("unknown completion mode '" + head + "'");
}

double FailureCompletion::failure_value(double discount) const {
    switch (mode_) {
    case Mode::ZeroAfterFailure: return 0.0;
    case Mode::AbsorbingConstant: return parameter_ / (1.0 - discount);
    case Mode::TerminalPenalty: return parameter_;
    }
    return 0.0;
}

std::string FailureCompletion::to_string() const {
    std::ostringstream os;
    os.precision(17);
    switch (mode_) {
    case Mode::ZeroAfterFailure: return "zero";
    case Mode::AbsorbingConstant: os << "absorbing:" << parameter_; break;
    case Mode::TerminalPenalty: os << "terminal:" << parameter_; break;
    }
    return os.str();
}

ConditionalValue conditional_payoff(const InstanceGame& game, const StationaryProfile& profile, PlayerIndex player) {
    return conditional_payoff(game, profile, player, classify_tail(game.form(), profile, game.initial_state()));
}

ConditionalValue conditional_payoff(const InstanceGame& game, const StationaryProfile& profile, PlayerIndex player,
                                    const TailCertificate& tail) {
    const auto& form = game.form();
    if (player >= form.num_players()) throw PreconditionError("player index out of range");
    ConditionalValue out;
    out.survival_mass = tail.survival_limit;
    if (tail.kind == TailKind::AlmostSureFailure) return out;

    // Conditioned chain on {h > 0}: P~(s,t) = K(s,t) h(t) / (K h)(s) and the
    // action weights twisted by the same factor.
    std::vector<StateIndex> live;
    std::vector<Eigen::Index> slot(form.num_states(), -1);
    for (StateIndex s = 0; s < form.num_states(); ++s)
        if (!form.is_failure(s) && tail.harmonic[s] > 0.0) {
            slot[s] = static_cast<Eigen::Index>(live.size());
            live.push_back(s);
        }
    const auto m = static_cast<Eigen::Index>(live.size());
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const StateIndex s = live[k];
        double norm = 0.0;
        for (JointIndex j = 0; j < form.num_joint_actions(s); ++j) {
            const double w = joint_probability(form, profile, s, j);
            if (w == 0.0) continue;
            const auto row = form.row(s, j);
            double g = 0.0;
            for (StateIndex t : live) g += row[t] * tail.harmonic[t];
            if (g == 0.0) continue;
            norm += w * g;
            r(k) += w * g * game.payoff(player, s, j);
            for (StateIndex t : live) P(k, slot[t]) += w * row[t] * tail.harmonic[t];
        }
        if (!(norm > 0.0)) throw SolveError("conditioned chain has no mass at state " + form.state_id(s));
        r(k) /= norm;
        P.row(k) /= norm;
    }
    const Eigen::VectorXd v = discounted_solve(P, r, game.discount(), out.used_fallback);
    out.value = ExtendedReal::finite(v(slot[game.initial_state()]));
    return out;
}

McEstimate mc_conditional_payoff(const InstanceGame& game, const StationaryProfile& profile, PlayerIndex player,
                                 std::size_t horizon, std::size_t runs, std::uint64_t seed, unsigned workers) {
    if (horizon == 0 || runs == 0) throw PreconditionError("horizon and runs must be positive");
    const auto& form = game.form();
    if (player >= form.num_players()) throw PreconditionError("player index out of range");
    validate_profile(form, profile);

    const std::size_t n = form.num_states();
    std::vector<std::vector<std::vector<double>>> action_cdf(n);  // [s][i]
    std::vector<std::vector<std::vector<double>>> row_cdf(n);     // [s][j]
    for (StateIndex s = 0; s < n; ++s) {
        if (form.is_failure(s)) continue;
        for (PlayerIndex i = 0; i < form.num_players(); ++i) action_cdf[s].push_back(cumulative(profile.dist[i][s]));
        for (JointIndex j = 0; j < form.num_joint_actions(s); ++j) row_cdf[s].push_back(cumulative(form.row(s, j)));
    }

    struct Partial {
        std::size_t accepted = 0;
        double sum = 0.0;
        double sum_sq = 0.0;
    };
    const std::size_t chunks = (runs + kRunsPerChunk - 1) / kRunsPerChunk;
    std::vector<Partial> partial(chunks);
    const double delta = game.discount();

    parallel_chunks(chunks, workers, [&](std::size_t c) {
        Partial acc;
        std::vector<ActionIndex> actions(form.num_players());
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const std::size_t end = std::min(runs, (c + 1) * kRunsPerChunk);
        auto rng = chunk_stream(seed, c);
        for (std::size_t run = c * kRunsPerChunk; run < end; ++run) {
            StateIndex s = game.initial_state();
            double total = 0.0;
            double weight = 1.0;
            bool alive = true;
            for (std::size_t t = 0; t < horizon; ++t) {
                for (PlayerIndex i = 0; i < form.num_players(); ++i) actions[i] = draw(action_cdf[s][i], unif(rng));
                const JointIndex j = form.encode_joint(s, actions);
                total += weight * game.payoff(player, s, j);
                weight *= delta;
                s = draw(row_cdf[s][j], unif(rng));
                if (form.is_failure(s)) {
                    alive = false;
                    break;
                }
            }
            if (alive) {
                ++acc.accepted;
                acc.sum += total;
                acc.sum_sq += total * total;
            }
        }
        partial[c] = acc;
    });

    McEstimate out;
    out.total = runs;
    out.seed = seed;
    out.horizon = horizon;
    double sum = 0.0, sum_sq = 0.0;
    for (const auto& p : partial) {
        out.accepted += p.accepted;
        sum += p.sum;
        sum_sq += p.sum_sq;
    }
    if (out.accepted == 0) {
        out.estimate = std::numeric_limits<double>::quiet_NaN();
        out.std_error = std::numeric_limits<double>::quiet_NaN();
        return out;
    }
    const double k = static_cast<double>(out.accepted);
    out.estimate = sum / k;
    if (out.accepted > 1) {
        const double var = std::max(0.0, (sum_sq - k * out.estimate * out.estimate) / (k - 1.0));
        out.std_error = std::sqrt(var / k);
    }
    return out;
}

double unconditional_payoff(const InstanceGame& game, const StationaryProfile& profile, PlayerIndex player,
                            const FailureCompletion& completion) {
    const auto& form = game.form();
    if (player >= form.num_players()) throw PreconditionError("player index out of range");
    validate_profile(form, profile);
    const auto live = form.non_failure_states();
    std::vector<Eigen::Index> slot(form.num_states(), -1);
    for (std::size_t k = 0; k < live.size(); ++k) slot[live[k]] = static_cast<Eigen::Index>(k);

    const auto m = static_cast<Eigen::Index>(live.size());
    const double delta = game.discount();
    const double failure_value = completion.failure_value(delta);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd r = Eigen::VectorXd::Zero(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const StateIndex s = live[k];
        for (JointIndex j = 0; j < form.num_joint_actions(s); ++j) {
            const double w = joint_probability(form, profile, s, j);
            if (w == 0.0) continue;
            r(k) += w * game.payoff(player, s, j);
            const auto row = form.row(s, j);
            for (StateIndex t = 0; t < form.num_states(); ++t) {
                if (row[t] == 0.0) continue;
                if (form.is_failure(t)) {
                    r(k) += delta * w * row[t] * failure_value;
                } else {
                    P(k, slot[t]) += w * row[t];
                }
            }
        }
    }
    bool fallback = false;
    const Eigen::VectorXd v = discounted_solve(P, r, delta, fallback);
    return v(slot[game.initial_state()]);
}

}  // namespace cpd
