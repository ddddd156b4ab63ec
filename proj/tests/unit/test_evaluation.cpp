#include "generators.hpp"

#include "cpd/evaluation.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace cpd;
using namespace cpd::testing;

namespace {

StationaryProfile pure(const GameForm& form, std::vector<std::vector<ActionIndex>> choice) {
    return PureProfile{std::move(choice)}.to_stationary(form);
}

// s0: "a" loops with payoff 0, "b" pays 1 and moves to s1, which pays 1 and fails.
InstanceGame two_profile_fixture() {
    const GameForm form({"s0", "s1", "dead"}, {"p"}, {{{"a", "b"}}, {{"x"}}, {{"_"}}}, {false, false, true},
                        {{{1, 0, 0}, {0, 1, 0}}, {{0, 0, 1}}, {{0, 0, 1}}});
    return InstanceGame(form, {{{0.0, 1.0}, {1.0}, {}}}, 0.5, 0);
}

// One safe state with three payoff-only actions.
InstanceGame shared_continuation() {
    const GameForm form({"s0", "dead"}, {"p"}, {{{"lo", "mid", "hi"}}, {{"_"}}}, {false, true},
                        {{{1, 0}, {1, 0}, {1, 0}}, {{0, 1}}});
    return InstanceGame(form, {{{0.1, 0.5, 0.3}, {}}}, 0.5, 0);
}

CpdValue value_of(std::vector<double> survival, double limit, ExtendedReal performance) {
    CpdValue v;
    v.continuation.survival = std::move(survival);
    v.continuation.tail.survival_limit = limit;
    v.performance.value = performance;
    return v;
}

}  // namespace

TEST(CpdValue, AlwaysSafeIsFinite) {
    const auto game = shared_continuation();
    const auto v = cpd_value(game, pure(game.form(), {{1, 0}}), 0, 8);
    EXPECT_EQ(v.continuation.survival, std::vector<double>(8, 1.0));
    EXPECT_NEAR(v.performance.value.value(), 1.0, 1e-14);
}

TEST(CpdValue, CertainFailureIsNegativeInfinity) {
    const auto game = fail_at(1);
    const auto v = cpd_value(game, pure(game.form(), {{0, 0}}), 0, 8);
    EXPECT_EQ(v.continuation.survival, std::vector<double>(8, 0.0));
    EXPECT_TRUE(v.performance.value.is_negative_infinity());
}

TEST(CpdValue, RiskyBranchComposition) {
    const auto game = load_fixture("risky_branch.json");
    const auto v = cpd_value(game, pure(game.form(), {{0, 0, 0}}), 0, 8);
    for (double s : v.continuation.survival) EXPECT_EQ(s, 0.5);
    EXPECT_NEAR(v.performance.value.value(), 1.0, 1e-14);
}

TEST(CpdCompare, ContinuationHasPriority) {
    const auto a = value_of({1, 1}, 1, ExtendedReal::finite(0.0));
    const auto b = value_of({0.9, 0.9}, 0.9, ExtendedReal::finite(100.0));
    EXPECT_EQ(cpd_compare(a, b), Ordering::Greater);
    EXPECT_EQ(cpd_compare(b, a), Ordering::Less);
}

TEST(CpdCompare, EqualContinuationFallsBackToPerformance) {
    const auto a = value_of({0.5}, 0.5, ExtendedReal::finite(3.0));
    const auto b = value_of({0.5}, 0.5, ExtendedReal::finite(2.0));
    EXPECT_EQ(cpd_compare(a, b), Ordering::Greater);
}

TEST(CpdCompare, BothNegativeInfinityTie) {
    const auto a = value_of({0, 0}, 0, ExtendedReal::negative_infinity());
    EXPECT_EQ(cpd_compare(a, a), Ordering::Equal);
    EXPECT_EQ(cpd_compare(a, value_of({0, 0}, 0, ExtendedReal::finite(-1e300))), Ordering::Less);
}

TEST(CpdCompare, TailCriterionIsPluggable) {
    // Same limit, different transient: only the continuation-profile criterion separates them.
    const auto a = value_of({1.0, 0.5}, 0.5, ExtendedReal::finite(0.0));
    const auto b = value_of({0.5, 0.5}, 0.5, ExtendedReal::finite(1.0));
    EXPECT_EQ(cpd_compare(ContinuationOrderCriterion{}, a, b), Ordering::Greater);
    EXPECT_EQ(cpd_compare(SurvivalLimitCriterion{}, a, b), Ordering::Less);
    EXPECT_EQ(SurvivalLimitCriterion{}.id(), "survival_limit");
}

TEST(PenaltyValue, AlwaysSafeEqualsUnconditional) {
    const auto game = shared_continuation();
    const auto sigma = pure(game.form(), {{2, 0}});
    for (double M : {0.0, 1.0, 1e6}) {
        const auto pv = penalty_value(game, sigma, 0, PenaltyConfig{M, FailureCompletion::zero()});
        EXPECT_NEAR(pv.value(), 0.6, 1e-14);
        EXPECT_EQ(pv.lo(), pv.hi());
    }
}

TEST(PenaltyValue, CertainFailureCostsTheFullWeight) {
    const GameForm form({"s0", "dead"}, {"p"}, {{{"go"}}, {{"_"}}}, {false, true}, {{{0, 1}}, {{0, 1}}});
    const InstanceGame game(form, {{{0.0}, {}}}, 0.5, 0);
    const auto pv = penalty_value(game, pure(form, {{0, 0}}), 0, PenaltyConfig{8.0, FailureCompletion::zero()});
    EXPECT_EQ(pv.value(), -8.0);
}

TEST(PenaltyValue, ZeroWeightIsUnconditional) {
    const auto game = load_fixture("leaky.json");
    const auto sigma = pure(game.form(), {{1, 0, 0}});
    const auto pv = penalty_value(game, sigma, 0, PenaltyConfig{0.0, FailureCompletion::terminal(-2)});
    EXPECT_EQ(pv.value(), unconditional_payoff(game, sigma, 0, FailureCompletion::terminal(-2)));
    EXPECT_EQ(pv.lo(), pv.hi());
}

TEST(PenaltyValue, RejectsNegativeOrInfiniteWeight) {
    const auto game = shared_continuation();
    const auto sigma = pure(game.form(), {{0, 0}});
    EXPECT_THROW(penalty_value(game, sigma, 0, PenaltyConfig{-1.0}), ValidationError);
    EXPECT_THROW(penalty_value(game, sigma, 0, PenaltyConfig{INFINITY}), ValidationError);
}

TEST(ComparePenalty, IntervalsDecideOnlyWhenSeparated) {
    LossEstimate tight{0.5, 0.5, 0.5};
    LossEstimate wide{0.5, 0.4, 0.6};
    const auto a = penalty_value(1.0, tight, PenaltyConfig{1.0});
    const auto b = penalty_value(0.9, tight, PenaltyConfig{1.0});
    EXPECT_EQ(compare_penalty(a, b), Ordering::Greater);
    EXPECT_EQ(compare_penalty(b, a), Ordering::Less);
    EXPECT_EQ(compare_penalty(a, a), Ordering::Equal);
    const auto c = penalty_value(1.0, wide, PenaltyConfig{1.0});
    EXPECT_EQ(compare_penalty(a, c), Ordering::Indeterminate);
    EXPECT_EQ(compare_penalty(c, penalty_value(0.0, tight, PenaltyConfig{1.0})), Ordering::Greater);
}

TEST(DominanceThreshold, Examples) {
    EXPECT_DOUBLE_EQ(dominance_threshold(1.0, 0.5, 0.5), 8.0);
    EXPECT_DOUBLE_EQ(dominance_threshold(1.0, 0.5, 2.0), 2.0);
    EXPECT_EQ(dominance_threshold(0.0, 0.5, 0.5), 0.0);
    EXPECT_THROW(dominance_threshold(1.0, 0.5, 0.0), PreconditionError);
    EXPECT_THROW(dominance_threshold(1.0, 1.0, 0.5), PreconditionError);
    EXPECT_THROW(dominance_threshold(-1.0, 0.5, 0.5), PreconditionError);
}

TEST(DominanceThreshold, BeyondItTheLowerLossProfileWins) {
    const auto game = two_profile_fixture();
    const auto& form = game.form();
    const auto safe = pure(form, {{0, 0, 0}});
    const auto risky = pure(form, {{1, 0, 0}});
    const auto Ls = continuation_loss(form, safe, 0), Lr = continuation_loss(form, risky, 0);
    ASSERT_EQ(Lr.value - Ls.value, 0.5);
    const double M = dominance_threshold(game.payoff_bound(), game.discount(), 0.5);
    EXPECT_EQ(M, 8.0);
    for (const auto& c : {FailureCompletion::zero(), FailureCompletion::absorbing(1.0), FailureCompletion::terminal(-1.0)}) {
        const auto a = penalty_value(game, safe, 0, PenaltyConfig{M + 1e-6, c});
        const auto b = penalty_value(game, risky, 0, PenaltyConfig{M + 1e-6, c});
        EXPECT_EQ(compare_penalty(a, b), Ordering::Greater) << c.to_string();
    }
}

TEST(PenaltySweep, SharedContinuationGivesAConstantRanking) {
    const auto game = shared_continuation();
    const auto sweep = penalty_sweep(game, 0, {0.0, 1.0, 10.0, 1000.0}, FailureCompletion::zero());
    ASSERT_EQ(sweep.rows.size(), 12u);
    for (std::size_t k = 0; k < 4; ++k) {
        // Ranks by payoff: hi-payoff action "mid" (0.5) first, then "hi" (0.3), then "lo" (0.1).
        EXPECT_EQ(sweep.rows[3 * k + 1].rank, 1u);
        EXPECT_EQ(sweep.rows[3 * k + 2].rank, 2u);
        EXPECT_EQ(sweep.rows[3 * k + 0].rank, 3u);
        EXPECT_TRUE(sweep.agrees_with_cpd[k]);
    }
    EXPECT_EQ(sweep.stabilization, 0.0);
    for (std::size_t id = 0; id < 3; ++id) {
        const auto v = cpd_value(game, PureProfileSpace(game.form()).decode(id).to_stationary(game.form()), 0);
        EXPECT_NEAR(sweep.rows[id].U, v.performance.value.value(), 1e-14);
    }
}

TEST(PenaltySweep, TwoProfileFixtureStabilizesBelowTheThreshold) {
    const auto game = two_profile_fixture();
    const auto sweep = penalty_sweep(game, 0, {0.0, 1.0, 2.0, 4.0, 8.0, 16.0}, FailureCompletion::zero());
    ASSERT_TRUE(sweep.stabilization.has_value());
    EXPECT_LE(*sweep.stabilization, 8.0);
    EXPECT_EQ(*sweep.stabilization, 4.0);  // 1.5 - 0.5 M < 0 once M > 3
    EXPECT_FALSE(sweep.agrees_with_cpd[0]);
}

TEST(PenaltySweep, SingleZeroWeightIsTheUnconditionalRanking) {
    const auto game = load_fixture("leaky.json");
    const auto sweep = penalty_sweep(game, 0, {0.0}, FailureCompletion::zero());
    const PureProfileSpace space(game.form());
    for (const auto& row : sweep.rows) {
        const double U = unconditional_payoff(game, space.decode(row.profile_id).to_stationary(game.form()), 0);
        EXPECT_EQ(row.penalty_value, U);
        std::size_t ahead = 0;
        for (const auto& other : sweep.rows) ahead += other.U > U + kDefaultTolerance;
        EXPECT_EQ(row.rank, ahead + 1);
    }
}

TEST(PenaltySweep, RejectsUnsortedWeights) {
    const auto game = shared_continuation();
    EXPECT_THROW(penalty_sweep(game, 0, {1.0, 0.0}, FailureCompletion::zero()), PreconditionError);
    EXPECT_THROW(penalty_sweep(game, 0, {}, FailureCompletion::zero()), PreconditionError);
}

TEST(CompletionSensitivity, SafeProfilesNeverFlip) {
    const auto game = shared_continuation();
    const auto r = completion_sensitivity(game, pure(game.form(), {{0, 0}}), pure(game.form(), {{1, 0}}), 0,
                                          {FailureCompletion::zero(), FailureCompletion::terminal(-100),
                                           FailureCompletion::absorbing(5)});
    EXPECT_FALSE(r.flip);
    for (auto o : r.orderings) EXPECT_EQ(o, Ordering::Less);
}

TEST(CompletionSensitivity, StoredFixtureFlips) {
    const auto game = load_fixture("completion_flip.json");
    const auto r = completion_sensitivity(game, pure(game.form(), {{0, 0}}), pure(game.form(), {{1, 0}}), 0,
                                          {FailureCompletion::zero(), FailureCompletion::terminal(-100)});
    EXPECT_TRUE(r.flip);
    EXPECT_EQ(r.orderings[0], Ordering::Less);
    EXPECT_EQ(r.orderings[1], Ordering::Greater);
    EXPECT_NEAR(r.second_values[1], -49.0, 1e-12);
}

TEST(CompletionSensitivity, IdenticalProfilesAreEqualEverywhere) {
    const auto game = load_fixture("completion_flip.json");
    const auto s = pure(game.form(), {{1, 0}});
    const auto r = completion_sensitivity(game, s, s, 0, {FailureCompletion::zero(), FailureCompletion::terminal(-100)});
    EXPECT_FALSE(r.flip);
    for (auto o : r.orderings) EXPECT_EQ(o, Ordering::Equal);
    EXPECT_THROW(completion_sensitivity(game, s, s, 0, {FailureCompletion::zero()}), PreconditionError);
}
