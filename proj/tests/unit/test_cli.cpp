#include "cli_app.hpp"
#include "generators.hpp"

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>

using nlohmann::json;

namespace {

struct Invocation {
    int code;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cpd::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string fixture(const std::string& name) { return cpd::testing::fixture_path(name).string(); }

json result_of(const Invocation& r) { return json::parse(r.out).at("result"); }

std::vector<std::string> data_lines(const std::string& csv) {
    std::vector<std::string> lines;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);)
        if (!line.empty() && line[0] != '#') lines.push_back(line);
    return lines;
}

}  // namespace

TEST(Cli, ValidateAcceptsAWellFormedGame) {
    const auto r = invoke({"validate", "--game", fixture("stay_withdraw.json")});
    EXPECT_EQ(r.code, 0) << r.err;
    const auto res = result_of(r);
    EXPECT_TRUE(res.at("valid").get<bool>());
    EXPECT_TRUE(res.at("violations").empty());
}

TEST(Cli, ValidateReportsRowSumViolations) {
    const auto r = invoke({"validate", "--game", fixture("invalid_row_sum.json")});
    EXPECT_EQ(r.code, 1);
    const auto res = result_of(r);
    EXPECT_FALSE(res.at("valid").get<bool>());
    ASSERT_FALSE(res.at("violations").empty());
    EXPECT_EQ(res["violations"][0]["state"], "s0");
}

TEST(Cli, ContinuationCsvIsTheGeometricLaw) {
    const auto r = invoke({"continuation", "--game", fixture("geometric.json"), "--horizon", "8", "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("# config: ", 0), 0u);
    const auto lines = data_lines(r.out);
    ASSERT_EQ(lines.size(), 9u);  // header + 8 rows
    EXPECT_EQ(lines[0], "n,survival");
    double prev = 1.0;
    for (int n = 1; n <= 8; ++n) {
        const auto comma = lines[n].find(',');
        EXPECT_EQ(std::stoi(lines[n].substr(0, comma)), n);
        const double s = std::stod(lines[n].substr(comma + 1));
        EXPECT_EQ(s, std::ldexp(1.0, -n));
        EXPECT_LE(s, prev);
        prev = s;
    }
}

TEST(Cli, ConfigIsEchoed) {
    const auto r = invoke({"continuation", "--game", fixture("geometric.json"), "--horizon", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto doc = json::parse(r.out);
    EXPECT_EQ(doc.at("config").at("command"), "continuation");
    EXPECT_EQ(doc["config"].at("horizon"), 5);
    EXPECT_TRUE(doc.contains("generated_at"));
}

TEST(Cli, KnifeEdgeDefaultsPass) {
    const auto r = invoke({"bankrun-knife-edge", "--seed", "7", "--runs", "20000"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto res = result_of(r);
    EXPECT_EQ(res.at("status"), "pass");
    EXPECT_TRUE(res["incentive"]["pass"].get<bool>());
    EXPECT_TRUE(res["collapse"]["pass"].get<bool>());
    EXPECT_TRUE(res["exact"]["pass"].get<bool>());
}

TEST(Cli, SeededRunsAreReproducible) {
    const std::vector<std::string> args{"bankrun-simulate", "--seed", "11", "--runs", "5000", "--T", "3"};
    auto a = json::parse(invoke(args).out), b = json::parse(invoke(args).out);
    a.erase("generated_at");
    b.erase("generated_at");
    EXPECT_EQ(a, b);
}

TEST(Cli, StochasticCommandsRequireASeed) {
    EXPECT_EQ(invoke({"bankrun-simulate", "--runs", "10"}).code, 1);
    EXPECT_EQ(invoke({"evaluate", "--game", fixture("risky_branch.json"), "--runs", "10"}).code, 1);
}

TEST(Cli, UsageErrorsExitWithOne) {
    EXPECT_EQ(invoke({"no-such-command"}).code, 1);
    EXPECT_EQ(invoke({}).code, 1);
    EXPECT_EQ(invoke({"continuation", "--game", "/nonexistent.json"}).code, 1);
    EXPECT_EQ(invoke({"evaluate", "--game", fixture("geometric.json"), "--format", "csv"}).code, 1);
}

TEST(Cli, PenaltySweepCsvHasOneRowPerProfileAndWeight) {
    const auto r = invoke({"penalty-sweep", "--game", fixture("completion_flip.json"), "--penalties", "0,1,10",
                           "--format", "csv"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto lines = data_lines(r.out);
    ASSERT_EQ(lines.size(), 7u);
    EXPECT_EQ(lines[0], "M,profile_id,U,L_mid,L_lo,L_hi,penalty_value,rank");
}

TEST(Cli, CompletionFlipOnTheStoredFixture) {
    const auto r = invoke({"completion-flip", "--game", fixture("completion_flip.json"), "--profile-id", "0",
                           "--other-id", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(result_of(r).at("flip").get<bool>());
}

TEST(Cli, EquilibriaWithAScheduleRunsThePenaltyLimitCheck) {
    const auto r = invoke({"equilibria", "--game", fixture("stay_withdraw.json"), "--penalties", "0,1,10,100"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto res = result_of(r);
    EXPECT_TRUE(res.at("penalty_limit").at("verdict").get<bool>());
    EXPECT_EQ(res["penalty_limit"]["vanishing"].at("3"), 10.0);
}

TEST(Cli, ProfileFileIsAccepted) {
    const auto r = invoke({"evaluate", "--game", fixture("completion_flip.json"), "--profile",
                           fixture("profile_risky.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(result_of(r).at("profile").at("p1").at("s0"), json({{"risky", "1"}}));
}
