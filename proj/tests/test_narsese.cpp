#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "arena/errors.hpp"
#include "arena/narsese.hpp"
#include "arena/rng.hpp"

using namespace arena;
using namespace arena::narsese;

TEST_CASE("state events") {
    CHECK(encode_state_event("s14") == "s14. :|:");
    CHECK(encode_state_event("138_-4") == "138_-4. :|:");
    CHECK_THROWS_AS(encode_state_event(""), EncodingError);
    CHECK_THROWS_AS(encode_state_event("a b"), EncodingError);
}

TEST_CASE("goal lines") {
    CHECK(encode_goal_achieved() == "G. :|:");
    CHECK(encode_goal_event() == "G! :|:");
    // pure functions: identical bytes on every call
    CHECK(encode_goal_event() == encode_goal_event());
    CHECK(encode_state_event("s3") == encode_state_event("s3"));
}

TEST_CASE("setop registration") {
    const std::vector<std::string> lake_ops = {"left", "down", "right", "up"};
    const auto lines = setop_commands(lake_ops);
    REQUIRE(lines.size() == 4);
    CHECK(lines[0] == "*setopname 1 ^left");
    CHECK(lines[3] == "*setopname 4 ^up");

    CHECK_THROWS_AS(setop_commands({}), EncodingError);
    CHECK_THROWS_AS(setop_commands({"a", "a"}), EncodingError);
    CHECK_THROWS_AS(setop_commands(std::vector<std::string>(11, "x")), EncodingError);

    const auto taxi = register_ops({"south", "north", "east", "west", "pickup", "dropoff"});
    REQUIRE(taxi.size() == 6);
    for (int i = 0; i < 6; ++i) CHECK(taxi[i].index == i + 1);
    CHECK(taxi[4].token == "^pickup");
}

TEST_CASE("execution parsing") {
    const auto ops = register_ops({"left", "down", "right", "up"});

    auto hit = parse_execution("^left executed with args", ops);
    REQUIRE(hit.has_value());
    CHECK(hit->token == "^left");
    CHECK(hit->index == 1);

    CHECK_FALSE(parse_execution("Input: s14. :|:", ops).has_value());
    CHECK_FALSE(parse_execution("", ops).has_value());
    CHECK_THROWS_AS(parse_execution("^fly executed", ops), UnknownOpError);

    // mentions of an op without the execution shape do not fire
    CHECK_FALSE(parse_execution("Derived: <(s4 &/ ^right) =/> G>.", ops).has_value());

    // configurable pattern
    auto custom = parse_execution("EXE ^up()", ops, "EXE %op%(");
    REQUIRE(custom.has_value());
    CHECK(custom->index == 4);
}

TEST_CASE("parse never fires on encoder output") {
    const auto ops = register_ops({"left", "down", "right", "up"});
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const std::string token =
            (i % 2 == 0) ? "s" + std::to_string(rng.uniform_below(500))
                         : std::to_string(static_cast<long>(rng.uniform_below(300)) - 150) + "_" +
                               std::to_string(static_cast<long>(rng.uniform_below(20)) - 10);
        CHECK_FALSE(parse_execution(encode_state_event(token), ops).has_value());
    }
    CHECK_FALSE(parse_execution(encode_goal_event(), ops).has_value());
    CHECK_FALSE(parse_execution(encode_goal_achieved(), ops).has_value());
}

TEST_CASE("line classification") {
    CHECK(classify_line("s14. :|:") == LineKind::BeliefEvent);
    CHECK(classify_line("G. :|:") == LineKind::BeliefEvent);
    CHECK(classify_line("G! :|:") == LineKind::GoalEvent);
    CHECK(classify_line("*setopname 1 ^left") == LineKind::Config);
    CHECK(classify_line("^left executed with args") == LineKind::Execution);
    CHECK(classify_line("hello") == LineKind::Other);
}

TEST_CASE("flappy token") {
    CHECK(flappy_token(1.38, -0.004) == "138_-4");
    CHECK(flappy_token(0.0, 0.0) == "0_0");
    // round half away from zero
    CHECK(flappy_token(0.005, -0.0005) == "1_-1");
}

TEST_CASE("flappy q-index") {
    CHECK(flappy_qindex(1.38, -0.004) == 142);
    CHECK(flappy_qindex(0.0, 0.0) == 0);
    // sign collision is inherent to the absolute-value mapping
    CHECK(flappy_qindex(-1.38, 0.004) == 142);
}

TEST_CASE("token injective on the rounded pair, q-index not") {
    Rng rng(11);
    std::set<std::pair<long, long>> pairs;
    std::set<std::string> tokens;
    for (int i = 0; i < 2000; ++i) {
        const double o1 = (rng.uniform_real() - 0.5) * 4.0;
        const double o2 = (rng.uniform_real() - 0.5) * 0.2;
        const long a = std::lround(100.0 * o1);
        const long b = std::lround(1000.0 * o2);
        pairs.insert({a, b});
        tokens.insert(flappy_token(o1, o2));
    }
    CHECK(pairs.size() == tokens.size());
    CHECK(flappy_qindex(0.01, 0.0) == flappy_qindex(-0.01, 0.0));
}

TEST_CASE("golden transcript replay") {
    std::ifstream in(std::string(TESTS_DATA_DIR) + "/golden_session.narsese");
    REQUIRE(in.good());
    const auto ops = register_ops({"left", "down", "right", "up"});

    std::vector<std::string> executions;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const LineKind kind = classify_line(line);
        const auto op = parse_execution(line, ops);
        if (op.has_value()) {
            CHECK(kind == LineKind::Execution);
            executions.push_back(op->token);
        } else {
            CHECK(kind != LineKind::Execution);
        }
    }
    CHECK(executions == std::vector<std::string>{"^down", "^right", "^up"});
}
