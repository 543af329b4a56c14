#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <set>
#include <tuple>

#include "arena/envs.hpp"
#include "arena/errors.hpp"
#include "support/reference_models.hpp"

using namespace arena;
using namespace arena::envs;

namespace {

// Order-independent comparison of one model row against the reference.
bool rows_equal(std::vector<Outcome> got, std::vector<refmodel::Entry> want) {
    auto key = [](const auto& o) {
        return std::tuple(o.next_state, o.prob_num, o.prob_den, o.reward, o.terminated, o.success);
    };
    auto ref_key = [](const refmodel::Entry& e) {
        return std::tuple(e.next, e.prob_num, e.prob_den, e.reward, e.terminated, e.success);
    };
    if (got.size() != want.size()) return false;
    std::sort(got.begin(), got.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
    std::sort(want.begin(), want.end(),
              [&](const auto& a, const auto& b) { return ref_key(a) < ref_key(b); });
    for (std::size_t i = 0; i < got.size(); ++i)
        if (key(got[i]) != ref_key(want[i])) return false;
    return true;
}

void check_conformance(const EnvId& id, const refmodel::Table& ref) {
    const EnvModel model = enumerate_model(id);
    REQUIRE(model.n_states == observation_count(id));
    REQUIRE(model.n_actions == action_count(id));
    REQUIRE(ref.size() == static_cast<std::size_t>(model.n_states) * model.n_actions);
    for (const auto& [key, entries] : ref) {
        CAPTURE(key.first);
        CAPTURE(key.second);
        CHECK(rows_equal(model.at(key.first, key.second), entries));
    }
}

}  // namespace

TEST_CASE("index helpers") {
    CHECK(grid_index(3, 3, 4) == 15);
    CHECK(grid_index(0, 0, 12) == 0);
    CHECK(grid_index(3, 11, 12) == 47);
    CHECK_THROWS_AS(grid_index(0, 12, 12), ContractViolation);

    CHECK(taxi_encode(0, 0, 0, 1) == 1);
    CHECK(taxi_encode(0, 0, 0, 0) == 0);
    CHECK(taxi_encode(4, 4, 4, 3) == 499);
    CHECK_THROWS_AS(taxi_encode(5, 0, 0, 0), ContractViolation);

    // bijectivity
    std::set<std::int64_t> seen;
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c)
            for (int p = 0; p < 5; ++p)
                for (int d = 0; d < 4; ++d) {
                    const auto s = taxi_encode(r, c, p, d);
                    seen.insert(s);
                    const TaxiState t = taxi_decode(s);
                    CHECK(t.row == r);
                    CHECK(t.col == c);
                    CHECK(t.passenger == p);
                    CHECK(t.destination == d);
                }
    CHECK(seen.size() == 500);
}

TEST_CASE("resets") {
    Rng rng(1);
    CliffWalkingEnv cliff;
    CHECK(cliff.reset(rng).observation == 36);

    FrozenLakeEnv lake(false, false);
    CHECK(lake.reset(rng).observation == 0);

    TaxiEnv taxi;
    for (int i = 0; i < 200; ++i) {
        const auto r = taxi.reset(rng);
        CHECK(r.observation >= 0);
        CHECK(r.observation < 500);
        const TaxiState t = taxi_decode(r.observation);
        CHECK(t.passenger != t.destination);
        CHECK(r.reward == 0.0);
        CHECK_FALSE(r.terminated);
    }
}

TEST_CASE("cliffwalking steps") {
    Rng rng(1);
    CliffWalkingEnv env;
    env.reset(rng);

    SUBCASE("stepping into the cliff returns to start without terminating") {
        const auto r = env.step(1, rng);  // right from 36 lands on the cliff
        CHECK(r.observation == 36);
        CHECK(r.reward == -100.0);
        CHECK_FALSE(r.terminated);
    }
    SUBCASE("ordinary move costs -1") {
        const auto r = env.step(0, rng);  // up
        CHECK(r.observation == 24);
        CHECK(r.reward == -1.0);
        CHECK_FALSE(r.terminated);
    }
    SUBCASE("reaching the goal terminates with success") {
        env.set_state(35);  // row 2, col 11
        const auto r = env.step(2, rng);  // down
        CHECK(r.observation == 47);
        CHECK(r.reward == -1.0);
        CHECK(r.terminated);
        CHECK(r.success);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(env.step(4, rng), ContractViolation);
        env.set_state(35);
        env.step(2, rng);
        CHECK_THROWS_AS(env.step(0, rng), UsageError);
    }
}

TEST_CASE("frozenlake steps") {
    Rng rng(1);
    FrozenLakeEnv env(false, false);
    env.reset(rng);

    env.set_state(14);
    const auto r = env.step(2, rng);  // RIGHT into the goal
    CHECK(r.observation == 15);
    CHECK(r.reward == 1.0);
    CHECK(r.terminated);
    CHECK(r.success);

    env.set_state(4);  // (1,0); DOWN leads to (2,0)=8
    const auto r2 = env.step(1, rng);
    CHECK(r2.observation == 8);
    CHECK(r2.reward == 0.0);

    env.set_state(0);
    const auto r3 = env.step(1, rng);  // DOWN into hole at 4
    CHECK(r3.observation == 4);
    CHECK(r3.terminated);
    CHECK_FALSE(r3.success);
    CHECK(r3.reward == 0.0);
}

TEST_CASE("taxi rewards and walls") {
    Rng rng(1);
    TaxiEnv env;
    env.reset(rng);

    // illegal pickup
    env.set_state(taxi_encode(2, 2, 0, 1));
    CHECK(env.step(4, rng).reward == -10.0);

    // legal pickup at R
    env.set_state(taxi_encode(0, 0, 0, 1));
    const auto r = env.step(4, rng);
    CHECK(r.reward == -1.0);
    CHECK(taxi_decode(r.observation).passenger == 4);

    // successful dropoff at G
    env.set_state(taxi_encode(0, 4, 4, 1));
    const auto d = env.step(5, rng);
    CHECK(d.reward == 20.0);
    CHECK(d.terminated);
    CHECK(d.success);
    CHECK(taxi_decode(d.observation).passenger == 1);

    // wall between (0,1) and (0,2): east blocked
    env.set_state(taxi_encode(0, 1, 0, 1));
    CHECK(taxi_decode(env.step(2, rng).observation).col == 1);
    // open corridor in row 2
    env.set_state(taxi_encode(2, 1, 0, 1));
    CHECK(taxi_decode(env.step(2, rng).observation).col == 2);
}

TEST_CASE("model conformance against the brute-force reference") {
    check_conformance({Task::CliffWalking, false}, refmodel::cliff_walking());
    check_conformance({Task::Taxi, false}, refmodel::taxi());
    check_conformance({Task::FrozenLake4x4, false}, refmodel::frozen_lake(false, false));
    check_conformance({Task::FrozenLake4x4, true}, refmodel::frozen_lake(false, true));
    check_conformance({Task::FrozenLake8x8, false}, refmodel::frozen_lake(true, false));
    check_conformance({Task::FrozenLake8x8, true}, refmodel::frozen_lake(true, true));
    CHECK_THROWS_AS(enumerate_model({Task::FlappyBird, false}), UnsupportedEnvironment);
}

TEST_CASE("model facts from the spec sheet") {
    const EnvModel cliff = enumerate_model({Task::CliffWalking, false});
    for (std::int64_t s = 0; s < cliff.n_states; ++s)
        for (int a = 0; a < 4; ++a) CHECK(cliff.at(s, a).size() == 1);

    const EnvModel taxi = enumerate_model({Task::Taxi, false});
    CHECK(taxi.n_states == 500);
    CHECK(taxi.n_actions == 6);
    std::set<double> rewards;
    for (std::int64_t s = 0; s < 500; ++s)
        for (int a = 0; a < 6; ++a)
            for (const Outcome& o : taxi.at(s, a)) rewards.insert(o.reward);
    CHECK(rewards == std::set<double>{-10.0, -1.0, 20.0});

    // slippery (0, LEFT): left and up clamp in place, down moves to 4
    const EnvModel slip = enumerate_model({Task::FrozenLake4x4, true});
    const auto& row = slip.at(0, 0);
    REQUIRE(row.size() == 3);
    std::multiset<std::int64_t> nexts;
    for (const Outcome& o : row) {
        CHECK(o.prob_num == 1);
        CHECK(o.prob_den == 3);
        nexts.insert(o.next_state);
    }
    CHECK(nexts == std::multiset<std::int64_t>{0, 0, 4});
}

TEST_CASE("taxi reachability: 400 mid-episode states plus 4 post-success") {
    const EnvModel model = enumerate_model({Task::Taxi, false});

    std::set<std::int64_t> frontier;
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c)
            for (int p = 0; p < 4; ++p)
                for (int d = 0; d < 4; ++d)
                    if (p != d) frontier.insert(taxi_encode(r, c, p, d));
    CHECK(frontier.size() == 300);

    std::set<std::int64_t> mid(frontier);
    std::queue<std::int64_t> queue;
    for (auto s : frontier) queue.push(s);
    std::set<std::int64_t> post;
    while (!queue.empty()) {
        const auto s = queue.front();
        queue.pop();
        for (int a = 0; a < 6; ++a) {
            for (const Outcome& o : model.at(s, a)) {
                if (o.terminated) {
                    post.insert(o.next_state);
                } else if (mid.insert(o.next_state).second) {
                    queue.push(o.next_state);
                }
            }
        }
    }
    CHECK(mid.size() == 400);
    CHECK(post.size() == 4);
    for (auto s : post) CHECK_FALSE(mid.contains(s));
}

TEST_CASE("sampled steps agree with the model") {
    // Every sampled transition must appear in the model row; deterministic
    // rows must match exactly on every sample.
    const EnvId ids[] = {{Task::CliffWalking, false},
                         {Task::Taxi, false},
                         {Task::FrozenLake4x4, false},
                         {Task::FrozenLake4x4, true},
                         {Task::FrozenLake8x8, true}};
    for (const EnvId& id : ids) {
        CAPTURE(env_name(id));
        const EnvModel model = enumerate_model(id);
        auto env = make_env(id);
        auto* tab = dynamic_cast<TabularEnv*>(env.get());
        REQUIRE(tab != nullptr);
        Rng rng(3);
        Rng pick(17);
        for (int trial = 0; trial < 400; ++trial) {
            const std::int64_t s =
                static_cast<std::int64_t>(pick.uniform_below(static_cast<std::uint64_t>(model.n_states)));
            const int a = static_cast<int>(pick.uniform_below(static_cast<std::uint64_t>(model.n_actions)));
            const auto& row = model.at(s, a);
            // terminal-source rows are never exercised by step()
            if (row.size() == 1 && row[0].terminated && row[0].next_state == s) continue;
            tab->set_state(s);
            const StepResult r = env->step(a, rng);
            bool found = false;
            for (const Outcome& o : row) {
                if (o.next_state == r.observation && o.reward == r.reward &&
                    o.terminated == r.terminated && o.success == r.success)
                    found = true;
            }
            CHECK(found);
            if (row.size() == 1) CHECK(row[0].next_state == r.observation);
        }
    }
}

TEST_CASE("slippery sampling statistics on a few pairs") {
    const EnvModel model = enumerate_model({Task::FrozenLake4x4, true});
    FrozenLakeEnv env(false, true);
    Rng rng(1);
    for (const auto& [s, a] : std::vector<std::pair<std::int64_t, int>>{{0, 0}, {8, 2}, {6, 1}}) {
        std::map<std::int64_t, double> expected;
        for (const Outcome& o : model.at(s, a))
            expected[o.next_state] += static_cast<double>(o.prob_num) / o.prob_den;
        std::map<std::int64_t, long> counts;
        const int n = 30000;
        for (int i = 0; i < n; ++i) {
            env.set_state(s);
            ++counts[env.step(a, rng).observation];
        }
        for (const auto& [next, p] : expected) {
            CAPTURE(s);
            CAPTURE(a);
            CAPTURE(next);
            CHECK(std::abs(static_cast<double>(counts[next]) / n - p) < 0.02);
        }
    }
}

TEST_CASE("reward sets over random rollouts") {
    const std::map<std::string, std::set<double>> allowed = {
        {"cliffwalking", {-1.0, -100.0}},
        {"taxi", {-1.0, -10.0, 20.0}},
        {"frozenlake4x4-slippery", {0.0, 1.0}},
        {"frozenlake8x8", {0.0, 1.0}},
        {"flappybird", {1.0}},
    };
    const EnvId ids[] = {{Task::CliffWalking, false},
                         {Task::Taxi, false},
                         {Task::FrozenLake4x4, true},
                         {Task::FrozenLake8x8, false},
                         {Task::FlappyBird, false}};
    for (const EnvId& id : ids) {
        CAPTURE(env_name(id));
        const auto& ok = allowed.at(env_name(id));
        auto env = make_env(id);
        Rng rng(5);
        Rng act(9);
        auto r = env->reset(rng);
        for (int i = 0; i < 5000; ++i) {
            r = env->step(static_cast<int>(act.uniform_below(static_cast<std::uint64_t>(env->action_count()))), rng);
            CHECK(ok.contains(r.reward));
            CHECK_FALSE((r.terminated && r.truncated));
            if (is_tabular(id) && r.success) CHECK(r.terminated);
            if (r.terminated || r.truncated) r = env->reset(rng);
        }
    }
}

TEST_CASE("cliff observations never land on cliff or goal mid-episode") {
    CliffWalkingEnv env;
    Rng rng(2);
    Rng act(4);
    auto r = env.reset(rng);
    for (int i = 0; i < 20000; ++i) {
        r = env.step(static_cast<int>(act.uniform_below(4)), rng);
        if (!r.terminated) {
            CHECK(r.observation != 47);
            CHECK_FALSE((r.observation >= 37 && r.observation <= 46));
        }
        if (r.terminated || r.truncated) r = env.reset(rng);
    }
}

TEST_CASE("step limits truncate") {
    Rng rng(1);
    FrozenLakeEnv lake(false, false);  // default limit 100
    lake.reset(rng);
    for (int i = 0; i < 99; ++i) {
        const auto r = lake.step(0, rng);  // LEFT against the wall, stays at 0
        CHECK_FALSE(r.truncated);
    }
    const auto last = lake.step(0, rng);
    CHECK(last.truncated);
    CHECK_FALSE(last.terminated);
    CHECK_THROWS_AS(lake.step(0, rng), UsageError);

    // terminal transition on the limit step is terminated, not truncated
    FrozenLakeEnv lake2(false, false, 1);
    lake2.reset(rng);
    lake2.set_state(14);
    const auto r2 = lake2.step(2, rng);
    CHECK(r2.terminated);
    CHECK_FALSE(r2.truncated);
}

TEST_CASE("same seed, same trace") {
    for (const EnvId id : {EnvId{Task::Taxi, false}, EnvId{Task::FrozenLake4x4, true},
                           EnvId{Task::FlappyBird, false}}) {
        CAPTURE(env_name(id));
        auto run = [&](std::uint64_t seed) {
            std::vector<std::tuple<std::int64_t, double, double, double, bool>> trace;
            auto env = make_env(id);
            Rng rng(seed);
            Rng act(seed + 1);
            auto r = env->reset(rng);
            for (int i = 0; i < 3000; ++i) {
                r = env->step(static_cast<int>(act.uniform_below(static_cast<std::uint64_t>(env->action_count()))), rng);
                trace.emplace_back(r.observation, r.o1, r.o2, r.reward, r.terminated);
                if (r.terminated || r.truncated) r = env->reset(rng);
            }
            return trace;
        };
        CHECK(run(42) == run(42));
    }
}

TEST_CASE("flappy observation and physics") {
    FlappyConfig cfg;

    SUBCASE("observation normalization") {
        FlappyState s;
        s.bird_y = 200.0;
        s.pipes = {{57.0, 200.0, false}};
        const auto obs = flappy_observe(s, cfg);
        CHECK(obs.o1 == 0.0);  // zero distance
        CHECK(obs.o2 == 0.0);  // aligned with the hole

        FlappyState far;
        far.bird_y = 250.0;
        far.pipes = {{454.36, 252.048, false}};
        const auto o = flappy_observe(far, cfg);
        CHECK(std::lround(100.0 * o.o1) == 138);
        CHECK(std::lround(1000.0 * o.o2) == -4);
    }

    SUBCASE("no pipe ahead is a contract violation") {
        FlappyState s;
        s.pipes = {{10.0, 200.0, false}};
        CHECK_THROWS_AS(flappy_observe(s, cfg), ContractViolation);
    }

    SUBCASE("o1 stays nonnegative and success does not terminate") {
        FlappyBirdEnv env;
        Rng rng(1);
        Rng act(2);
        auto r = env.reset(rng);
        int successes = 0;
        for (int i = 0; i < 20000; ++i) {
            CHECK(r.o1 >= 0.0);
            // bias toward flapping when below the next hole keeps some runs alive
            const int a = act.uniform_below(10) < 3 ? 1 : 0;
            r = env.step(a, rng);
            if (r.success) {
                ++successes;
                CHECK_FALSE(r.terminated);
            }
            if (r.terminated || r.truncated) r = env.reset(rng);
        }
        CHECK(env.state().score >= 0);
    }

    SUBCASE("score counts passed pipes") {
        FlappyBirdEnv env;
        Rng rng(1);
        auto r = env.reset(rng);
        long score_events = 0;
        // hold a glide: alternate flaps to hover near the start height
        for (int i = 0; i < 400 && !r.terminated; ++i) {
            r = env.step(i % 9 == 0 ? 1 : 0, rng);
            if (r.success) ++score_events;
        }
        CHECK(env.state().score == score_events);
    }
}
