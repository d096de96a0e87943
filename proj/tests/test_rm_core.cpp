#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lotad/reward_machine.hpp"
#include "lotad/rm_text.hpp"
#include "lotad/rng.hpp"
#include "support/oracles.hpp"
#include "support/test_data.hpp"

using namespace lotad;

TEST_CASE("step follows defined transitions and self-loops otherwise") {
    auto rm = testdata::chain_machine();
    CHECK(rm.step("u-1", "a") == rm.state_id("u0"));
    CHECK(rm.step("u-1", "b") == rm.state_id("u-1")); // undefined -> self-loop
    CHECK(rm.step("u*", "a") == rm.state_id("u*"));   // goals have no outgoing edges
    CHECK_THROWS_WITH_AS(rm.step("u-1", "zz"), doctest::Contains("unknown symbol"), Error);
    CHECK_THROWS_WITH_AS(rm.step("nope", "a"), doctest::Contains("unknown symbol"), Error);
}

TEST_CASE("sigma rewards exactly the entry into a goal state") {
    auto rm = testdata::chain_machine();
    CHECK(rm.score("u0", "u*") == 1);
    CHECK(rm.score("u0", "u0") == 0);
    CHECK(rm.score("u*", "u*") == 0);
}

TEST_CASE("event sets fold in lexicographic order") {
    auto rm = testdata::chain_machine();
    int init = rm.initial();
    CHECK(rm.step_event_set(init, {}) == init);
    CHECK(rm.step_event_set(init, {"a", "b"}) == rm.state_id("u*"));
    CHECK(rm.step_event_set(init, {"b"}) == init);
}

TEST_CASE("acceptance folds event sets from the initial state") {
    auto rm = testdata::chain_machine();
    CHECK(rm.accepts({{"a"}, {"b"}}));
    CHECK_FALSE(rm.accepts({}));
    CHECK_FALSE(rm.accepts({{"b"}, {"a"}}));
}

TEST_CASE("construction enforces the task-completion invariants") {
    RmSpec s;
    s.states = {"u0", "u1"};
    s.initial = "u0";
    s.goals = {"u1"};
    s.alphabet = {"a"};

    SUBCASE("duplicate transition is nondeterminism") {
        s.states.push_back("u2");
        s.transitions = {{"u0", "a", "u1"}, {"u0", "a", "u2"}};
        CHECK_THROWS_WITH_AS(RewardMachine::build(s), doctest::Contains("nondeterministic"), Error);
    }
    SUBCASE("goal with outgoing transition") {
        s.transitions = {{"u1", "a", "u0"}};
        CHECK_THROWS_WITH_AS(RewardMachine::build(s), doctest::Contains("goal"), Error);
    }
    SUBCASE("goal and sink are disjoint") {
        s.sinks = {"u1"};
        CHECK_THROWS_WITH_AS(RewardMachine::build(s), doctest::Contains("goal and sink"), Error);
    }
    SUBCASE("unknown endpoint") {
        s.transitions = {{"u0", "a", "zz"}};
        CHECK_THROWS_WITH_AS(RewardMachine::build(s), doctest::Contains("unknown state"), Error);
    }
}

TEST_CASE("parse/serialize round-trips the paper machines") {
    for (auto* path : {"maps/four_buttons.rm", "maps/repairs.rm", "maps/coop_buttons.rm"}) {
        auto rm = load_rm_file(testdata::repo_path(path));
        auto again = parse_rm(serialize_rm(rm));
        CHECK(again == rm);
    }
}

TEST_CASE("parse errors carry line numbers") {
    SUBCASE("nondeterministic") {
        const char* text =
            "states: u0 u1 u2\ninitial: u0\ngoals: u2\nalphabet: a\n"
            "trans: u0 a u1\ntrans: u0 a u2\n";
        CHECK_THROWS_WITH_AS(parse_rm(text), doctest::Contains("nondeterministic"), ParseError);
    }
    SUBCASE("goal with outgoing edge") {
        const char* text =
            "states: u0 u1\ninitial: u0\ngoals: u1\nalphabet: a\ntrans: u1 a u0\n";
        CHECK_THROWS_WITH_AS(parse_rm(text), doctest::Contains("goal"), ParseError);
    }
    SUBCASE("malformed line") {
        const char* text = "states: u0\ninitial: u0\nalphabet: a\ntrans: u0 a\n";
        CHECK_THROWS_WITH_AS(parse_rm(text), doctest::Contains("line 4"), ParseError);
    }
    SUBCASE("unknown section") {
        CHECK_THROWS_WITH_AS(parse_rm("stattes: u0\n"), doctest::Contains("line 1"), ParseError);
    }
}

TEST_CASE("round-trip identity on random machines") {
    Rng rng(7);
    for (int i = 0; i < 40; ++i) {
        auto rm = oracle::random_rm(rng, 6, 4);
        CHECK(parse_rm(serialize_rm(rm)) == rm);
    }
}

TEST_CASE("goal absorption: folding any trace from a goal state stays put") {
    Rng rng(11);
    for (int i = 0; i < 25; ++i) {
        auto rm = oracle::random_rm(rng, 6, 4);
        for (int g : rm.goal_states()) {
            int u = g;
            for (int t = 0; t < 20; ++t)
                u = rm.step(u, static_cast<int>(rng.next_below(static_cast<uint64_t>(rm.num_events()))));
            CHECK(u == g);
        }
    }
}

TEST_CASE("cumulative sigma is 1 on accepted traces and 0 otherwise") {
    Rng rng(13);
    for (int i = 0; i < 60; ++i) {
        auto rm = oracle::random_rm(rng, 6, 4);
        int u = rm.initial();
        int total = 0;
        for (int t = 0; t < 30; ++t) {
            int e = static_cast<int>(rng.next_below(static_cast<uint64_t>(rm.num_events())));
            int v = rm.step(u, e);
            total += rm.score(u, v);
            u = v;
        }
        CHECK(total == (rm.is_goal(u) ? 1 : 0));
    }
}

TEST_CASE("completed step never fails on in-alphabet events") {
    auto rm = testdata::four_buttons_rm();
    for (int u = 0; u < rm.num_states(); ++u)
        for (int e = 0; e < rm.num_events(); ++e)
            CHECK(rm.step(u, e) >= 0);
}
