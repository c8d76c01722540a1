#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "orsplit/engine.hpp"
#include "orsplit/parser.hpp"

using namespace orsplit;

namespace {

std::shared_ptr<Program> tiny() { return parse_program("p(0)."); }

std::string store_snapshot(const Engine& e) {
    std::string s;
    for (uint64_t v = 0; v < e.var_count(); ++v) {
        s += std::to_string(v) + "=";
        s += e.binding(v) ? e.render(e.binding(v)) : "?";
        s += ";";
    }
    return s;
}

// Independent 8-queens oracle: permutation enumeration with a diagonal check.
int queens_brute_force(int n) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 1);
    int count = 0;
    do {
        bool ok = true;
        for (int i = 0; i < n && ok; ++i)
            for (int j = i + 1; j < n && ok; ++j)
                if (std::abs(perm[i] - perm[j]) == j - i) ok = false;
        if (ok) ++count;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return count;
}

const char* kQueens = R"(
:- parallel select/3.
range(L, H, []) :- L > H.
range(L, H, [L|T]) :- L =< H, L1 is L + 1, range(L1, H, T).
select(X, [X|T], T).
select(X, [H|T], [H|R]) :- select(X, T, R).
queens(N, Qs) :- range(1, N, Ns), solve(Ns, [], Qs).
solve([], Qs, Qs).
solve(Unplaced, Safe, Qs) :-
    select(Q, Unplaced, Rest),
    noattack(Q, Safe, 1),
    solve(Rest, [Q|Safe], Qs).
noattack(_, [], _).
noattack(Q, [P|Ps], D) :-
    Q =\= P + D, Q =\= P - D,
    D1 is D + 1,
    noattack(Q, Ps, D1).
)";

}  // namespace

TEST_CASE("unify computes an mgu") {
    Engine e(0, tiny());
    TermArena& a = e.arena();
    uint64_t base = e.new_vars(2);
    Term x = a.variable(base), y = a.variable(base + 1);
    Symbol f = intern("f");
    Term lhs_args[2] = {x, a.atom(intern("a"))};
    Term rhs_args[2] = {a.atom(intern("b")), y};
    Term lhs = a.make(f, lhs_args);
    Term rhs = a.make(f, rhs_args);
    REQUIRE(e.unify_terms(lhs, rhs));
    CHECK(e.render(x) == "b");
    CHECK(e.render(y) == "a");
    CHECK(e.trail_size() == 2);
}

TEST_CASE("unify X with X adds no bindings") {
    Engine e(0, tiny());
    uint64_t base = e.new_vars(1);
    Term x = e.arena().variable(base);
    Term x2 = e.arena().variable(base);
    REQUIRE(e.unify_terms(x, x2));
    CHECK(e.trail_size() == 0);
}

TEST_CASE("clash fails and leaves the trail unchanged") {
    Engine e(0, tiny());
    Term a1 = e.arena().atom(intern("a"));
    Term b1 = e.arena().atom(intern("b"));
    CHECK_FALSE(e.unify_terms(a1, b1));
    CHECK(e.trail_size() == 0);

    // partial progress must be rolled back too
    uint64_t base = e.new_vars(2);
    Term x = e.arena().variable(base), y = e.arena().variable(base + 1);
    Symbol f = intern("f");
    Term l_args[2] = {x, a1};
    Term r_args[2] = {y, b1};
    Term l = e.arena().make(f, l_args);
    Term r = e.arena().make(f, r_args);
    CHECK_FALSE(e.unify_terms(l, r));
    CHECK(e.trail_size() == 0);
    CHECK(e.binding(base) == nullptr);
}

TEST_CASE("trail round-trip: undo restores the store byte-for-byte") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 50; ++round) {
        Engine e(0, tiny());
        TermArena& a = e.arena();
        uint64_t base = e.new_vars(20);
        std::vector<std::pair<uint64_t, std::string>> marks;  // (trail mark, snapshot)
        for (int step = 0; step < 60; ++step) {
            if (rng() % 4 == 0) marks.emplace_back(e.trail_size(), store_snapshot(e));
            uint64_t v = base + rng() % 20;
            Term value;
            switch (rng() % 3) {
                case 0: value = a.integer(int64_t(rng() % 100)); break;
                case 1: value = a.atom(intern("k" + std::to_string(rng() % 5))); break;
                default: value = a.variable(base + rng() % 20); break;
            }
            e.unify_terms(a.variable(v), value);
        }
        while (!marks.empty()) {
            // undo to a random recorded mark; earlier snapshots must reappear
            size_t pick = rng() % marks.size();
            e.undo_to(marks[pick].first);
            CHECK(store_snapshot(e) == marks[pick].second);
            marks.resize(pick);
        }
    }
}

TEST_CASE("member enumerates in clause order then exhausts") {
    auto prog = parse_program("member(X, [X|_]).\nmember(X, [_|T]) :- member(X, T).\n");
    Query q = parse_query(*prog, "member(X, [1,2,3]).");
    SequentialResult r = collect_solutions(prog, q);
    REQUIRE(r.solutions.size() == 3);
    CHECK(r.solutions[0] == "X = 1");
    CHECK(r.solutions[1] == "X = 2");
    CHECK(r.solutions[2] == "X = 3");
}

TEST_CASE("side effect event is emitted before the write is performed") {
    auto prog = parse_program("p :- write(hello), nl.");
    Query q = parse_query(*prog, "p.");
    Engine e(0, prog);
    e.register_query(q);
    e.start();
    EngineEvent ev = e.run_until_event();
    CHECK(ev.kind == EventKind::SideEffect);
    CHECK(ev.text == "hello");
    ev = e.run_until_event();
    CHECK(ev.kind == EventKind::SideEffect);
    CHECK(ev.text == "\n");
    ev = e.run_until_event();
    CHECK(ev.kind == EventKind::Solution);
}

TEST_CASE("zero matching clauses exhausts immediately") {
    auto prog = parse_program("p(0).");
    Query q = parse_query(*prog, "nosuch(X).");
    SequentialResult r = collect_solutions(prog, q);
    CHECK(r.solutions.empty());
}

TEST_CASE("backtrack_to pops deeper choice-points and untrails") {
    auto prog = parse_program("p(1).\np(2).\np(3).\n");
    Query q = parse_query(*prog, "p(X), p(Y), p(Z).");
    Engine e(0, prog);
    e.register_query(q);
    e.start();
    EngineEvent ev = e.run_until_event();
    REQUIRE(ev.kind == EventKind::Solution);
    REQUIRE(e.stack().size() == 3);
    CHECK(e.binding(0) != nullptr);

    SUBCASE("to the bottom") {
        uint64_t mark0 = e.stack()[0].trail_mark;
        e.backtrack_to(0);
        CHECK(e.stack().size() == 1);
        CHECK(e.trail_size() == mark0);
        CHECK(e.binding(0) == nullptr);  // X was bound after cp0 was pushed
    }
    SUBCASE("to the current top is an identity") {
        auto fp = e.stack().size();
        e.backtrack_to(2);
        CHECK(e.stack().size() == fp);
    }
    SUBCASE("out of range") { CHECK_THROWS_AS(e.backtrack_to(7), EngineError); }
}

TEST_CASE("8-queens matches the independent permutation oracle") {
    int expected = queens_brute_force(8);
    CHECK(expected == 92);
    auto prog = parse_program(kQueens);
    Query q = parse_query(*prog, "queens(8, Qs).");
    SequentialResult r = collect_solutions(prog, q);
    CHECK(int(r.solutions.size()) == expected);
}

TEST_CASE("limit cuts enumeration") {
    auto prog = parse_program(kQueens);
    Query q = parse_query(*prog, "queens(6, Qs).");
    SequentialResult all = collect_solutions(prog, q);
    SequentialResult one = collect_solutions(prog, q, 1);
    REQUIRE(one.solutions.size() == 1);
    CHECK(one.solutions[0] == all.solutions[0]);
}

TEST_CASE("sequential runs are deterministic") {
    auto prog = parse_program(kQueens);
    Query q = parse_query(*prog, "queens(6, Qs).");
    SequentialResult a = collect_solutions(prog, q);
    SequentialResult b = collect_solutions(prog, q);
    CHECK(a.solutions == b.solutions);
    CHECK(a.output == b.output);
}

TEST_CASE("arithmetic builtins") {
    auto prog = parse_program(
        "t1(X) :- X is 3 * 4 + 2.\n"
        "t2 :- 7 mod 3 =:= 1, 7 // 2 =:= 3, -7 mod 3 =:= 2.\n"
        "t3 :- 1 < 2, 2 =< 2, 3 > 1, 3 >= 3, 1 =\\= 2.\n"
        "t4 :- f(a) == f(a), f(a) \\== f(b).\n");
    CHECK(collect_solutions(prog, parse_query(*prog, "t1(X).")).solutions ==
          std::vector<std::string>{"X = 14"});
    CHECK(collect_solutions(prog, parse_query(*prog, "t1(14).")).solutions.size() == 1);
    CHECK(collect_solutions(prog, parse_query(*prog, "t2.")).solutions.size() == 1);
    CHECK(collect_solutions(prog, parse_query(*prog, "t3.")).solutions.size() == 1);
    CHECK(collect_solutions(prog, parse_query(*prog, "t4.")).solutions.size() == 1);
}

TEST_CASE("poll points honor the configured quantum") {
    auto prog = parse_program(kQueens);
    Query q = parse_query(*prog, "queens(5, Qs).");
    Engine e(0, prog);
    e.register_query(q);
    e.set_poll_quantum(50);
    e.start();
    int polls = 0, solutions = 0;
    for (;;) {
        EngineEvent ev = e.run_until_event();
        if (ev.kind == EventKind::PollPoint) {
            ++polls;
            CHECK(ev.reductions == 50);
        } else if (ev.kind == EventKind::Solution) {
            ++solutions;
        } else if (ev.kind == EventKind::Exhausted) {
            break;
        }
    }
    CHECK(polls > 0);
    CHECK(solutions == 10);  // queens(5) has 10 solutions
}
