#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "orsplit/parser.hpp"

using namespace orsplit;

TEST_CASE("parallel directive is recorded") {
    auto prog = parse_program(":- parallel queens/2.\nqueens(N, Qs) :- solve(N, Qs).\n");
    CHECK(prog->is_parallel({intern("queens"), 2}));
    CHECK_FALSE(prog->is_parallel({intern("solve"), 2}));
    CHECK(prog->clauses().size() == 1);
}

TEST_CASE("rule with two body goals") {
    auto prog = parse_program("p(X) :- q(X), r(X).");
    REQUIRE(prog->clauses().size() == 1);
    const Clause& c = prog->clause(0);
    CHECK(c.body.size() == 2);
    CHECK(c.var_count == 1);
    CHECK(pred_key(c.head).arity == 1);
}

TEST_CASE("stray period is a located parse error") {
    try {
        parse_program("p(X) :- .");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
        CHECK(e.column == 9);
    }
}

TEST_CASE("facts, integers, lists, operators") {
    auto prog = parse_program(
        "f(1, -2, [a,b|T], T).\n"
        "g(X, Y) :- X is Y * 3 + 1, X =< 10, X =\\= 4.\n"
        "h([]).\n");
    CHECK(prog->clauses().size() == 3);
    const Clause& g = prog->clause(1);
    REQUIRE(g.body.size() == 3);
    CHECK(g.body[0]->functor == WellKnown::get().is_);
}

TEST_CASE("query parsing") {
    auto prog = parse_program("p(1).");
    Query q = parse_query(*prog, "queens(10, Qs).");
    CHECK(q.goals.size() == 1);
    CHECK(q.var_count == 1);
    CHECK(q.var_names[0] == "Qs");

    Query q2 = parse_query(*prog, "member(X, [1,2]), write(X).");
    CHECK(q2.goals.size() == 2);

    CHECK_THROWS_AS(parse_query(*prog, ""), ParseError);
    CHECK_THROWS_AS(parse_query(*prog, "p(X)"), ParseError);  // missing '.'
}

TEST_CASE("comments and whitespace") {
    auto prog = parse_program("% header\np(a). % trailing\n% done\n");
    CHECK(prog->clauses().size() == 1);
}

TEST_CASE("error locations are 1-based") {
    try {
        parse_program("p(a).\nq(X) :- ?bad.\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
        CHECK(e.column == 9);
    }
}

// parse . print . parse is a fixpoint
static void check_roundtrip(const std::string& text) {
    auto p1 = parse_program(text);
    std::string printed = print_program(*p1);
    auto p2 = parse_program(printed);
    std::string printed2 = print_program(*p2);
    CHECK(printed == printed2);
    REQUIRE(p1->clauses().size() == p2->clauses().size());
    for (size_t i = 0; i < p1->clauses().size(); ++i) {
        CHECK(p1->clause(i).body.size() == p2->clause(i).body.size());
        CHECK(p1->clause(i).var_count == p2->clause(i).var_count);
    }
    CHECK(p1->parallel_predicates() == p2->parallel_predicates());
}

TEST_CASE("print round-trip stability") {
    check_roundtrip(
        ":- parallel select/3.\n"
        "select(X, [X|T], T).\n"
        "select(X, [H|T], [H|R]) :- select(X, T, R).\n"
        "range(L, H, []) :- L > H.\n"
        "range(L, H, [L|T]) :- L =< H, L1 is L + 1, range(L1, H, T).\n"
        "safe(Q, P, D) :- Q =\\= P + D, Q =\\= P - D.\n"
        "m([_|Xs], N) :- N >= 0 , m(Xs, N).\n");
}
