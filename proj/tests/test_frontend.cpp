#include "bplan/frontend/domain.hpp"
#include "bplan/frontend/grounder.hpp"
#include "bplan/frontend/parser.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace bplan;
using namespace bplan::frontend;

namespace {

std::string corpus(const std::string& name) { return std::string(BPLAN_CORPUS_DIR) + "/" + name; }

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::set<std::string> printed(const GroundProgram& gp) {
    std::set<std::string> out;
    for (const auto& f : gp.facts()) out.insert(f.atom.to_string());
    return out;
}

std::vector<std::string> corpus_files() {
    std::vector<std::string> out;
    for (const auto& e : std::filesystem::directory_iterator(BPLAN_CORPUS_DIR))
        if (e.path().extension() == ".pl") out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST_CASE("parse facts and rules") {
    auto p = parse_program("barrel(5).");
    REQUIRE(p.clauses.size() == 1);
    CHECK(p.clauses[0].head.is("barrel", 1));
    CHECK(p.clauses[0].head.arg(0).int_value() == 5);
    CHECK(parse_program("").clauses.empty());

    auto r = parse_program("causes(fill(X,Y), cont(X) eq 0, [Y-cont(Y) geq cont(X)]) :- action(fill(X,Y)).");
    REQUIRE(r.clauses.size() == 1);
    CHECK(r.clauses[0].body.size() == 1);
    CHECK(r.clauses[0].head.arg(1).is("eq", 2));

    CHECK_THROWS_AS(parse_program("p(X :- q."), FrontendError);
    try {
        parse_program("a.\nb(.\n");
        FAIL("expected a syntax error");
    } catch (const FrontendError& e) {
        CHECK(e.pos().line == 2);
    }
}

TEST_CASE("operators and annotations") {
    Term t = parse_term("cont(Y) eq cont(Y)^(-1)+cont(X)^(-1)");
    CHECK(t.is("eq", 2));
    CHECK(t.arg(1).is("+", 2));
    CHECK(t.arg(1).arg(0).is("^", 2));
    CHECK(t.arg(1).arg(0).arg(1).int_value() == -1);
    CHECK(parse_term("X ≤ Y").is("=<", 2));
    CHECK(parse_term("X ≠ Y").is("\\=", 2));
    CHECK(parse_term("h@2 eq 3").arg(0).is("@", 2));
    CHECK(parse_term("a - b - c").arg(0).is("-", 2));
    CHECK(parse_term("2 ^ 3 ^ 2").arg(1).is("^", 2));
    CHECK_THROWS_AS(parse_term("2 ** 3 ** 2"), FrontendError);
}

TEST_CASE("print then parse is the identity on every corpus file") {
    for (const auto& path : corpus_files()) {
        CAPTURE(path);
        auto p1 = parse_program(slurp(path));
        std::string text = print_program(p1);
        auto p2 = parse_program(text);
        REQUIRE(p1.clauses.size() == p2.clauses.size());
        for (std::size_t i = 0; i < p1.clauses.size(); ++i) {
            CHECK(p1.clauses[i].head.to_string() == p2.clauses[i].head.to_string());
            REQUIRE(p1.clauses[i].body.size() == p2.clauses[i].body.size());
            for (std::size_t j = 0; j < p1.clauses[i].body.size(); ++j)
                CHECK(p1.clauses[i].body[j].to_string() == p2.clauses[i].body[j].to_string());
        }
        CHECK(print_program(p2) == text);
    }
}

TEST_CASE("grounding the barrels type rules") {
    auto gp = ground(parse_program(slurp(corpus("barrels_12_7_5_b.pl"))));
    CHECK(gp.of("fluent", 1).size() == 27);
    CHECK(gp.of("action", 1).size() == 6);

    auto people = ground(parse_program("max_people(4). person(X) :- max_people(N), interval(X,1,N)."));
    CHECK(people.of("person", 1).size() == 4);
    auto facts = ground(parse_program("p(1). p(2). q(X) :- p(X)."));
    CHECK(facts.of("q", 1).size() == 2);
}

TEST_CASE("grounding is idempotent on its own fixpoint") {
    for (const auto& path : corpus_files()) {
        CAPTURE(path);
        auto gp = ground(parse_program(slurp(path)));
        std::string facts;
        for (const auto& f : gp.facts()) facts += f.atom.to_string() + ".\n";
        auto again = ground(parse_program(facts));
        CHECK(printed(gp) == printed(again));
    }
}

TEST_CASE("grounder builtins") {
    auto gp = ground(parse_program(R"(
        gate(1,2). gate(1,3). gate(2,3).
        out(X,L) :- gate(X,_), findall(Y, gate(X,Y), L).
        both(L) :- findall(A, gate(A,_), L1), findall(B, gate(_,B), L2), append(L1,L2,L).
        d(A) :- member(A,[1,2,3,4]), diff(A,2,3).
        len(N) :- length([a,b,c],N).
        m(X) :- X is 7 mod 3 + (-7) // 2.
        first(X) :- pick(X), !.
        pick(1). pick(2).
        top(X) :- first(X).
    )"));
    auto has = [&](const std::string& s) { return printed(gp).count(s) > 0; };
    CHECK(has("out(1,[2, 3])"));
    CHECK(has("out(2,[3])"));
    CHECK(has("both([1, 1, 2, 2, 3, 3])"));
    CHECK(has("d(1)"));
    CHECK(has("d(4)"));
    CHECK_FALSE(has("d(2)"));
    CHECK(has("len(3)"));
    CHECK(has("m(-2)"));
    CHECK(has("top(1)"));
    CHECK_FALSE(has("top(2)"));
}

TEST_CASE("grounder rejects unsafe programs") {
    CHECK_THROWS_AS(ground(parse_program("fluent(X) :- X > 2.")), FrontendError);
    CHECK_THROWS_AS(ground(parse_program("p(X) :- q(X), \\+ p(X). q(1).")), FrontendError);
    GroundOptions small;
    small.atom_budget = 50;
    CHECK_THROWS_AS(ground(parse_program("n(X) :- interval(X,1,100)."), small), FrontendError);
}

TEST_CASE("extract the Boolean barrels domain") {
    auto d = load_domain_file(corpus("barrels_12_7_5_b.pl"));
    CHECK(d.lang == Language::B);
    CHECK(d.num_fluents() == 27);
    CHECK(d.num_actions() == 6);
    CHECK(d.action_index.count("fill(12,7)") == 1);
    CHECK(d.action_index.count("fill(7,7)") == 0);
    for (const auto& f : d.fluents) CHECK(f.domain == fd::Domain::range(0, 1));
    CHECK(d.initially.size() == 3);
    CHECK(d.goal.size() == 3);
    // Each (barrel, level) pair gives one static law per other level.
    CHECK(d.static_laws.size() == 6 * 5 + 8 * 7 + 13 * 12);
}

TEST_CASE("extract multi-valued barrels domains") {
    auto d = load_domain_file(corpus("barrels_12_7_5_mv.pl"));
    CHECK(d.lang == Language::BMV);
    REQUIRE(d.num_fluents() == 3);
    CHECK(d.fluents[static_cast<std::size_t>(d.fluent_index.at("cont(5)"))].domain == fd::Domain::range(0, 5));
    CHECK(d.fluents[static_cast<std::size_t>(d.fluent_index.at("cont(7)"))].domain == fd::Domain::range(0, 7));
    CHECK(d.fluents[static_cast<std::size_t>(d.fluent_index.at("cont(12)"))].domain == fd::Domain::range(0, 12));
    CHECK(d.dynamic_laws.size() == 24);
    CHECK(d.has_temporal_refs());
    std::set<std::string> effects;
    for (const auto& law : d.dynamic_laws) effects.insert(to_source(*law.effect, d));
    CHECK(effects.count("cont(7) eq cont(7)^(-1) + cont(5)^(-1)") == 1);
    CHECK(effects.count("cont(12) eq cont(12)^(-1) - 5 + cont(5)^(-1)") == 1);
}

TEST_CASE("extraction errors") {
    CHECK_THROWS_WITH_AS(load_domain_text("fluent(f). action(a). causes(a,f,[])."),
                         doctest::Contains("no executable"), FrontendError);
    CHECK_THROWS_WITH_AS(load_domain_text("fluent(f). action(a). executable(a,[g])."),
                         doctest::Contains("undeclared fluent"), FrontendError);
    CHECK_THROWS_WITH_AS(load_domain_text("fluent(f). action(a). executable(a,[]). causes(b,f,[])."),
                         doctest::Contains("undeclared action"), FrontendError);
    CHECK_THROWS_WITH_AS(load_domain_text("fluent(f,3,1). action(a). executable(a,[])."),
                         doctest::Contains("empty domain"), FrontendError);
    CHECK_THROWS_WITH_AS(load_domain_text("fluent(f). action(a). executable(a,[f eq 2])."),
                         doctest::Contains("non-Boolean"), FrontendError);
    CHECK_THROWS_WITH_AS(load_domain_text("fluent(f,0,3). action(a). executable(a,[f^1 eq 2])."),
                         doctest::Contains("positively annotated"), FrontendError);
    CHECK_THROWS_WITH_AS(load_domain_text("fluent(f,0,3). action(a). executable(a,[]). always(f^(-1) eq 2)."),
                         doctest::Contains("always"), FrontendError);
    CHECK_THROWS_WITH_AS(load_domain_text("fluent(f,0,3). action(a). executable(a,[]). initially(f eq 7)."),
                         doctest::Contains("outside its domain"), FrontendError);
    CHECK_THROWS_WITH_AS(load_domain_text("fluent(f). action(a). executable(a,[]). nonexecutable(a,[f])."),
                         doctest::Contains("nonexecutable"), FrontendError);
    CHECK_THROWS_WITH_AS(load_domain_text("fluent(f(g(h(i(j(k)))))). action(a). executable(a,[])."),
                         doctest::Contains("nests deeper"), FrontendError);
    ExtractOptions allow;
    allow.allow_nonexecutable = true;
    auto d = load_domain_text("fluent(f). action(a). executable(a,[]). nonexecutable(a,[f]).", allow);
    CHECK(d.nonexecutable.size() == 1);
}

TEST_CASE("annotated effects and cost atoms") {
    auto d = load_domain_text(R"(
        fluent(f,0,9). fluent(g,{1,3,5}). fluent(b).
        action(a). executable(a, [f lt 9]).
        causes(a, f^2 eq f + rei(g eq 3), [f@0 geq 0, neg(b eq 1)]).
        action_cost(a, f + 2).
        state_cost(f * 2).
        cost_constraint(plan leq 10).
        cost_constraint(state(1) + goal geq 0).
        minimize_cost(plan).
        holds(f eq 0, 0).
        time_constraint(f@1 neq f@0).
    )");
    CHECK(d.lang == Language::BMV);
    auto dom = [&](const char* f) { return d.fluents[static_cast<std::size_t>(d.fluent_index.at(f))].domain; };
    CHECK(dom("g") == fd::Domain::from_values({1, 3, 5}));
    CHECK(dom("b") == fd::Domain::range(0, 1));
    REQUIRE(d.dynamic_laws.size() == 1);
    CHECK(to_source(*d.dynamic_laws[0].effect, d) == "f^2 eq f + rei(g eq 3)");
    CHECK(has_cost_terms(*d.cost_constraints[1]));
    CHECK_FALSE(has_cost_terms(*d.dynamic_laws[0].effect));
    REQUIRE(d.action_cost[0]);
    CHECK(d.minimize_cost->kind == ExprKind::CostPlan);
    CHECK(d.holds.size() == 1);
    CHECK(d.time_constraints.size() == 1);
}

TEST_CASE("dump_ground round trip") {
    for (const auto& path : corpus_files()) {
        CAPTURE(path);
        auto d = load_domain_file(path);
        std::string dump = dump_ground(d);
        ExtractOptions o;
        o.lang = d.lang;
        auto d2 = load_domain_text(dump, o);
        CHECK(dump_ground(d2) == dump);
        CHECK(d2.num_fluents() == d.num_fluents());
        CHECK(d2.dynamic_laws.size() == d.dynamic_laws.size());
    }
}
