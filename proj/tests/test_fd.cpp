#include "bplan/fd/solver.hpp"
#include "support/random_csp.hpp"

#include <doctest.h>

using namespace bplan::fd;

TEST_CASE("domain operations keep interval sets normalised") {
    Domain d = Domain::from_values({1, 2, 3, 7, 8, 10});
    CHECK(d.intervals().size() == 3);
    CHECK(d.size() == 6);
    CHECK(d.remove_value(8));
    CHECK(d.to_string() == "{1..3,7,10}");
    CHECK(d.remove_below(2));
    CHECK(d.remove_above(7));
    CHECK(d.to_string() == "{2..3,7}");
    CHECK(d.remove_range(3, 6));
    CHECK(d.to_string() == "{2,7}");
    CHECK_FALSE(d.remove_value(5));
    CHECK(intersection(d, Domain::range(5, 9)).to_string() == "{7}");
}

TEST_CASE("trail restores domains on backtrack") {
    Solver s;
    VarId x = s.new_var(Domain::range(0, 9));
    s.push_level();
    CHECK(s.set_min(x, 3));
    s.push_level();
    CHECK(s.remove(x, 5));
    CHECK(s.set_max(x, 7));
    s.pop_level();
    CHECK(s.dom(x).to_string() == "{3..9}");
    CHECK(s.remove(x, 4));
    s.pop_level();
    CHECK(s.dom(x).to_string() == "{0..9}");
}

TEST_CASE("linear equality propagates bounds") {
    Solver s;
    VarId x = s.new_var(Domain::range(0, 10));
    VarId y = s.new_var(Domain::range(0, 3));
    s.post_linear({{1, x}, {2, y}}, Rel::Eq, 4);
    CHECK(s.max(x) == 4);
    CHECK(s.max(y) == 2);
    s.post_linear({{1, x}}, Rel::Ge, 3);
    CHECK(s.fixed(y));
    CHECK(s.value(x) == 4);
}

TEST_CASE("reified equality detects disjoint domains") {
    Solver s;
    VarId x = s.new_var(Domain::from_values({1, 3}));
    VarId y = s.new_var(Domain::from_values({2, 4}));
    VarId b = s.new_bool();
    s.post_reif_linear({b, true}, ReifMode::Equiv, {{1, x}, {-1, y}}, Rel::Eq, 0);
    CHECK(s.fixed(b));
    CHECK(s.value(b) == 0);
}

TEST_CASE("division and modulo truncate toward zero") {
    Solver s;
    VarId x = s.new_var(Domain::range(-7, -7));
    VarId y = s.new_var(Domain::range(2, 2));
    VarId q = s.new_var(Domain::range(-10, 10));
    VarId r = s.new_var(Domain::range(-10, 10));
    s.post_div(q, x, y, false);
    s.post_mod(r, x, y, false);
    CHECK(s.value(q) == -3);
    CHECK(s.value(r) == -1);
}

TEST_CASE("random CSPs agree with enumeration") {
    std::mt19937_64 rng(20240611);
    for (int i = 0; i < 300; ++i) {
        auto csp = testsupport::random_csp(rng);
        CAPTURE(i);
        CHECK(testsupport::solve_all(csp) == testsupport::enumerate(csp));
    }
}

TEST_CASE("minimize finds the optimum of random CSPs") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 100; ++i) {
        auto csp = testsupport::random_csp(rng);
        auto sols = testsupport::enumerate(csp);
        Solver s;
        testsupport::post(s, csp);
        auto res = minimize(s, 0, {});
        CAPTURE(i);
        REQUIRE(res.found == !sols.empty());
        if (!sols.empty()) {
            Value best = sols.begin()->at(0);
            for (const auto& t : sols) best = std::min(best, t[0]);
            CHECK(res.best == best);
        }
    }
}

TEST_CASE("search is resumable and counts every solution once") {
    Solver s;
    VarId x = s.new_var(Domain::range(1, 3));
    VarId y = s.new_var(Domain::range(1, 3));
    s.post_linear({{1, x}, {-1, y}}, Rel::Ne, 0);
    Search search(s, {});
    int n = 0;
    while (search.next() == SearchStatus::Solution) ++n;
    CHECK(n == 6);
}
