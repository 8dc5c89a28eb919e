#include "bplan/mvoracle/mvoracle.hpp"
#include "bplan/planner/planner.hpp"

#include "support/random_mv.hpp"

#include <doctest.h>

#include <functional>
#include <sstream>

using namespace bplan;
using namespace bplan::planner;

namespace {

std::string corpus(const std::string& name) { return std::string(BPLAN_CORPUS_DIR) + "/" + name; }

PlanRequest lengths(int lo, int hi) {
    PlanRequest r;
    r.min_length = lo;
    r.max_length = hi;
    return r;
}

// Some length-N trajectory the oracle accepts, found by exhaustive search.
bool oracle_has_plan(const DomainDescription& d, int N) {
    mvoracle::MVOracle o(d);
    std::vector<mvoracle::MVState> states;
    std::vector<int> acts;
    std::function<bool()> grow = [&]() {
        if (static_cast<int>(acts.size()) == N) {
            Trajectory t;
            for (const auto& s : states) t.states.emplace_back(s.begin(), s.end());
            t.actions = acts;
            return o.valid_trajectory(t).ok;
        }
        for (int a = 0; a < d.num_actions(); ++a)
            for (const auto& v : o.successors(states, acts, a, N)) {
                states.push_back(v);
                acts.push_back(a);
                bool ok = grow();
                states.pop_back();
                acts.pop_back();
                if (ok) return true;
            }
        return false;
    };
    for (const auto& v0 : o.initial_states(N)) {
        states = {v0};
        if (grow()) return true;
    }
    return false;
}

} // namespace

TEST_CASE("a length range stops at the first length with a plan") {
    auto d = load_domain_file(corpus("barrels_8_5_3_mv.pl"));
    auto r = plan(d, lengths(5, 9));
    REQUIRE(r.status == Status::Sat);
    CHECK(r.length == 7);
    CHECK(r.verified);
    CHECK(r.no_loop);
    CHECK(verify(d, r.trajectory).empty());
    CHECK(r.fired.size() == 7);
}

TEST_CASE("B domains answer the community instance") {
    auto d = load_domain_file(corpus("community_a4_b.pl"));
    CHECK(plan(d, lengths(5, 5)).status == Status::Unsat);
    auto r = plan(d, lengths(6, 6));
    REQUIRE(r.status == Status::Sat);
    CHECK(verify(d, r.trajectory).empty());
}

TEST_CASE("minimization picks the cheaper action") {
    auto d = load_domain_file(corpus("micro/two_costs_mv.pl"));
    auto req = lengths(1, 1);
    req.objective = Objective::Domain;
    auto r = plan(d, req);
    REQUIRE(r.status == Status::Sat);
    CHECK(r.cost == 1);
    CHECK(r.optimal);
    CHECK(d.actions[static_cast<std::size_t>(r.trajectory.actions[0])] == "b");

    std::ostringstream text;
    write_text(text, d, r);
    CHECK(text.str().find("plan of length 1, cost 1 (optimal), verified") == 0);
}

TEST_CASE("records written by the planner verify, tampered ones do not") {
    auto d = load_domain_file(corpus("barrels_8_5_3_mv.pl"));
    auto r = plan(d, lengths(7, 7));
    REQUIRE(r.status == Status::Sat);
    std::stringstream io;
    write_records(io, d, r.trajectory);
    Trajectory back = read_records(io, d);
    CHECK(back.states == r.trajectory.states);
    CHECK(back.actions == r.trajectory.actions);
    CHECK(verify(d, back).empty());

    // Change one barrel after the last step: nothing explains it.
    Trajectory bad = back;
    auto& last = bad.states.back();
    last[0] = last[0] == 0 ? 1 : 0;
    CHECK(!verify(d, bad).empty());
}

TEST_CASE("supported minimality drops pre-emptive ramifications") {
    // Switching q off forces p or r on; nothing fires to support either change.
    std::string text = "fluent(p,0,1). fluent(q,0,1). fluent(r,0,1). action(a). executable(a,true). "
                       "causes(a, q eq 0, true). caused([r eq 0, p eq 0], q eq 1). "
                       "initially(p eq 0). initially(q eq 1). initially(r eq 0). goal(q eq 0).";
    auto d = load_domain_text(text);
    auto full = plan(d, lengths(1, 1));
    REQUIRE(full.status == Status::Sat);
    CHECK(verify(d, full.trajectory).empty());
    CHECK(oracle_has_plan(d, 1));

    auto req = lengths(1, 1);
    req.minimality = mvencoder::Minimality::Supported;
    CHECK(plan(d, req).status == Status::Unsat);
}

TEST_CASE("UNSAT agrees with exhaustive oracle search") {
    testsupport::Rng rng(404);
    testsupport::MVShape shape;
    shape.max_static = 2;
    shape.annotations = true;
    int sat = 0, unsat = 0;
    for (int round = 0; round < 60; ++round) {
        std::string text = testsupport::random_mv_text(rng, shape) + "initially(f0 eq 0). goal(f0 eq 1).";
        auto d = load_domain_text(text);
        int N = 1 + round % 3;
        auto req = lengths(N, N);
        req.no_loop = NoLoop::Off;
        auto r = plan(d, req);
        INFO(text);
        INFO("N=" << N);
        bool want = oracle_has_plan(d, N);
        CHECK((r.status == Status::Sat) == want);
        CHECK(r.status != Status::Budget);
        (want ? sat : unsat)++;
    }
    CHECK(sat > 5);
    CHECK(unsat > 5);
}

TEST_CASE("identical requests give identical plans") {
    auto d = load_domain_file(corpus("tile_i1_mv.pl"));
    for (std::uint64_t seed : {0u, 7u}) {
        auto req = lengths(10, 10);
        req.seed = seed;
        auto a = plan(d, req);
        auto b = plan(d, req);
        REQUIRE(a.status == Status::Sat);
        CHECK(a.trajectory.states == b.trajectory.states);
        CHECK(a.trajectory.actions == b.trajectory.actions);
        CHECK(a.stats.nodes == b.stats.nodes);
    }
}

TEST_CASE("budgets end the search with BUDGET") {
    auto d = load_domain_file(corpus("barrels_12_7_5_b.pl"));
    auto req = lengths(10, 10);
    req.node_limit = 3;
    auto r = plan(d, req);
    CHECK(r.status == Status::Budget);
    CHECK(r.message == "search budget exhausted at length 10");
}

TEST_CASE("manifests") {
    std::istringstream empty("# nothing here\n\n");
    auto none = read_manifest(empty);
    CHECK(none.empty());
    CHECK(run_benchmarks(BPLAN_CORPUS_DIR, none, std::nullopt).empty());

    std::istringstream in("barrels_8_5_3_mv.pl 6 N\nmissing.pl 3 Y --lang bmv # gone\n");
    auto cases = read_manifest(in);
    REQUIRE(cases.size() == 2);
    CHECK(cases[1].options == std::vector<std::string>{"--lang", "bmv"});
    auto rows = run_benchmarks(BPLAN_CORPUS_DIR, cases, 60.0);
    CHECK(rows[0].got == "N");
    CHECK(rows[0].matches());
    CHECK(rows[1].got == "ERROR");
    CHECK(!rows[1].matches());
    CHECK(format_row(rows[0]).rfind("barrels_8_5_3_mv.pl 6 N N ", 0) == 0);

    std::istringstream broken("wgc_b.pl seven Y\n");
    CHECK_THROWS_AS(read_manifest(broken), std::invalid_argument);

    ExtractOptions ex;
    PlanRequest req;
    CHECK_THROWS_AS(apply_options({"--minimality", "most"}, ex, req), std::invalid_argument);
    apply_options({"--minimality", "supported", "--minimize", "goal"}, ex, req);
    CHECK(req.minimality == mvencoder::Minimality::Supported);
    CHECK(req.objective == Objective::Goal);
}
