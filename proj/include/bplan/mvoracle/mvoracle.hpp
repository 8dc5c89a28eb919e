#pragma once

#include "bplan/frontend/domain.hpp"
#include "bplan/frontend/trajectory.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bplan::mvoracle {

using Value = std::int64_t;
using MVState = StateValues;

// Three-valued truth; only True counts as satisfaction.
enum class Truth { False, True, Undef };

// A state sequence read at horizon N. Layers past the end of `states` are
// unknown and read as UNDEF; `domain` is only needed for cost atoms.
struct Timeline {
    const DomainDescription* domain = nullptr;
    std::span<const MVState> states;
    std::span<const int> actions; // actions[j] leads from layer j to layer j+1
    int horizon = 0;
};

Timeline make_timeline(const DomainDescription& d, const Trajectory& t);

// Layer read by f^shift at time i: i+shift clamped into 0..horizon.
int ref_layer(int i, int shift, int horizon);

Value eval(const Expr& e, const Timeline& t, int i);
Truth truth(const Cond& c, const Timeline& t, int i);
bool satisfies_at(const Timeline& t, int i, const Cond& c);

// Single-state forms for unannotated expressions.
Value eval(const MVState& v, const Expr& e);
bool satisfies(const MVState& v, const Cond& c);

// Plan cost and state costs; UNDEF when an action or state cost is undefined.
Value plan_cost(const Timeline& t);
Value state_cost(const Timeline& t, int i);

using Assignment = std::vector<std::pair<int, Value>>; // sorted by fluent

struct TimedKey {
    int fluent;
    int shift;
    auto operator<=>(const TimedKey&) const = default;
};
using TimedAssignment = std::vector<std::pair<TimedKey, Value>>; // sorted by key

// All assignments over fluents(c) satisfying c, every other fluent undefined.
std::vector<Assignment> solutions(const DomainDescription& d, const Cond& c, std::size_t budget = 1000000);

// i-solutions of c w.r.t. prefix v0..vi: assignments to the fluents read at
// layers after i (keys are shifts relative to i+1, clamped to the horizon).
std::vector<TimedAssignment> i_solutions(const DomainDescription& d, const Cond& c, std::span<const MVState> prefix,
                                         int horizon, std::size_t budget = 1000000);

MVState ine(const Assignment& sigma, const MVState& v);
MVState delta(const MVState& v1, const MVState& v2, const std::vector<int>& fluents);
MVState state_union(const MVState& v1, const MVState& v2);
MVState state_intersection(const MVState& v1, const MVState& v2);

// f^x becomes f^(x-t); timed references are left alone.
CondPtr shift(const CondPtr& c, int t);

struct Verdict {
    bool ok = true;
    int step = -1;
    std::string reason;
};

struct AssertionResult {
    std::string what;
    bool ok;
};

struct OracleOptions {
    std::size_t max_candidates = 1000000;
    int max_reverted = 20; // fluents whose subsets are enumerated by the minimality check
};

class MVOracle {
public:
    explicit MVOracle(const DomainDescription& d, OracleOptions opts = {});

    const DomainDescription& domain() const { return d_; }

    bool in_domain(const MVState& v) const;
    bool closed_at(const Timeline& t, int i) const;
    bool executable(const Timeline& t, int action, int i) const;

    // Effects of actions[i] at time i, as a constraint read at time i+1.
    CondPtr eff(const Timeline& t, int i) const;
    // Effects of actions[0..i] shifted to time i+1, with the past layers pinned.
    CondPtr eff_seq(const Timeline& t, int i) const;
    // Fluents read at layer i+1 by effects triggered at steps 0..i.
    std::vector<char> touched(const Timeline& t, int i) const;

    // `next` is minimally closed w.r.t. prefix, the fluents with D[f] set, and the static laws.
    bool is_minimally_closed(std::span<const MVState> prefix, const MVState& next, const std::vector<char>& D,
                             int horizon) const;

    // Conditions on the transition from layer i to i+1; effects reading
    // layers beyond i+1 are checked at the step that reaches them.
    Verdict check_step(const Timeline& t, int i) const;

    // Layer i+1 candidates accepted by check_step, in lexicographic order.
    std::vector<MVState> successors(std::span<const MVState> prefix, std::span<const int> actions, int action,
                                    int horizon) const;
    // Complete closed states satisfying the initially axioms (at horizon N).
    std::vector<MVState> initial_states(int horizon) const;

    Verdict valid_trajectory(const Trajectory& tr) const;
    std::vector<AssertionResult> check_assertions(const Trajectory& tr) const;

private:
    template <class Fn> void enumerate(const Fn& fn) const;

    const DomainDescription& d_;
    OracleOptions opts_;
};

} // namespace bplan::mvoracle
