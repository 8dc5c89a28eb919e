#pragma once

#include "bplan/frontend/domain.hpp"
#include "bplan/frontend/trajectory.hpp"

#include <string>
#include <vector>

namespace bplan::boracle {

// Literal code: 2*fluent for f, 2*fluent+1 for neg(f).
using Lit = int;
inline Lit pos_lit(int f) { return 2 * f; }
inline Lit neg_lit(int f) { return 2 * f + 1; }
inline Lit complement(Lit l) { return l ^ 1; }
inline int lit_fluent(Lit l) { return l >> 1; }
inline bool lit_positive(Lit l) { return (l & 1) == 0; }

// Membership vector over all 2|F| literals. May hold complementary pairs.
using LitSet = std::vector<char>;

struct BState {
    std::vector<char> value; // one entry per fluent
    bool operator==(const BState&) const = default;
    bool operator<(const BState& o) const { return value < o.value; }
};

struct LitLaw {
    int action = -1;             // dynamic and executability laws
    Lit head = -1;               // dynamic and static laws
    std::vector<Lit> body;
};

// Literal view of a Boolean domain description.
struct BTheory {
    int num_fluents = 0;
    int num_actions = 0;
    std::vector<LitLaw> dynamic_laws;
    std::vector<LitLaw> static_laws;
    std::vector<LitLaw> executable;
    std::vector<LitLaw> nonexecutable;
    std::vector<Lit> initially;
    std::vector<Lit> goal;
};

BTheory literal_theory(const DomainDescription& d);

struct Verdict {
    bool ok = true;
    int step = -1; // offending transition (1-based) or state index
    std::string reason;
};

struct OracleOptions {
    int max_fluents = 16; // successor enumeration bound
};

class BOracle {
public:
    explicit BOracle(BTheory th, OracleOptions opts = {});
    explicit BOracle(const DomainDescription& d, OracleOptions opts = {});

    const BTheory& theory() const { return th_; }
    LitSet empty_set() const { return LitSet(static_cast<std::size_t>(2 * th_.num_fluents), 0); }
    LitSet literals(const BState& s) const;
    bool consistent(const LitSet& s) const;
    bool complete(const LitSet& s) const;
    bool holds(const BState& s, const std::vector<Lit>& body) const;

    LitSet closure(LitSet s) const;
    LitSet direct_effects(int action, const BState& s) const;
    bool is_executable(int action, const BState& s) const;
    // Lit(s2) = Clo(E(a,s) + (Lit(s) & Lit(s2))), checked without enumeration.
    bool is_successor(const BState& s, int action, const BState& s2) const;
    // All successors in ascending order; throws when |F| exceeds the bound.
    std::vector<BState> successors(const BState& s, int action) const;

    // Closure of the initially literals; throws when it is not a complete
    // consistent state.
    BState initial_state() const;
    Verdict verify_trajectory(const Trajectory& t) const;

    static BState from_values(const StateValues& v);
    static StateValues to_values(const BState& s);

private:
    BTheory th_;
    OracleOptions opts_;
    std::vector<std::vector<int>> static_by_body_; // literal -> static laws mentioning it
};

std::string format_lits(const DomainDescription& d, const LitSet& s);

} // namespace bplan::boracle
