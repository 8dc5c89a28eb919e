#pragma once

#include "bplan/fd/domain.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bplan::fd {

using VarId = int;

// A Boolean literal over a 0/1 variable.
struct Lit {
    VarId var = -1;
    bool positive = true;
    Lit operator~() const { return {var, !positive}; }
    bool operator==(const Lit&) const = default;
};

enum class Rel { Eq, Ne, Le, Lt, Ge, Gt };
Rel negate(Rel r);
const char* rel_symbol(Rel r);

struct Term {
    Value coef;
    VarId var;
};

enum class ReifMode { Equiv, Implies };

class Propagator;

class Solver {
public:
    Solver();
    ~Solver();
    Solver(const Solver&) = delete;
    Solver& operator=(const Solver&) = delete;

    VarId new_var(Domain d, std::string name = {});
    VarId new_bool(std::string name = {});
    // Shared literal that is always true; ~true_lit() is always false.
    Lit true_lit();

    int num_vars() const { return static_cast<int>(doms_.size()); }
    const Domain& dom(VarId v) const { return doms_[static_cast<std::size_t>(v)]; }
    bool fixed(VarId v) const { return dom(v).is_fixed(); }
    Value value(VarId v) const { return dom(v).min(); }
    Value min(VarId v) const { return dom(v).min(); }
    Value max(VarId v) const { return dom(v).max(); }
    const std::string& name(VarId v) const { return names_[static_cast<std::size_t>(v)]; }
    bool lit_true(Lit l) const;
    bool lit_false(Lit l) const;
    bool lit_fixed(Lit l) const { return fixed(l.var); }

    // Posting. Each call propagates at the current level; failure is sticky.
    int post_linear(std::vector<Term> terms, Rel rel, Value rhs);
    int post_reif_linear(Lit b, ReifMode mode, std::vector<Term> terms, Rel rel, Value rhs);
    int post_clause(std::vector<Lit> lits);
    int post_times(VarId z, VarId x, VarId y);
    // z = x / y truncated. With total=true a zero divisor yields z = 0.
    int post_div(VarId z, VarId x, VarId y, bool total);
    // z = x mod y with the sign of x. With total=true a zero divisor yields z = 0.
    int post_mod(VarId z, VarId x, VarId y, bool total);
    int post_abs(VarId z, VarId x);
    void post_and_equiv(Lit b, const std::vector<Lit>& lits);
    void post_or_equiv(Lit b, const std::vector<Lit>& lits);
    // Caps an objective variable with a bound that can be tightened between solutions.
    void set_objective_bound(VarId obj, Value upper);

    bool failed() const { return failed_; }
    bool propagate();

    int num_constraints() const { return static_cast<int>(props_.size()); }
    std::string describe_constraint(int id) const;
    using TraceFn = std::function<void(VarId, const Domain&, int cause)>;
    void set_trace(TraceFn fn) { trace_ = std::move(fn); }

    // Domain updates; false means the domain became empty.
    bool set_min(VarId v, Value x);
    bool set_max(VarId v, Value x);
    bool remove(VarId v, Value x);
    bool remove_range(VarId v, Value lo, Value hi);
    bool assign(VarId v, Value x);
    bool intersect(VarId v, const Domain& d);
    bool set_lit(Lit l, bool value) { return assign(l.var, (l.positive == value) ? 1 : 0); }

    // Backtracking.
    void push_level();
    void pop_level();
    int level() const { return static_cast<int>(levels_.size()); }

    std::uint64_t propagations() const { return propagations_; }

private:
    struct Saved {
        VarId var;
        std::uint32_t offset;
        std::uint32_t count;
        std::uint64_t stamp;
    };
    struct LevelMark {
        std::size_t trail;
        std::size_t pool;
        std::uint64_t id;
    };

    int add(std::unique_ptr<Propagator> p);
    void save(VarId v);
    bool changed(VarId v);
    void enqueue(int pid);

    std::vector<Domain> doms_;
    std::vector<std::string> names_;
    std::vector<std::uint64_t> stamp_;
    std::vector<std::vector<int>> watchers_;
    std::vector<std::unique_ptr<Propagator>> props_;
    std::vector<char> queued_;
    std::vector<int> queue_fast_;
    std::vector<int> queue_slow_;
    std::size_t head_fast_ = 0;
    std::size_t head_slow_ = 0;
    std::vector<Saved> trail_;
    std::vector<Interval> pool_;
    std::vector<LevelMark> levels_;
    std::uint64_t next_level_id_ = 1;
    std::uint64_t current_id_ = 0;
    int current_prop_ = -1;
    bool failed_ = false;
    VarId true_var_ = -1;
    int objective_prop_ = -1;
    std::unique_ptr<Value> objective_bound_;
    std::uint64_t propagations_ = 0;
    TraceFn trace_;
};

enum class ValueOrder { Smallest, Largest, Random };

struct SearchOptions {
    std::vector<VarId> order;   // decision variables labeled first, in this order
    bool label_all = true;      // afterwards label every remaining variable by id
    ValueOrder value_order = ValueOrder::Smallest;
    std::uint64_t seed = 0;
    // Called after propagation at every node; returning false prunes the node.
    std::function<bool(Solver&)> node_hook;
    std::optional<std::chrono::steady_clock::time_point> deadline;
    std::uint64_t node_limit = 0; // 0 = unlimited
};

enum class SearchStatus { Solution, Exhausted, Budget };

struct SearchStats {
    std::uint64_t nodes = 0;
    std::uint64_t failures = 0;
    std::uint64_t solutions = 0;
};

// Depth-first search with binary branching x = v / x != v. Resumable:
// each call to next() continues after the previous solution.
class Search {
public:
    Search(Solver& s, SearchOptions opts);
    ~Search();
    SearchStatus next();
    const SearchStats& stats() const { return stats_; }
    // Values of all variables at the last solution.
    std::vector<Value> snapshot() const;

private:
    struct Choice {
        VarId var;
        Value val;
    };
    bool pick(VarId& var, Value& val);
    bool budget_exceeded();

    Solver& s_;
    SearchOptions opts_;
    std::vector<Choice> stack_;
    std::vector<std::size_t> hints_;
    std::size_t order_pos_hint_ = 0;
    bool started_ = false;
    bool done_ = false;
    int base_level_ = 0;
    SearchStats stats_;
    std::uint64_t rng_;
};

struct MinimizeResult {
    SearchStatus status = SearchStatus::Exhausted; // Solution when an optimum was proved
    bool found = false;
    Value best = 0;
    std::vector<Value> values;
    SearchStats stats;
};

// Branch and bound on obj. accept() may veto a solution (it is then skipped
// without tightening the bound).
MinimizeResult minimize(Solver& s, VarId obj, SearchOptions opts,
                        const std::function<bool(Solver&)>& accept = {});

} // namespace bplan::fd
