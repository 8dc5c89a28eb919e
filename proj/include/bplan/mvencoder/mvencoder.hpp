#pragma once

#include "bplan/fd/solver.hpp"
#include "bplan/frontend/domain.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bplan::mvencoder {

// A linear form over solver variables plus a definedness literal. `stray`
// marks a timed reference outside the plan.
struct LinExpr {
    std::vector<fd::Term> terms;
    fd::Value constant = 0;
    std::optional<fd::Lit> def; // empty means always defined
    bool stray = false;

    bool is_const() const { return terms.empty(); }
};

// Translates conditions and expressions into solver constraints. Fluent
// references go through `resolve(fluent, layer)`; cost atoms through `cost`.
class Compiler {
public:
    using Resolve = std::function<LinExpr(int fluent, int layer)>;
    using CostAtom = std::function<LinExpr(const Expr&)>;

    Compiler(fd::Solver& s, int horizon, Resolve resolve, CostAtom cost = {});

    LinExpr expr(const Expr& e, int i);
    // Literal for "c is true at time i" (or "c is false" when positive = false).
    fd::Lit cond(const Cond& c, int i, bool positive = true);
    void post(const Cond& c, int i);
    void post_implies(fd::Lit p, const Cond& c, int i);
    void post_equal(fd::Lit p, fd::VarId x, fd::VarId y); // p -> x = y

    fd::VarId materialize(const LinExpr& e);
    fd::Lit mk_and(std::vector<fd::Lit> lits);
    fd::Lit mk_or(std::vector<fd::Lit> lits);
    fd::Lit true_lit() { return s_.true_lit(); }
    fd::Lit def_of(const LinExpr& e) { return e.def ? *e.def : s_.true_lit(); }

private:
    LinExpr combine(LinExpr a, const LinExpr& b, fd::Value sign);
    std::optional<fd::Lit> join_defs(const std::optional<fd::Lit>& a, const std::optional<fd::Lit>& b);
    std::pair<fd::Value, fd::Value> bounds(const LinExpr& e) const;
    fd::VarId new_range(fd::Value lo, fd::Value hi);

    fd::Solver& s_;
    int horizon_;
    Resolve resolve_;
    CostAtom cost_;
};

struct Cluster {
    std::vector<int> fluents;
    std::vector<int> laws;   // indices into static_laws
    bool temporal = false;   // some law reads another layer
};

// Fluents related by sharing a static law; singletons included, ordered by first fluent.
std::vector<Cluster> compute_clusters(const DomainDescription& d);
// "cluster <k>: <members> laws=<count>" per cluster.
std::vector<std::string> explain_clusters(const DomainDescription& d, const std::vector<Cluster>& clusters);

// Supported: Full, and an untouched fluent changes only when a static law of
// its cluster has a true body in the new state.
enum class Minimality { Off, Cluster, Full, Supported };

struct EncodeOptions {
    Minimality minimality = Minimality::Full;
    bool problem_axioms = true; // initially, goal, holds, always, time and cost constraints
    bool record = false;
};

class MinimalityCheck;

struct MVProblem {
    MVProblem();
    ~MVProblem();
    MVProblem(MVProblem&&) noexcept;
    MVProblem& operator=(MVProblem&&) noexcept;

    int horizon = 0;
    std::unique_ptr<fd::Solver> solver;
    std::vector<std::vector<fd::VarId>> F; // F[L][f], layers 0..N
    std::vector<std::vector<fd::VarId>> A; // A[i][a], steps 0..N-1
    std::vector<std::vector<fd::Lit>> touched; // touched[L][f], layers 1..N (layer 0 unused)
    std::vector<fd::VarId> order;          // F^0, A^0, F^1, ..., F^N
    std::optional<fd::VarId> plan_cost;
    std::optional<fd::VarId> objective;
    std::vector<Cluster> clusters;
    std::vector<std::string> listing;
    std::unique_ptr<MinimalityCheck> minimality; // set in full mode

    // Prunes nodes whose fully labeled transitions are not minimally closed.
    bool check_node(fd::Solver& s);
    std::uint64_t minimality_checks() const;
};

MVProblem encode_problem(const DomainDescription& d, int N, const EncodeOptions& opts = {});

// Form(D) for one transition: is there a closed variant of `next` that
// reverts some changed inertial fluents to their `prev` value? `layers`
// holds v0..v_i; touched marks the non-inertial fluents of layer i+1.
bool has_closed_revert(const DomainDescription& d, int horizon, const std::vector<std::vector<fd::Value>>& layers,
                       const std::vector<fd::Value>& next, const std::vector<char>& touched);

} // namespace bplan::mvencoder
