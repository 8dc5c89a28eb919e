#pragma once

#include "bplan/boracle/boracle.hpp"
#include "bplan/fd/solver.hpp"

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace bplan::bencoder {

using boracle::BTheory;
using boracle::Lit;

// Positive dependence graph over literals: edge l1 -> l2 when some
// caused(L, l1) has l2 in L.
struct DepGraph {
    int num_lits = 0;
    std::vector<std::vector<Lit>> succ;
};

DepGraph dependency_graph(const BTheory& th);
bool is_acyclic(const DepGraph& g);

struct LoopSet {
    std::vector<std::vector<Lit>> loops; // each sorted; a singleton only with a self edge
    bool overflow = false;
};

// Every literal set whose induced subgraph is strongly connected.
LoopSet find_loops(const DepGraph& g, std::size_t max_loops = 10'000, std::size_t max_work = 2'000'000);

enum class LoopMode { Off, On, Auto };

struct EncodeOptions {
    LoopMode loops = LoopMode::Auto;
    std::size_t max_loops = 10'000;
    std::size_t max_combinations = 100'000; // counter-support products expanded explicitly
    bool record = false;                    // keep a readable constraint listing
};

// Variables of one layered problem.
struct Layers {
    std::vector<std::vector<fd::VarId>> F; // F[i][f], layers 0..N
    std::vector<std::vector<fd::VarId>> A; // A[i][a], steps 0..N-1
};

class Encoder {
public:
    Encoder(const DomainDescription& d, fd::Solver& s, EncodeOptions opts = {});
    Encoder(BTheory th, std::vector<std::string> fluent_names, std::vector<std::string> action_names, fd::Solver& s,
            EncodeOptions opts = {});

    std::vector<fd::VarId> new_state_layer(int index);
    std::vector<fd::VarId> new_action_layer(int index);
    // Constraints (4)-(10) of one step plus loop formulae when enabled.
    void encode_transition(const std::vector<fd::VarId>& u, const std::vector<fd::VarId>& a,
                           const std::vector<fd::VarId>& v, int step);
    void pin_literals(const std::vector<fd::VarId>& layer, const std::vector<Lit>& lits, int index, const char* what);

    const LoopSet& loops() const { return loops_; }
    bool loops_enabled() const { return use_loops_; }
    // True when loops exceeded the cap: candidate transitions need an oracle check.
    bool needs_oracle_check() const { return loops_.overflow && use_loops_; }
    const std::vector<std::string>& listing() const { return listing_; }

private:
    fd::Lit lit(const std::vector<fd::VarId>& layer, Lit l) const;
    fd::Lit mk_and(std::vector<fd::Lit> lits);
    fd::Lit mk_or(std::vector<fd::Lit> lits);
    std::string name(Lit l, int index) const;
    std::string conj_text(const std::vector<Lit>& body, int index) const;
    void note(std::string line);
    void encode_loop(const std::vector<Lit>& loop, const std::vector<fd::VarId>& u, const std::vector<fd::VarId>& a,
                     const std::vector<fd::VarId>& v, int step);

    BTheory th_;
    std::vector<std::string> fluent_names_;
    std::vector<std::string> action_names_;
    fd::Solver& s_;
    EncodeOptions opts_;
    LoopSet loops_;
    bool use_loops_ = false;
    std::vector<std::vector<int>> dyn_by_head_, stat_by_head_, exec_by_action_, nonexec_by_action_;
    std::vector<std::string> listing_;
};

struct BProblem {
    std::unique_ptr<fd::Solver> solver;
    Layers layers;
    std::vector<fd::VarId> order; // F^0, A^0, F^1, A^1, ..., F^N
    bool needs_oracle_check = false;
    std::vector<std::string> listing;
};

// Initial state on layer 0 (closure of the initially literals), goal on layer N.
BProblem encode_problem(const DomainDescription& d, int N, const EncodeOptions& opts = {});

} // namespace bplan::bencoder
