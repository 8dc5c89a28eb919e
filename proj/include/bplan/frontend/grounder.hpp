#pragma once

#include "bplan/frontend/parser.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace bplan::frontend {

struct GroundFact {
    Term atom;
    SourcePos pos; // clause that first derived the fact
};

struct GroundOptions {
    std::size_t atom_budget = 2'000'000;
    int max_depth = 10'000;
};

class GroundProgram {
public:
    const std::vector<GroundFact>& facts() const { return facts_; }
    // Facts of name/arity in derivation order.
    std::vector<const GroundFact*> of(const std::string& name, std::size_t arity) const;

private:
    friend class Grounder;
    std::vector<GroundFact> facts_;
    std::map<std::pair<std::string, std::size_t>, std::vector<std::size_t>> by_pred_;
};

// Bottom-up fixpoint over range-restricted predicates, stratified by
// findall/negation dependencies. Predicates with non range-restricted
// clauses or cuts are answered top-down when called with bound inputs.
GroundProgram ground(const Program& program, const GroundOptions& opts = {});

// Ground integer arithmetic as used by is/2 and the comparison builtins.
std::int64_t eval_arith(const Term& t);

} // namespace bplan::frontend
