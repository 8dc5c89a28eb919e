#pragma once

#include "bplan/frontend/term.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace bplan::frontend {

struct Clause {
    Term head;
    std::vector<Term> body; // conjunction, left to right
    SourcePos pos;
    int num_vars = 0;
};

struct Program {
    std::vector<Clause> clauses;
};

// Parses Prolog-style clauses. Variables are numbered per clause by first
// occurrence; every '_' is a fresh variable.
Program parse_program(std::string_view text);
Term parse_term(std::string_view text);

std::string print_clause(const Clause& c);
std::string print_program(const Program& p);

} // namespace bplan::frontend
