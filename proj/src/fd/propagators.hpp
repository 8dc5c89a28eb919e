#pragma once

#include "bplan/fd/solver.hpp"

#include <string>
#include <vector>

namespace bplan::fd {

class Propagator {
public:
    virtual ~Propagator() = default;
    virtual bool propagate(Solver& s) = 0;
    virtual std::vector<VarId> scope() const = 0;
    virtual std::string describe(const Solver& s) const = 0;
    virtual bool slow() const { return false; }
};

// Linear constraint sum(coef * var) rel rhs, with rel normalised to Le, Eq or Ne.
struct LinearForm {
    std::vector<Term> terms;
    Rel rel = Rel::Le;
    Value rhs = 0;

    static LinearForm make(std::vector<Term> terms, Rel rel, Value rhs);
    LinearForm negated() const;
    std::string to_string(const Solver& s) const;
};

enum class Truth { True, False, Unknown };

Truth linear_status(const Solver& s, const LinearForm& f);
bool linear_enforce(Solver& s, const LinearForm& f);

std::unique_ptr<Propagator> make_linear(LinearForm f);
std::unique_ptr<Propagator> make_reif_linear(Lit b, ReifMode mode, LinearForm f);
std::unique_ptr<Propagator> make_clause(std::vector<Lit> lits);
std::unique_ptr<Propagator> make_times(VarId z, VarId x, VarId y);
std::unique_ptr<Propagator> make_div(VarId z, VarId x, VarId y, bool total);
std::unique_ptr<Propagator> make_mod(VarId z, VarId x, VarId y, bool total);
std::unique_ptr<Propagator> make_abs(VarId z, VarId x);
std::unique_ptr<Propagator> make_objective_bound(VarId obj, Value* bound);

Value floor_div(Value a, Value b);
Value ceil_div(Value a, Value b);
Value trunc_div(Value a, Value b);
Value trunc_mod(Value a, Value b);

} // namespace bplan::fd
