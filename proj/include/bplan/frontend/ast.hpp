#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace bplan {

struct Expr;
struct Cond;
using ExprPtr = std::shared_ptr<const Expr>;
using CondPtr = std::shared_ptr<const Cond>;

enum class ExprKind {
    Const,
    Fluent,    // fluent with a relative annotation (shift)
    Timed,     // fluent at an absolute time point
    Neg,
    Abs,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Rei,
    CostPlan,  // total action cost of the plan
    CostGoal,  // state cost at the final state
    CostState, // state cost at time `value`
};

struct Expr {
    ExprKind kind = ExprKind::Const;
    std::int64_t value = 0; // Const value, CostState index
    int fluent = -1;
    int shift = 0;          // annotation for Fluent, time point for Timed
    ExprPtr a, b;
    CondPtr c;              // Rei
};

enum class CondKind { True, False, Rel, Not, And, Or };
enum class RelOp { Eq, Ne, Lt, Le, Gt, Ge };

struct Cond {
    CondKind kind = CondKind::True;
    RelOp op = RelOp::Eq;
    ExprPtr lhs, rhs;
    std::vector<CondPtr> kids;
};

ExprPtr make_const(std::int64_t v);
ExprPtr make_fluent(int f, int shift = 0);
ExprPtr make_timed(int f, int time);
ExprPtr make_unary(ExprKind k, ExprPtr a);
ExprPtr make_binary(ExprKind k, ExprPtr a, ExprPtr b);
ExprPtr make_rei(CondPtr c);
ExprPtr make_cost(ExprKind k, std::int64_t index = 0);

CondPtr make_true();
CondPtr make_false();
CondPtr make_rel(RelOp op, ExprPtr lhs, ExprPtr rhs);
CondPtr make_not(CondPtr c);
CondPtr make_and(std::vector<CondPtr> kids);
CondPtr make_or(std::vector<CondPtr> kids);
// f eq v, the literal form used by the Boolean language.
CondPtr make_literal(int fluent, bool positive);

const char* rel_word(RelOp op);
RelOp negate(RelOp op);
bool rel_holds(RelOp op, std::int64_t a, std::int64_t b);

struct FluentRef {
    int fluent;
    int shift;
    bool timed;
};

// Every fluent occurrence, including those under rei().
void collect_refs(const Cond& c, std::vector<FluentRef>& out);
void collect_refs(const Expr& e, std::vector<FluentRef>& out);
std::vector<int> fluents_of(const Cond& c); // sorted, unique

bool has_cost_terms(const Cond& c);
bool has_cost_terms(const Expr& e);

// Structural walk over all sub-conditions and sub-expressions.
void visit(const Cond& c, const std::function<void(const Cond&)>& on_cond,
           const std::function<void(const Expr&)>& on_expr);

} // namespace bplan
