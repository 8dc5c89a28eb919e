#include "bplan/frontend/ast.hpp"

#include <algorithm>

namespace bplan {

ExprPtr make_const(std::int64_t v) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Const;
    e->value = v;
    return e;
}

ExprPtr make_fluent(int f, int shift) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Fluent;
    e->fluent = f;
    e->shift = shift;
    return e;
}

ExprPtr make_timed(int f, int time) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Timed;
    e->fluent = f;
    e->shift = time;
    return e;
}

ExprPtr make_unary(ExprKind k, ExprPtr a) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(a);
    return e;
}

ExprPtr make_binary(ExprKind k, ExprPtr a, ExprPtr b) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->a = std::move(a);
    e->b = std::move(b);
    return e;
}

ExprPtr make_rei(CondPtr c) {
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::Rei;
    e->c = std::move(c);
    return e;
}

ExprPtr make_cost(ExprKind k, std::int64_t index) {
    auto e = std::make_shared<Expr>();
    e->kind = k;
    e->value = index;
    return e;
}

CondPtr make_true() {
    static const CondPtr t = std::make_shared<Cond>(Cond{CondKind::True, RelOp::Eq, nullptr, nullptr, {}});
    return t;
}

CondPtr make_false() {
    static const CondPtr f = std::make_shared<Cond>(Cond{CondKind::False, RelOp::Eq, nullptr, nullptr, {}});
    return f;
}

CondPtr make_rel(RelOp op, ExprPtr lhs, ExprPtr rhs) {
    return std::make_shared<Cond>(Cond{CondKind::Rel, op, std::move(lhs), std::move(rhs), {}});
}

CondPtr make_not(CondPtr c) { return std::make_shared<Cond>(Cond{CondKind::Not, RelOp::Eq, nullptr, nullptr, {std::move(c)}}); }

CondPtr make_and(std::vector<CondPtr> kids) {
    return std::make_shared<Cond>(Cond{CondKind::And, RelOp::Eq, nullptr, nullptr, std::move(kids)});
}

CondPtr make_or(std::vector<CondPtr> kids) {
    return std::make_shared<Cond>(Cond{CondKind::Or, RelOp::Eq, nullptr, nullptr, std::move(kids)});
}

CondPtr make_literal(int fluent, bool positive) {
    return make_rel(RelOp::Eq, make_fluent(fluent), make_const(positive ? 1 : 0));
}

const char* rel_word(RelOp op) {
    switch (op) {
    case RelOp::Eq: return "eq";
    case RelOp::Ne: return "neq";
    case RelOp::Lt: return "lt";
    case RelOp::Le: return "leq";
    case RelOp::Gt: return "gt";
    case RelOp::Ge: return "geq";
    }
    return "?";
}

RelOp negate(RelOp op) {
    switch (op) {
    case RelOp::Eq: return RelOp::Ne;
    case RelOp::Ne: return RelOp::Eq;
    case RelOp::Lt: return RelOp::Ge;
    case RelOp::Le: return RelOp::Gt;
    case RelOp::Gt: return RelOp::Le;
    case RelOp::Ge: return RelOp::Lt;
    }
    return op;
}

bool rel_holds(RelOp op, std::int64_t a, std::int64_t b) {
    switch (op) {
    case RelOp::Eq: return a == b;
    case RelOp::Ne: return a != b;
    case RelOp::Lt: return a < b;
    case RelOp::Le: return a <= b;
    case RelOp::Gt: return a > b;
    case RelOp::Ge: return a >= b;
    }
    return false;
}

void visit(const Cond& c, const std::function<void(const Cond&)>& on_cond,
           const std::function<void(const Expr&)>& on_expr) {
    std::function<void(const Expr&)> walk_expr = [&](const Expr& e) {
        if (on_expr) on_expr(e);
        if (e.a) walk_expr(*e.a);
        if (e.b) walk_expr(*e.b);
        if (e.c) visit(*e.c, on_cond, on_expr);
    };
    if (on_cond) on_cond(c);
    if (c.lhs) walk_expr(*c.lhs);
    if (c.rhs) walk_expr(*c.rhs);
    for (const auto& k : c.kids) visit(*k, on_cond, on_expr);
}

void collect_refs(const Expr& e, std::vector<FluentRef>& out) {
    if (e.kind == ExprKind::Fluent) out.push_back({e.fluent, e.shift, false});
    if (e.kind == ExprKind::Timed) out.push_back({e.fluent, e.shift, true});
    if (e.a) collect_refs(*e.a, out);
    if (e.b) collect_refs(*e.b, out);
    if (e.c) collect_refs(*e.c, out);
}

void collect_refs(const Cond& c, std::vector<FluentRef>& out) {
    if (c.lhs) collect_refs(*c.lhs, out);
    if (c.rhs) collect_refs(*c.rhs, out);
    for (const auto& k : c.kids) collect_refs(*k, out);
}

std::vector<int> fluents_of(const Cond& c) {
    std::vector<FluentRef> refs;
    collect_refs(c, refs);
    std::vector<int> out;
    for (const auto& r : refs) out.push_back(r.fluent);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool has_cost_terms(const Expr& e) {
    if (e.kind == ExprKind::CostPlan || e.kind == ExprKind::CostGoal || e.kind == ExprKind::CostState) return true;
    return (e.a && has_cost_terms(*e.a)) || (e.b && has_cost_terms(*e.b)) || (e.c && has_cost_terms(*e.c));
}

bool has_cost_terms(const Cond& c) {
    if (c.lhs && has_cost_terms(*c.lhs)) return true;
    if (c.rhs && has_cost_terms(*c.rhs)) return true;
    for (const auto& k : c.kids)
        if (has_cost_terms(*k)) return true;
    return false;
}

} // namespace bplan
