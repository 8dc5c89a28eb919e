#include "bplan/frontend/domain.hpp"

#include "bplan/frontend/parser.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace bplan {

using frontend::FrontendError;
using frontend::SourcePos;
using frontend::Term;

int DomainDescription::add_fluent(const std::string& name, fd::Domain dom) {
    int id = num_fluents();
    Term t;
    try {
        t = frontend::parse_term(name);
    } catch (const FrontendError&) {
        t = Term::atom(name);
    }
    fluents.push_back({name, t, std::move(dom)});
    fluent_index[name] = id;
    return id;
}

int DomainDescription::add_action(const std::string& name) {
    int id = num_actions();
    Term t;
    try {
        t = frontend::parse_term(name);
    } catch (const FrontendError&) {
        t = Term::atom(name);
    }
    actions.push_back(name);
    action_terms.push_back(t);
    action_index[name] = id;
    action_cost.push_back(nullptr);
    return id;
}

bool DomainDescription::has_temporal_refs() const {
    auto check = [](const CondPtr& c) {
        if (!c) return false;
        std::vector<FluentRef> refs;
        collect_refs(*c, refs);
        for (const auto& r : refs)
            if (r.timed || r.shift != 0) return true;
        return false;
    };
    for (const auto& l : dynamic_laws)
        if (check(l.effect) || check(l.pre)) return true;
    for (const auto& l : static_laws)
        if (check(l.body) || check(l.head)) return true;
    for (const auto& l : executable)
        if (check(l.cond)) return true;
    return false;
}

namespace {

// Constants have depth 0; f(t1..tn) is one deeper than its deepest argument.
int term_depth(const Term& t) {
    if (t.is_int() || t.is_var() || t.args().empty()) return 0;
    int d = 0;
    for (const auto& a : t.args()) d = std::max(d, term_depth(a));
    return d + 1;
}

const std::map<std::string, RelOp>& rel_ops() {
    static const std::map<std::string, RelOp> ops = {
        {"eq", RelOp::Eq},  {"=", RelOp::Eq},  {"=:=", RelOp::Eq}, {"neq", RelOp::Ne}, {"\\=", RelOp::Ne},
        {"=\\=", RelOp::Ne}, {"lt", RelOp::Lt}, {"<", RelOp::Lt},  {"leq", RelOp::Le}, {"=<", RelOp::Le},
        {"gt", RelOp::Gt},  {">", RelOp::Gt},  {"geq", RelOp::Ge}, {">=", RelOp::Ge},
    };
    return ops;
}

enum Where { InEffect, InOther, InAlways };

class Extractor {
public:
    Extractor(const frontend::GroundProgram& gp, const ExtractOptions& o) : gp_(gp), opts_(o) {}

    DomainDescription run() {
        detect_language();
        declare_fluents();
        declare_actions();
        for (const auto* f : gp_.of("executable", 2)) {
            int a = action(f->atom.arg(0), f->pos);
            d_.executable.push_back({a, cond(f->atom.arg(1), f->pos, InOther), f->pos});
        }
        for (const auto* f : gp_.of("nonexecutable", 2)) {
            if (!opts_.allow_nonexecutable)
                throw FrontendError(f->pos, "nonexecutable laws need the nonexecutable option");
            int a = action(f->atom.arg(0), f->pos);
            d_.nonexecutable.push_back({a, cond(f->atom.arg(1), f->pos, InOther), f->pos});
        }
        for (const auto* f : gp_.of("causes", 3)) {
            int a = action(f->atom.arg(0), f->pos);
            d_.dynamic_laws.push_back(
                {a, effect(f->atom.arg(1), f->pos), cond(f->atom.arg(2), f->pos, InOther), f->pos});
        }
        for (const auto* f : gp_.of("caused", 2))
            d_.static_laws.push_back({cond(f->atom.arg(0), f->pos, InOther), effect_static(f->atom.arg(1), f->pos), f->pos});
        for (const auto* f : gp_.of("initially", 1)) d_.initially.push_back(cond(f->atom.arg(0), f->pos, InOther));
        for (const auto* f : gp_.of("goal", 1)) d_.goal.push_back(cond(f->atom.arg(0), f->pos, InOther));
        for (const auto* f : gp_.of("holds", 2)) {
            if (!f->atom.arg(1).is_int()) throw FrontendError(f->pos, "holds/2 needs an integer time point");
            d_.holds.push_back({cond(f->atom.arg(0), f->pos, InOther), static_cast<int>(f->atom.arg(1).int_value())});
        }
        for (const auto* f : gp_.of("always", 1)) d_.always.push_back(cond(f->atom.arg(0), f->pos, InAlways));
        for (const auto* f : gp_.of("time_constraint", 1))
            d_.time_constraints.push_back(cond(f->atom.arg(0), f->pos, InOther));
        for (const auto* f : gp_.of("action_cost", 2)) {
            int a = action(f->atom.arg(0), f->pos);
            if (d_.action_cost[static_cast<std::size_t>(a)])
                throw FrontendError(f->pos, "duplicate action_cost for " + d_.actions[static_cast<std::size_t>(a)]);
            d_.action_cost[static_cast<std::size_t>(a)] = expr(f->atom.arg(1), f->pos, InOther);
        }
        for (const auto* f : gp_.of("state_cost", 1)) {
            if (d_.state_cost) throw FrontendError(f->pos, "duplicate state_cost");
            d_.state_cost = expr(f->atom.arg(0), f->pos, InOther);
        }
        allow_cost_ = true;
        for (const auto* f : gp_.of("cost_constraint", 1))
            d_.cost_constraints.push_back(cond(f->atom.arg(0), f->pos, InOther));
        for (const auto* f : gp_.of("minimize_cost", 1)) {
            if (d_.minimize_cost) throw FrontendError(f->pos, "duplicate minimize_cost");
            d_.minimize_cost = expr(f->atom.arg(0), f->pos, InOther);
        }
        allow_cost_ = false;
        check_executability();
        check_initial_values();
        return std::move(d_);
    }

private:
    void detect_language() {
        bool mv = !gp_.of("fluent", 3).empty() || !gp_.of("fluent", 2).empty();
        bool b = !gp_.of("fluent", 1).empty();
        if (opts_.lang) {
            d_.lang = *opts_.lang;
            if (d_.lang == Language::B && mv)
                throw FrontendError({}, "B descriptions declare Boolean fluents with fluent/1");
        } else if (mv) {
            d_.lang = Language::BMV;
        } else if (b) {
            d_.lang = Language::B;
        } else {
            throw FrontendError({}, "no fluents declared");
        }
    }

    void declare(const Term& t, fd::Domain dom, SourcePos pos) {
        if (dom.empty()) throw FrontendError(pos, "fluent " + t.to_string() + " has an empty domain");
        check_depth(t, pos);
        std::string name = t.to_string();
        auto it = d_.fluent_index.find(name);
        if (it != d_.fluent_index.end()) {
            if (!(d_.fluents[static_cast<std::size_t>(it->second)].domain == dom))
                throw FrontendError(pos, "fluent " + name + " declared with two different domains");
            return;
        }
        int id = d_.num_fluents();
        d_.fluents.push_back({name, t, std::move(dom)});
        d_.fluent_index[name] = id;
    }

    void declare_fluents() {
        for (const auto& f : gp_.facts()) {
            const Term& a = f.atom;
            if (a.is("fluent", 1)) {
                declare(a.arg(0), fd::Domain::range(0, 1), f.pos);
            } else if (a.is("fluent", 3)) {
                if (!a.arg(1).is_int() || !a.arg(2).is_int()) throw FrontendError(f.pos, "fluent bounds must be integers");
                declare(a.arg(0), fd::Domain::range(a.arg(1).int_value(), a.arg(2).int_value()), f.pos);
            } else if (a.is("fluent", 2)) {
                declare(a.arg(0), set_domain(a.arg(1), f.pos), f.pos);
            }
        }
    }

    static fd::Domain set_domain(const Term& s, SourcePos pos) {
        std::vector<Term> elems;
        if (s.is("{}", 1)) {
            Term cur = s.arg(0);
            while (cur.is(",", 2)) {
                elems.push_back(cur.arg(0));
                cur = cur.arg(1);
            }
            elems.push_back(cur);
        } else if (s.is_list()) {
            elems = s.args();
        } else {
            throw FrontendError(pos, "fluent/2 expects a set {v1,...,vk}");
        }
        std::vector<fd::Value> vals;
        for (const auto& e : elems) {
            if (!e.is_int()) throw FrontendError(pos, "fluent values must be integers");
            vals.push_back(e.int_value());
        }
        return fd::Domain::from_values(vals);
    }

    void declare_actions() {
        for (const auto* f : gp_.of("action", 1)) {
            std::string name = f->atom.arg(0).to_string();
            if (d_.action_index.count(name)) continue;
            check_depth(f->atom.arg(0), f->pos);
            int id = d_.num_actions();
            d_.actions.push_back(name);
            d_.action_terms.push_back(f->atom.arg(0));
            d_.action_index[name] = id;
            d_.action_cost.push_back(nullptr);
        }
    }

    void check_depth(const Term& t, SourcePos pos) const {
        if (term_depth(t) > opts_.max_term_depth)
            throw FrontendError(pos, t.to_string() + " nests deeper than " + std::to_string(opts_.max_term_depth));
    }

    int action(const Term& t, SourcePos pos) {
        auto it = d_.action_index.find(t.to_string());
        if (it == d_.action_index.end()) throw FrontendError(pos, "undeclared action " + t.to_string());
        return it->second;
    }

    int fluent(const Term& t, SourcePos pos) {
        auto it = d_.fluent_index.find(t.to_string());
        if (it == d_.fluent_index.end()) throw FrontendError(pos, "undeclared fluent " + t.to_string());
        return it->second;
    }

    bool is_fluent(const Term& t) const { return d_.fluent_index.count(t.to_string()) > 0; }

    CondPtr literal(const Term& t, SourcePos pos) {
        if (t.is("neg", 1)) return make_literal(fluent(t.arg(0), pos), false);
        if (t.is("true", 0)) return make_true();
        if (t.is("false", 0)) return make_false();
        if (!is_fluent(t)) {
            if (t.is_atom() && t.arity() == 2 && rel_ops().count(t.name()))
                throw FrontendError(pos, "B fluent used non-Booleanly in " + t.to_string());
            throw FrontendError(pos, "undeclared fluent " + t.to_string());
        }
        return make_literal(fluent(t, pos), true);
    }

    CondPtr effect(const Term& t, SourcePos pos) {
        if (d_.lang == Language::B) return literal(t, pos);
        return cond(t, pos, InEffect);
    }

    CondPtr effect_static(const Term& t, SourcePos pos) {
        if (d_.lang == Language::B) return literal(t, pos);
        return cond(t, pos, InOther);
    }

    CondPtr cond(const Term& t, SourcePos pos, Where where) {
        if (d_.lang == Language::B) {
            if (t.is_list()) {
                std::vector<CondPtr> kids;
                for (const auto& e : t.args()) kids.push_back(literal(e, pos));
                return kids.size() == 1 ? kids[0] : make_and(std::move(kids));
            }
            return literal(t, pos);
        }
        if (t.is_list()) {
            std::vector<CondPtr> kids;
            for (const auto& e : t.args()) kids.push_back(cond(e, pos, where));
            return kids.size() == 1 ? kids[0] : make_and(std::move(kids));
        }
        if (t.is("true", 0)) return make_true();
        if (t.is("false", 0)) return make_false();
        if (t.is("neg", 1)) return make_not(cond(t.arg(0), pos, where));
        if (t.is("and", 2) || t.is(",", 2)) return make_and({cond(t.arg(0), pos, where), cond(t.arg(1), pos, where)});
        if (t.is("or", 2) || t.is(";", 2)) return make_or({cond(t.arg(0), pos, where), cond(t.arg(1), pos, where)});
        if (t.is_atom() && t.arity() == 2) {
            auto it = rel_ops().find(t.name());
            if (it != rel_ops().end()) return make_rel(it->second, expr(t.arg(0), pos, where), expr(t.arg(1), pos, where));
        }
        throw FrontendError(pos, "not a constraint: " + t.to_string());
    }

    ExprPtr expr(const Term& t, SourcePos pos, Where where) {
        if (t.is_int()) return make_const(t.int_value());
        if (t.is_atom()) {
            if (allow_cost_ && t.is("plan", 0)) return make_cost(ExprKind::CostPlan);
            if (allow_cost_ && t.is("goal", 0)) return make_cost(ExprKind::CostGoal);
            if (allow_cost_ && t.is("state", 1) && t.arg(0).is_int() && !is_fluent(t))
                return make_cost(ExprKind::CostState, t.arg(0).int_value());
            if (is_fluent(t)) {
                if (d_.lang == Language::B)
                    throw FrontendError(pos, "B fluent used non-Booleanly: " + t.to_string());
                return make_fluent(fluent(t, pos), 0);
            }
            if (t.is("^", 2)) {
                const Term& k = t.arg(1);
                if (!k.is_int()) throw FrontendError(pos, "annotation must be an integer in " + t.to_string());
                int shift = static_cast<int>(k.int_value());
                if (where == InAlways) throw FrontendError(pos, "annotated fluents are not allowed in always/1");
                if (shift > 0 && where != InEffect)
                    throw FrontendError(pos, "positively annotated fluent outside a dynamic-law effect: " + t.to_string());
                return make_fluent(fluent(t.arg(0), pos), shift);
            }
            if (t.is("@", 2)) {
                if (!t.arg(1).is_int()) throw FrontendError(pos, "time point must be an integer in " + t.to_string());
                if (where == InAlways) throw FrontendError(pos, "timed fluents are not allowed in always/1");
                return make_timed(fluent(t.arg(0), pos), static_cast<int>(t.arg(1).int_value()));
            }
            if (t.is("rei", 1)) return make_rei(cond(t.arg(0), pos, where));
            if (t.is("abs", 1)) return make_unary(ExprKind::Abs, expr(t.arg(0), pos, where));
            if (t.is("-", 1)) {
                ExprPtr a = expr(t.arg(0), pos, where);
                if (a->kind == ExprKind::Const) return make_const(-a->value);
                return make_unary(ExprKind::Neg, a);
            }
            if (t.is("+", 1)) return expr(t.arg(0), pos, where);
            static const std::map<std::string, ExprKind> bin = {{"+", ExprKind::Add}, {"-", ExprKind::Sub},
                                                                 {"*", ExprKind::Mul}, {"/", ExprKind::Div},
                                                                 {"//", ExprKind::Div}, {"mod", ExprKind::Mod}};
            if (t.arity() == 2) {
                auto it = bin.find(t.name());
                if (it != bin.end()) return make_binary(it->second, expr(t.arg(0), pos, where), expr(t.arg(1), pos, where));
            }
            throw FrontendError(pos, "undeclared fluent " + t.to_string());
        }
        throw FrontendError(pos, "not an expression: " + t.to_string());
    }

    void check_executability() {
        std::vector<bool> has(d_.actions.size(), false);
        for (const auto& e : d_.executable) has[static_cast<std::size_t>(e.action)] = true;
        for (std::size_t a = 0; a < has.size(); ++a)
            if (!has[a]) throw FrontendError({}, "action " + d_.actions[a] + " has no executable axiom");
    }

    void check_initial_values() {
        for (const auto& c : d_.initially) {
            std::vector<CondPtr> parts{c};
            if (c->kind == CondKind::And) parts = c->kids;
            for (const auto& p : parts) {
                if (p->kind != CondKind::Rel || p->op != RelOp::Eq) continue;
                const Expr* f = p->lhs.get();
                const Expr* v = p->rhs.get();
                if (f->kind != ExprKind::Fluent) std::swap(f, v);
                if (f->kind != ExprKind::Fluent || v->kind != ExprKind::Const) continue;
                const auto& decl = d_.fluents[static_cast<std::size_t>(f->fluent)];
                if (!decl.domain.contains(v->value))
                    throw FrontendError({}, "initially pins " + decl.name + " to " + std::to_string(v->value) +
                                                " outside its domain " + decl.domain.to_string());
            }
        }
    }

    const frontend::GroundProgram& gp_;
    ExtractOptions opts_;
    DomainDescription d_;
    bool allow_cost_ = false;
};

Term expr_term(const Expr& e, const DomainDescription& d);

Term cond_term(const Cond& c, const DomainDescription& d) {
    switch (c.kind) {
    case CondKind::True: return Term::atom("true");
    case CondKind::False: return Term::atom("false");
    case CondKind::Rel: return Term::atom(rel_word(c.op), {expr_term(*c.lhs, d), expr_term(*c.rhs, d)});
    case CondKind::Not: return Term::atom("neg", {cond_term(*c.kids[0], d)});
    case CondKind::And: {
        std::vector<Term> parts;
        for (const auto& k : c.kids) parts.push_back(cond_term(*k, d));
        return Term::list(std::move(parts));
    }
    case CondKind::Or: {
        Term acc = cond_term(*c.kids.back(), d);
        for (std::size_t i = c.kids.size() - 1; i-- > 0;) acc = Term::atom("or", {cond_term(*c.kids[i], d), acc});
        return acc;
    }
    }
    return Term::atom("true");
}

Term expr_term(const Expr& e, const DomainDescription& d) {
    auto fl = [&](int f) { return d.fluents[static_cast<std::size_t>(f)].term; };
    switch (e.kind) {
    case ExprKind::Const: return Term::integer(e.value);
    case ExprKind::Fluent:
        if (e.shift == 0) return fl(e.fluent);
        return Term::atom("^", {fl(e.fluent), Term::integer(e.shift)});
    case ExprKind::Timed: return Term::atom("@", {fl(e.fluent), Term::integer(e.shift)});
    case ExprKind::Neg: return Term::atom("-", {expr_term(*e.a, d)});
    case ExprKind::Abs: return Term::atom("abs", {expr_term(*e.a, d)});
    case ExprKind::Add: return Term::atom("+", {expr_term(*e.a, d), expr_term(*e.b, d)});
    case ExprKind::Sub: return Term::atom("-", {expr_term(*e.a, d), expr_term(*e.b, d)});
    case ExprKind::Mul: return Term::atom("*", {expr_term(*e.a, d), expr_term(*e.b, d)});
    case ExprKind::Div: return Term::atom("/", {expr_term(*e.a, d), expr_term(*e.b, d)});
    case ExprKind::Mod: return Term::atom("mod", {expr_term(*e.a, d), expr_term(*e.b, d)});
    case ExprKind::Rei: return Term::atom("rei", {cond_term(*e.c, d)});
    case ExprKind::CostPlan: return Term::atom("plan");
    case ExprKind::CostGoal: return Term::atom("goal");
    case ExprKind::CostState: return Term::atom("state", {Term::integer(e.value)});
    }
    return Term::integer(0);
}

// B literal as source term: f or neg(f).
Term b_literal_term(const Cond& c, const DomainDescription& d) {
    if (c.kind == CondKind::True) return Term::atom("true");
    const Term& f = d.fluents[static_cast<std::size_t>(c.lhs->fluent)].term;
    return c.rhs->value != 0 ? f : Term::atom("neg", {f});
}

Term b_list_term(const Cond& c, const DomainDescription& d) {
    std::vector<Term> out;
    if (c.kind == CondKind::And) {
        for (const auto& k : c.kids) out.push_back(b_literal_term(*k, d));
    } else if (c.kind != CondKind::True) {
        out.push_back(b_literal_term(c, d));
    }
    return Term::list(std::move(out));
}

Term list_term(const Cond& c, const DomainDescription& d) {
    if (d.lang == Language::B) return b_list_term(c, d);
    if (c.kind == CondKind::True) return Term::list({});
    if (c.kind == CondKind::And) return cond_term(c, d);
    return Term::list({cond_term(c, d)});
}

Term single_term(const Cond& c, const DomainDescription& d) {
    return d.lang == Language::B ? b_literal_term(c, d) : cond_term(c, d);
}

} // namespace

DomainDescription extract_domain(const frontend::GroundProgram& gp, const ExtractOptions& opts) {
    Extractor ex(gp, opts);
    return ex.run();
}

DomainDescription load_domain_text(const std::string& text, const ExtractOptions& opts,
                                   const frontend::GroundOptions& gopts) {
    auto prog = frontend::parse_program(text);
    auto gp = frontend::ground(prog, gopts);
    return extract_domain(gp, opts);
}

DomainDescription load_domain_file(const std::string& path, const ExtractOptions& opts,
                                   const frontend::GroundOptions& gopts) {
    std::ifstream in(path);
    if (!in) throw FrontendError({}, "cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_domain_text(ss.str(), opts, gopts);
}

Term to_term(const Cond& c, const DomainDescription& d) { return cond_term(c, d); }
Term to_term(const Expr& e, const DomainDescription& d) { return expr_term(e, d); }
std::string to_source(const Cond& c, const DomainDescription& d) { return cond_term(c, d).to_string(); }
std::string to_source(const Expr& e, const DomainDescription& d) { return expr_term(e, d).to_string(); }

std::string literal_name(const DomainDescription& d, int fluent, bool positive) {
    const std::string& n = d.fluents[static_cast<std::size_t>(fluent)].name;
    return positive ? n : "neg(" + n + ")";
}

std::string dump_ground(const DomainDescription& d) {
    std::ostringstream os;
    auto fact = [&](const std::string& f, std::vector<Term> args) { os << Term::atom(f, std::move(args)).to_string() << ".\n"; };
    for (const auto& f : d.fluents) {
        if (d.lang == Language::B) {
            fact("fluent", {f.term});
        } else if (f.domain.intervals().size() == 1) {
            fact("fluent", {f.term, Term::integer(f.domain.min()), Term::integer(f.domain.max())});
        } else {
            auto vals = f.domain.values();
            Term acc = Term::integer(vals.back());
            for (std::size_t i = vals.size() - 1; i-- > 0;) acc = Term::atom(",", {Term::integer(vals[i]), acc});
            fact("fluent", {f.term, Term::atom("{}", {acc})});
        }
    }
    for (const auto& a : d.action_terms) fact("action", {a});
    auto act = [&](int a) { return d.action_terms[static_cast<std::size_t>(a)]; };
    for (const auto& l : d.executable) fact("executable", {act(l.action), list_term(*l.cond, d)});
    for (const auto& l : d.nonexecutable) fact("nonexecutable", {act(l.action), list_term(*l.cond, d)});
    for (const auto& l : d.dynamic_laws) fact("causes", {act(l.action), single_term(*l.effect, d), list_term(*l.pre, d)});
    for (const auto& l : d.static_laws) fact("caused", {list_term(*l.body, d), single_term(*l.head, d)});
    for (const auto& c : d.initially) fact("initially", {single_term(*c, d)});
    for (const auto& c : d.goal) fact("goal", {single_term(*c, d)});
    for (const auto& [c, t] : d.holds) fact("holds", {single_term(*c, d), Term::integer(t)});
    for (const auto& c : d.always) fact("always", {single_term(*c, d)});
    for (const auto& c : d.time_constraints) fact("time_constraint", {single_term(*c, d)});
    for (std::size_t a = 0; a < d.action_cost.size(); ++a)
        if (d.action_cost[a]) fact("action_cost", {d.action_terms[a], expr_term(*d.action_cost[a], d)});
    if (d.state_cost) fact("state_cost", {expr_term(*d.state_cost, d)});
    for (const auto& c : d.cost_constraints) fact("cost_constraint", {cond_term(*c, d)});
    if (d.minimize_cost) fact("minimize_cost", {expr_term(*d.minimize_cost, d)});
    return os.str();
}

} // namespace bplan
