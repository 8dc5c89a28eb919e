#include "bplan/frontend/grounder.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <set>
#include <unordered_map>

namespace bplan::frontend {

std::vector<const GroundFact*> GroundProgram::of(const std::string& name, std::size_t arity) const {
    std::vector<const GroundFact*> out;
    auto it = by_pred_.find({name, arity});
    if (it == by_pred_.end()) return out;
    for (std::size_t i : it->second) out.push_back(&facts_[i]);
    return out;
}

namespace {

using PredKey = std::pair<std::string, std::size_t>;

std::string key_string(const PredKey& k) { return k.first + "/" + std::to_string(k.second); }

const std::set<PredKey>& builtins() {
    static const std::set<PredKey> b = {
        {"=", 2},   {"\\=", 2}, {"==", 2},       {"\\==", 2},  {"neq", 2},     {"is", 2},     {"<", 2},
        {">", 2},   {"=<", 2},  {">=", 2},       {"=:=", 2},   {"=\\=", 2},    {"gt", 2},     {"lt", 2},
        {"geq", 2}, {"leq", 2}, {"eq", 2},       {"diff", 3},  {"interval", 3}, {"between", 3}, {"findall", 3},
        {"append", 3}, {"length", 2}, {"member", 2}, {"!", 0},  {"true", 0},    {"fail", 0},   {"false", 0},
        {",", 2},   {";", 2},   {"\\+", 1},
    };
    return b;
}

bool is_builtin(const Term& g) { return g.is_atom() && builtins().count({g.name(), g.arity()}) > 0; }

// Domain-description predicates must be fully materialised.
const std::set<std::string>& reserved_preds() {
    static const std::set<std::string> r = {"fluent",  "action",     "causes",         "caused",        "executable",
                                            "nonexecutable", "initially", "goal",       "holds",         "always",
                                            "time_constraint", "action_cost", "state_cost", "cost_constraint",
                                            "minimize_cost"};
    return r;
}

void collect_vars(const Term& t, std::set<int>& out) {
    if (t.is_var()) {
        out.insert(t.var_id());
        return;
    }
    if (t.is_int()) return;
    for (const auto& a : t.args()) collect_vars(a, out);
}

bool subset(const std::set<int>& a, const std::set<int>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

// Static binding analysis: can goal g run given bound vars, and which vars does it bind?
bool analyse_goal(const Term& g, std::set<int>& bound) {
    auto vars_of = [](const Term& t) {
        std::set<int> s;
        collect_vars(t, s);
        return s;
    };
    if (g.is_var()) return false;
    if (!is_builtin(g)) {
        collect_vars(g, bound);
        return true;
    }
    const std::string& f = g.name();
    if (f == "=") {
        if (subset(vars_of(g.arg(0)), bound) || subset(vars_of(g.arg(1)), bound)) {
            collect_vars(g, bound);
            return true;
        }
        return false;
    }
    if (f == "is") {
        if (!subset(vars_of(g.arg(1)), bound)) return false;
        collect_vars(g.arg(0), bound);
        return true;
    }
    if (f == "interval" || f == "between") {
        const Term& x = f == "interval" ? g.arg(0) : g.arg(2);
        const Term& lo = f == "interval" ? g.arg(1) : g.arg(0);
        const Term& hi = f == "interval" ? g.arg(2) : g.arg(1);
        if (!subset(vars_of(lo), bound) || !subset(vars_of(hi), bound)) return false;
        collect_vars(x, bound);
        return true;
    }
    if (f == "findall") {
        collect_vars(g.arg(2), bound);
        return true;
    }
    if (f == "append") {
        if (subset(vars_of(g.arg(0)), bound) && subset(vars_of(g.arg(1)), bound)) {
            collect_vars(g.arg(2), bound);
            return true;
        }
        if (subset(vars_of(g.arg(2)), bound)) {
            collect_vars(g, bound);
            return true;
        }
        return false;
    }
    if (f == "length" || f == "member") {
        const Term& l = f == "length" ? g.arg(0) : g.arg(1);
        if (!subset(vars_of(l), bound)) return false;
        collect_vars(g, bound);
        return true;
    }
    if (f == "!" || f == "true" || f == "fail" || f == "false") return true;
    if (f == "," || f == ";") {
        collect_vars(g, bound);
        return true;
    }
    return subset(vars_of(g), bound);
}

bool range_restricted(const Clause& c) {
    std::set<int> bound;
    std::vector<Term> pending = c.body;
    for (const auto& g : pending)
        if (g.is("!", 0)) return false;
    bool progress = true;
    while (!pending.empty() && progress) {
        progress = false;
        for (std::size_t i = 0; i < pending.size(); ++i) {
            if (analyse_goal(pending[i], bound)) {
                pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(i));
                progress = true;
                break;
            }
        }
    }
    if (!pending.empty()) return false;
    std::set<int> hv;
    collect_vars(c.head, hv);
    return subset(hv, bound);
}

// Predicates called by a goal; strict = inside findall or negation.
void called_preds(const Term& g, bool strict, std::vector<std::pair<PredKey, bool>>& out) {
    if (!g.is_atom()) return;
    if (g.is(",", 2) || g.is(";", 2)) {
        called_preds(g.arg(0), strict, out);
        called_preds(g.arg(1), strict, out);
        return;
    }
    if (g.is("findall", 3)) {
        called_preds(g.arg(1), true, out);
        return;
    }
    if (g.is("\\+", 1)) {
        called_preds(g.arg(0), true, out);
        return;
    }
    if (is_builtin(g)) return;
    out.push_back({{g.name(), g.arity()}, strict});
}

enum class Sig { Fail, Stop, Cut };

struct GoalNode;
using Goals = std::shared_ptr<const GoalNode>;
struct GoalNode {
    Term goal;
    int barrier;
    Goals next;
};

Goals cons(Term g, int barrier, Goals next) { return std::make_shared<const GoalNode>(GoalNode{std::move(g), barrier, std::move(next)}); }

} // namespace

std::int64_t eval_arith(const Term& t) {
    if (t.is_int()) return t.int_value();
    if (t.is_var()) throw FrontendError({}, "arithmetic on unbound variable " + t.to_string());
    if (!t.is_atom()) throw FrontendError({}, "not an arithmetic expression: " + t.to_string());
    const std::string& f = t.name();
    if (t.arity() == 1) {
        std::int64_t a = eval_arith(t.arg(0));
        if (f == "-") return -a;
        if (f == "+") return a;
        if (f == "abs") return a < 0 ? -a : a;
    } else if (t.arity() == 2) {
        std::int64_t a = eval_arith(t.arg(0)), b = eval_arith(t.arg(1));
        if (f == "+") return a + b;
        if (f == "-") return a - b;
        if (f == "*") return a * b;
        if (f == "/" || f == "//" || f == "mod" || f == "rem") {
            if (b == 0) throw FrontendError({}, "division by zero in " + t.to_string());
            if (f == "mod") {
                std::int64_t r = a % b;
                return (r != 0 && ((r < 0) != (b < 0))) ? r + b : r;
            }
            return f == "rem" ? a % b : a / b;
        }
        if (f == "min") return std::min(a, b);
        if (f == "max") return std::max(a, b);
        if (f == "**" || f == "^") {
            if (b < 0) throw FrontendError({}, "negative exponent in " + t.to_string());
            std::int64_t r = 1;
            for (std::int64_t i = 0; i < b; ++i) r *= a;
            return r;
        }
    }
    throw FrontendError({}, "not an arithmetic expression: " + t.to_string());
}

class Grounder {
public:
    Grounder(const Program& p, const GroundOptions& o) : prog_(p), opts_(o) {}

    GroundProgram run() {
        classify();
        auto order = strata();
        for (const auto& scc : order) evaluate(scc);
        return std::move(out_);
    }

private:
    void classify() {
        for (std::size_t i = 0; i < prog_.clauses.size(); ++i) {
            const Clause& c = prog_.clauses[i];
            PredKey k{c.head.name(), c.head.arity()};
            if (builtins().count(k)) throw FrontendError(c.pos, "cannot redefine builtin " + key_string(k));
            clauses_of_[k].push_back(i);
            if (!range_restricted(c)) procedural_.insert(k);
        }
        for (const auto& k : procedural_) {
            if (!reserved_preds().count(k.first)) continue;
            for (std::size_t i : clauses_of_[k])
                if (!range_restricted(prog_.clauses[i]))
                    throw FrontendError(prog_.clauses[i].pos, "clause for " + key_string(k) + " is not range-restricted");
        }
    }

    // Tarjan SCCs over predicate dependencies, dependencies first.
    std::vector<std::vector<PredKey>> strata() {
        std::map<PredKey, std::vector<std::pair<PredKey, bool>>> edges;
        for (const auto& [k, idx] : clauses_of_) {
            auto& e = edges[k];
            for (std::size_t i : idx)
                for (const auto& g : prog_.clauses[i].body) called_preds(g, false, e);
            for (auto& [q, strict] : e)
                if (procedural_.count(q)) strict = true;
        }
        std::map<PredKey, int> index, low;
        std::set<PredKey> on_stack;
        std::vector<PredKey> stack;
        std::vector<std::vector<PredKey>> result;
        int counter = 0;
        std::function<void(const PredKey&)> visit = [&](const PredKey& v) {
            index[v] = low[v] = counter++;
            stack.push_back(v);
            on_stack.insert(v);
            for (const auto& [w, strict] : edges[v]) {
                (void)strict;
                if (!clauses_of_.count(w)) continue;
                if (!index.count(w)) {
                    visit(w);
                    low[v] = std::min(low[v], low[w]);
                } else if (on_stack.count(w)) {
                    low[v] = std::min(low[v], index[w]);
                }
            }
            if (low[v] == index[v]) {
                std::vector<PredKey> scc;
                PredKey w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack.erase(w);
                    scc.push_back(w);
                } while (w != v);
                result.push_back(scc);
            }
        };
        for (const auto& [k, idx] : clauses_of_)
            if (!index.count(k)) visit(k);
        for (const auto& scc : result) {
            std::set<PredKey> members(scc.begin(), scc.end());
            for (const auto& p : scc)
                for (const auto& [q, strict] : edges[p])
                    if (strict && members.count(q) && !procedural_.count(q))
                        throw FrontendError(prog_.clauses[clauses_of_[p].front()].pos,
                                            "predicate " + key_string(p) + " depends on " + key_string(q) +
                                                " through findall or negation within a recursive cycle");
        }
        return result;
    }

    void evaluate(const std::vector<PredKey>& scc) {
        std::vector<std::size_t> rules;
        for (const auto& k : scc) {
            if (procedural_.count(k)) continue;
            for (std::size_t i : clauses_of_[k]) rules.push_back(i);
        }
        std::sort(rules.begin(), rules.end());
        if (rules.empty()) return;
        for (;;) {
            std::size_t before = out_.facts_.size();
            for (std::size_t ri : rules) {
                const Clause& c = prog_.clauses[ri];
                bind_.clear();
                trail_.clear();
                bind_.resize(static_cast<std::size_t>(c.num_vars));
                Goals goals;
                for (auto it = c.body.rbegin(); it != c.body.rend(); ++it) goals = cons(*it, 0, goals);
                try {
                    solve(goals, [&]() {
                        Term h = resolve(c.head);
                        if (!h.ground()) throw FrontendError(c.pos, "derived non-ground fact " + h.to_string());
                        insert(h, c.pos);
                        return Sig::Fail;
                    }, 0);
                } catch (const FrontendError& e) {
                    if (e.pos().line > 0) throw;
                    throw FrontendError(c.pos, e.what());
                }
            }
            if (out_.facts_.size() == before) break;
        }
    }

    void insert(const Term& atom, SourcePos pos) {
        std::string key = atom.to_string();
        if (seen_.count(key)) return;
        if (out_.facts_.size() >= opts_.atom_budget)
            throw FrontendError(pos, "grounding exceeded the atom budget of " + std::to_string(opts_.atom_budget));
        seen_.emplace(std::move(key), out_.facts_.size());
        out_.by_pred_[{atom.name(), atom.arity()}].push_back(out_.facts_.size());
        out_.facts_.push_back({atom, pos});
    }

    // --- term store -------------------------------------------------------

    Term deref(Term t) const {
        while (t.is_var()) {
            const Term& b = bind_[static_cast<std::size_t>(t.var_id())];
            if (!b.valid()) break;
            t = b;
        }
        return t;
    }

    Term resolve(const Term& t0) const {
        Term t = deref(t0);
        if (t.is_var() || t.is_int() || t.arity() == 0) return t;
        std::vector<Term> args;
        args.reserve(t.arity());
        bool same = true;
        for (const auto& a : t.args()) {
            args.push_back(resolve(a));
            if (!args.back().same_node(a)) same = false;
        }
        if (same) return t;
        return t.is_list() ? Term::list(std::move(args)) : Term::atom(t.name(), std::move(args));
    }

    bool unify(const Term& a0, const Term& b0) {
        Term a = deref(a0), b = deref(b0);
        if (a.same_node(b)) return true;
        if (a.is_var()) {
            bind(a, b);
            return true;
        }
        if (b.is_var()) {
            bind(b, a);
            return true;
        }
        if (a.kind() != b.kind()) return false;
        if (a.is_int()) return a.int_value() == b.int_value();
        if (a.is_atom() && a.name() != b.name()) return false;
        if (a.arity() != b.arity()) return false;
        for (std::size_t i = 0; i < a.arity(); ++i)
            if (!unify(a.arg(i), b.arg(i))) return false;
        return true;
    }

    void bind(const Term& v, const Term& val) {
        bind_[static_cast<std::size_t>(v.var_id())] = val;
        trail_.push_back(v.var_id());
    }

    void undo(std::size_t mark) {
        while (trail_.size() > mark) {
            bind_[static_cast<std::size_t>(trail_.back())] = Term();
            trail_.pop_back();
        }
    }

    Term rename(const Term& t, int offset) const {
        if (t.is_var()) return Term::var(t.var_id() + offset, t.name());
        if (t.is_int() || t.arity() == 0) return t;
        std::vector<Term> args;
        args.reserve(t.arity());
        for (const auto& a : t.args()) args.push_back(rename(a, offset));
        return t.is_list() ? Term::list(std::move(args)) : Term::atom(t.name(), std::move(args));
    }

    // --- resolution -------------------------------------------------------

    bool ground_now(const Term& t) const { return resolve(t).ground(); }

    bool ready(const Term& g) const {
        if (!is_builtin(g)) return true;
        const std::string& f = g.name();
        if (f == "=" || f == "findall" || f == "!" || f == "true" || f == "fail" || f == "false" || f == "," ||
            f == ";")
            return true;
        if (f == "is") return ground_now(g.arg(1));
        if (f == "interval") return ground_now(g.arg(1)) && ground_now(g.arg(2));
        if (f == "between") return ground_now(g.arg(0)) && ground_now(g.arg(1));
        if (f == "append") return (ground_now(g.arg(0)) && ground_now(g.arg(1))) || ground_now(g.arg(2));
        if (f == "length") return ground_now(g.arg(0));
        if (f == "member") return ground_now(g.arg(1));
        return ground_now(g);
    }

    Sig solve(Goals gs, const std::function<Sig()>& k, int depth) {
        if (!gs) return k();
        if (depth > opts_.max_depth) throw FrontendError({}, "top-down evaluation exceeded the depth limit");
        Term g = deref(gs->goal);
        if (g.is_var()) throw FrontendError({}, "unbound goal");
        if (g.is_int() || g.is_list()) throw FrontendError({}, "goal is not callable: " + g.to_string());
        if (!ready(g)) {
            // Delay: run the first ready goal before this one (never across a cut).
            std::vector<const GoalNode*> prefix;
            const GoalNode* n = gs.get();
            while (n && !(deref(n->goal).is("!", 0)) && !ready(deref(n->goal))) {
                prefix.push_back(n);
                n = n->next.get();
            }
            if (!n || deref(n->goal).is("!", 0))
                throw FrontendError({}, "arguments are not sufficiently instantiated in " + resolve(g).to_string());
            Goals rest = n->next;
            for (auto it = prefix.rbegin(); it != prefix.rend(); ++it) rest = cons((*it)->goal, (*it)->barrier, rest);
            return solve(cons(n->goal, n->barrier, rest), k, depth);
        }
        const std::string& f = g.name();
        const Goals& next = gs->next;
        if (is_builtin(g)) return builtin(g, f, gs, next, k, depth);

        PredKey key{f, g.arity()};
        if (procedural_.count(key)) return call_clauses(g, key, next, k, depth);
        auto it = out_.by_pred_.find(key);
        if (it == out_.by_pred_.end()) return Sig::Fail;
        const std::size_t n = it->second.size();
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t fid = out_.by_pred_[key][i];
            Term fact = out_.facts_[fid].atom;
            std::size_t mark = trail_.size();
            if (unify(g, fact)) {
                Sig r = solve(next, k, depth);
                undo(mark);
                if (r != Sig::Fail) return r;
            } else {
                undo(mark);
            }
        }
        return Sig::Fail;
    }

    Sig call_clauses(const Term& g, const PredKey& key, const Goals& next, const std::function<Sig()>& k, int depth) {
        int barrier = ++barrier_counter_;
        for (std::size_t ci : clauses_of_[key]) {
            const Clause& c = prog_.clauses[ci];
            int offset = static_cast<int>(bind_.size());
            bind_.resize(bind_.size() + static_cast<std::size_t>(c.num_vars));
            Term head = rename(c.head, offset);
            std::size_t mark = trail_.size();
            Sig r = Sig::Fail;
            if (unify(g, head)) {
                Goals body = next;
                for (auto it = c.body.rbegin(); it != c.body.rend(); ++it) body = cons(rename(*it, offset), barrier, body);
                r = solve(body, k, depth + 1);
            }
            undo(mark);
            if (r == Sig::Cut && cut_target_ == barrier) return Sig::Fail;
            if (r != Sig::Fail) return r;
        }
        return Sig::Fail;
    }

    Sig builtin(const Term& g, const std::string& f, const Goals& gs, const Goals& next, const std::function<Sig()>& k,
                int depth) {
        auto cont = [&]() { return solve(next, k, depth); };
        auto unify_then = [&](const Term& a, const Term& b) {
            std::size_t mark = trail_.size();
            Sig r = unify(a, b) ? cont() : Sig::Fail;
            undo(mark);
            return r;
        };
        if (f == "true") return cont();
        if (f == "fail" || f == "false") return Sig::Fail;
        if (f == "!") {
            Sig r = cont();
            if (r == Sig::Fail) {
                cut_target_ = gs->barrier;
                return Sig::Cut;
            }
            return r;
        }
        if (f == ",") return solve(cons(g.arg(0), gs->barrier, cons(g.arg(1), gs->barrier, next)), k, depth);
        if (f == ";") {
            Sig r = solve(cons(g.arg(0), gs->barrier, next), k, depth);
            if (r != Sig::Fail) return r;
            return solve(cons(g.arg(1), gs->barrier, next), k, depth);
        }
        if (f == "\\+") {
            int barrier = ++barrier_counter_;
            bool found = false;
            std::size_t mark = trail_.size();
            solve(cons(g.arg(0), barrier, nullptr), [&]() {
                found = true;
                return Sig::Stop;
            }, depth + 1);
            undo(mark);
            return found ? Sig::Fail : cont();
        }
        if (f == "=") return unify_then(g.arg(0), g.arg(1));
        if (f == "is") return unify_then(g.arg(0), Term::integer(eval_arith(resolve(g.arg(1)))));
        if (f == "\\=" || f == "neq" || f == "\\==") return resolve(g.arg(0)) == resolve(g.arg(1)) ? Sig::Fail : cont();
        if (f == "==") return resolve(g.arg(0)) == resolve(g.arg(1)) ? cont() : Sig::Fail;
        if (f == "diff") {
            Term a = resolve(g.arg(0)), b = resolve(g.arg(1)), c = resolve(g.arg(2));
            return (a == b || a == c || b == c) ? Sig::Fail : cont();
        }
        if (f == "interval" || f == "between") {
            const Term& x = f == "interval" ? g.arg(0) : g.arg(2);
            std::int64_t lo = eval_arith(resolve(f == "interval" ? g.arg(1) : g.arg(0)));
            std::int64_t hi = eval_arith(resolve(f == "interval" ? g.arg(2) : g.arg(1)));
            for (std::int64_t v = lo; v <= hi; ++v) {
                Sig r = unify_then(x, Term::integer(v));
                if (r != Sig::Fail) return r;
            }
            return Sig::Fail;
        }
        if (f == "findall") {
            std::vector<Term> results;
            int barrier = ++barrier_counter_;
            std::size_t mark = trail_.size();
            solve(cons(g.arg(1), barrier, nullptr), [&]() {
                results.push_back(resolve(g.arg(0)));
                return Sig::Fail;
            }, depth + 1);
            undo(mark);
            return unify_then(g.arg(2), Term::list(std::move(results)));
        }
        if (f == "append") {
            Term a = resolve(g.arg(0)), b = resolve(g.arg(1));
            if (a.ground() && b.ground()) {
                if (!a.is_list() || !b.is_list()) throw FrontendError({}, "append/3 expects lists");
                std::vector<Term> all = a.args();
                all.insert(all.end(), b.args().begin(), b.args().end());
                return unify_then(g.arg(2), Term::list(std::move(all)));
            }
            Term c = resolve(g.arg(2));
            if (!c.is_list()) throw FrontendError({}, "append/3 expects lists");
            for (std::size_t i = 0; i <= c.arity(); ++i) {
                std::vector<Term> l(c.args().begin(), c.args().begin() + static_cast<std::ptrdiff_t>(i));
                std::vector<Term> r(c.args().begin() + static_cast<std::ptrdiff_t>(i), c.args().end());
                std::size_t mark = trail_.size();
                Sig s = Sig::Fail;
                if (unify(g.arg(0), Term::list(std::move(l))) && unify(g.arg(1), Term::list(std::move(r)))) s = cont();
                undo(mark);
                if (s != Sig::Fail) return s;
            }
            return Sig::Fail;
        }
        if (f == "length") {
            Term l = resolve(g.arg(0));
            if (!l.is_list()) throw FrontendError({}, "length/2 expects a list");
            return unify_then(g.arg(1), Term::integer(static_cast<std::int64_t>(l.arity())));
        }
        if (f == "member") {
            Term l = resolve(g.arg(1));
            if (!l.is_list()) throw FrontendError({}, "member/2 expects a list");
            for (const auto& e : l.args()) {
                Sig r = unify_then(g.arg(0), e);
                if (r != Sig::Fail) return r;
            }
            return Sig::Fail;
        }
        // Arithmetic comparisons.
        std::int64_t a = eval_arith(resolve(g.arg(0))), b = eval_arith(resolve(g.arg(1)));
        bool ok = false;
        if (f == "<" || f == "lt") ok = a < b;
        else if (f == ">" || f == "gt") ok = a > b;
        else if (f == "=<" || f == "leq") ok = a <= b;
        else if (f == ">=" || f == "geq") ok = a >= b;
        else if (f == "=:=" || f == "eq") ok = a == b;
        else if (f == "=\\=") ok = a != b;
        return ok ? cont() : Sig::Fail;
    }

    const Program& prog_;
    GroundOptions opts_;
    std::map<PredKey, std::vector<std::size_t>> clauses_of_;
    std::set<PredKey> procedural_;
    GroundProgram out_;
    std::unordered_map<std::string, std::size_t> seen_;
    std::vector<Term> bind_;
    std::vector<int> trail_;
    int barrier_counter_ = 0;
    int cut_target_ = -1;
};

GroundProgram ground(const Program& program, const GroundOptions& opts) {
    Grounder g(program, opts);
    return g.run();
}

} // namespace bplan::frontend
