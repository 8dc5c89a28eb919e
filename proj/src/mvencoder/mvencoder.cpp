#include "bplan/mvencoder/mvencoder.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace bplan::mvencoder {

using fd::Lit;
using fd::Term;
using fd::Value;
using fd::VarId;

namespace {

fd::Rel to_rel(RelOp op) {
    switch (op) {
    case RelOp::Eq: return fd::Rel::Eq;
    case RelOp::Ne: return fd::Rel::Ne;
    case RelOp::Lt: return fd::Rel::Lt;
    case RelOp::Le: return fd::Rel::Le;
    case RelOp::Gt: return fd::Rel::Gt;
    case RelOp::Ge: return fd::Rel::Ge;
    }
    return fd::Rel::Eq;
}

Value clamp_value(Value v) { return std::clamp(v, fd::kValueMin, fd::kValueMax); }

Value sat_mul(Value a, Value b) {
    Value r;
    if (__builtin_mul_overflow(a, b, &r)) return (a < 0) != (b < 0) ? fd::kValueMin : fd::kValueMax;
    return clamp_value(r);
}

bool refs_other_layers(const Cond& c) {
    std::vector<FluentRef> refs;
    collect_refs(c, refs);
    for (const auto& r : refs)
        if (r.timed || r.shift != 0) return true;
    return false;
}

// (fluent, layer) pairs read by c at time i, clamped; stray timed refs dropped.
std::vector<std::pair<int, int>> read_layers(const Cond& c, int i, int horizon) {
    std::vector<FluentRef> refs;
    collect_refs(c, refs);
    std::vector<std::pair<int, int>> out;
    for (const auto& r : refs) {
        if (r.timed) {
            if (r.shift >= 0 && r.shift <= horizon) out.push_back({r.fluent, r.shift});
        } else {
            out.push_back({r.fluent, std::clamp(i + r.shift, 0, horizon)});
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Compiler

Compiler::Compiler(fd::Solver& s, int horizon, Resolve resolve, CostAtom cost)
    : s_(s), horizon_(horizon), resolve_(std::move(resolve)), cost_(std::move(cost)) {}

std::optional<Lit> Compiler::join_defs(const std::optional<Lit>& a, const std::optional<Lit>& b) {
    if (!a) return b;
    if (!b) return a;
    return mk_and({*a, *b});
}

LinExpr Compiler::combine(LinExpr a, const LinExpr& b, Value sign) {
    for (const auto& t : b.terms) a.terms.push_back({t.coef * sign, t.var});
    a.constant += sign * b.constant;
    a.def = join_defs(a.def, b.def);
    a.stray = a.stray || b.stray;
    return a;
}

std::pair<Value, Value> Compiler::bounds(const LinExpr& e) const {
    Value lo = e.constant, hi = e.constant;
    for (const auto& t : e.terms) {
        Value a = sat_mul(t.coef, s_.min(t.var)), b = sat_mul(t.coef, s_.max(t.var));
        lo = clamp_value(lo + std::min(a, b));
        hi = clamp_value(hi + std::max(a, b));
    }
    return {lo, hi};
}

VarId Compiler::new_range(Value lo, Value hi) { return s_.new_var(fd::Domain::range(clamp_value(lo), clamp_value(hi))); }

VarId Compiler::materialize(const LinExpr& e) {
    if (e.terms.size() == 1 && e.terms[0].coef == 1 && e.constant == 0) return e.terms[0].var;
    auto [lo, hi] = bounds(e);
    VarId z = new_range(lo, hi);
    std::vector<Term> terms = e.terms;
    terms.push_back({-1, z});
    s_.post_linear(std::move(terms), fd::Rel::Eq, -e.constant);
    return z;
}

Lit Compiler::mk_and(std::vector<Lit> lits) {
    Lit t = s_.true_lit();
    std::vector<Lit> keep;
    for (Lit l : lits) {
        if (l == ~t) return ~t;
        if (l != t && std::find(keep.begin(), keep.end(), l) == keep.end()) keep.push_back(l);
    }
    if (keep.empty()) return t;
    if (keep.size() == 1) return keep[0];
    Lit b{s_.new_bool(), true};
    s_.post_and_equiv(b, keep);
    return b;
}

Lit Compiler::mk_or(std::vector<Lit> lits) {
    for (auto& l : lits) l = ~l;
    return ~mk_and(std::move(lits));
}

LinExpr Compiler::expr(const Expr& e, int i) {
    switch (e.kind) {
    case ExprKind::Const: return LinExpr{{}, e.value, std::nullopt, false};
    case ExprKind::Fluent: return resolve_(e.fluent, std::clamp(i + e.shift, 0, horizon_));
    case ExprKind::Timed:
        if (e.shift < 0 || e.shift > horizon_) return LinExpr{{}, 0, std::nullopt, true};
        return resolve_(e.fluent, e.shift);
    case ExprKind::Rei: {
        Lit l = cond(*e.c, i, true);
        if (l.positive) return LinExpr{{{1, l.var}}, 0, std::nullopt, false};
        return LinExpr{{{-1, l.var}}, 1, std::nullopt, false};
    }
    case ExprKind::CostPlan:
    case ExprKind::CostGoal:
    case ExprKind::CostState:
        if (!cost_) throw std::invalid_argument("cost atoms are not available in this context");
        return cost_(e);
    case ExprKind::Neg: {
        LinExpr a = expr(*e.a, i);
        for (auto& t : a.terms) t.coef = -t.coef;
        a.constant = -a.constant;
        return a;
    }
    case ExprKind::Add: return combine(expr(*e.a, i), expr(*e.b, i), 1);
    case ExprKind::Sub: return combine(expr(*e.a, i), expr(*e.b, i), -1);
    default: break;
    }

    LinExpr a = expr(*e.a, i);
    LinExpr b = e.kind == ExprKind::Abs ? LinExpr{} : expr(*e.b, i);
    LinExpr out;
    out.stray = a.stray || b.stray;
    if (out.stray) return out;
    out.def = join_defs(a.def, b.def);

    if (a.is_const() && b.is_const()) {
        Value x = a.constant, y = b.constant;
        switch (e.kind) {
        case ExprKind::Abs: out.constant = x < 0 ? -x : x; break;
        case ExprKind::Mul: out.constant = x * y; break;
        case ExprKind::Div:
        case ExprKind::Mod:
            if (y == 0) out.def = ~s_.true_lit();
            else out.constant = e.kind == ExprKind::Div ? x / y : x % y;
            break;
        default: throw std::logic_error("unexpected expression node");
        }
        return out;
    }

    VarId x = materialize(a);
    auto mag = [&](VarId v) { return std::max(std::llabs(s_.min(v)), std::llabs(s_.max(v))); };
    VarId z;
    switch (e.kind) {
    case ExprKind::Abs:
        z = new_range(0, mag(x));
        s_.post_abs(z, x);
        break;
    case ExprKind::Mul: {
        VarId y = materialize(b);
        Value c[] = {sat_mul(s_.min(x), s_.min(y)), sat_mul(s_.min(x), s_.max(y)), sat_mul(s_.max(x), s_.min(y)),
                     sat_mul(s_.max(x), s_.max(y))};
        z = new_range(*std::min_element(c, c + 4), *std::max_element(c, c + 4));
        s_.post_times(z, x, y);
        break;
    }
    case ExprKind::Div:
    case ExprKind::Mod: {
        VarId y = materialize(b);
        Value m = e.kind == ExprKind::Div ? mag(x) : std::min(mag(x), mag(y));
        z = new_range(-m, m);
        if (e.kind == ExprKind::Div) s_.post_div(z, x, y, true);
        else s_.post_mod(z, x, y, true);
        if (s_.dom(y).contains(0)) {
            Lit nz{s_.new_bool(), true};
            s_.post_reif_linear(nz, fd::ReifMode::Equiv, {{1, y}}, fd::Rel::Ne, 0);
            out.def = join_defs(out.def, nz);
        }
        break;
    }
    default: throw std::logic_error("unexpected expression node");
    }
    out.terms = {{1, z}};
    return out;
}

Lit Compiler::cond(const Cond& c, int i, bool positive) {
    Lit t = s_.true_lit();
    switch (c.kind) {
    case CondKind::True: return positive ? t : ~t;
    case CondKind::False: return positive ? ~t : t;
    case CondKind::Not: return cond(*c.kids[0], i, !positive);
    case CondKind::And:
    case CondKind::Or: {
        std::vector<Lit> kids;
        for (const auto& k : c.kids) kids.push_back(cond(*k, i, positive));
        // True(and) and False(or) need every kid; the other two need one.
        return (c.kind == CondKind::And) == positive ? mk_and(std::move(kids)) : mk_or(std::move(kids));
    }
    case CondKind::Rel: break;
    }
    LinExpr diff = combine(expr(*c.lhs, i), expr(*c.rhs, i), -1);
    if (diff.stray) return positive ? t : ~t;
    Lit r;
    if (diff.is_const()) {
        r = rel_holds(c.op, diff.constant, 0) ? t : ~t;
    } else {
        r = Lit{s_.new_bool(), true};
        s_.post_reif_linear(r, fd::ReifMode::Equiv, diff.terms, to_rel(c.op), -diff.constant);
    }
    return mk_and({positive ? r : ~r, def_of(diff)});
}

void Compiler::post_implies(Lit p, const Cond& c, int i) {
    Lit t = s_.true_lit();
    if (p == ~t) return;
    switch (c.kind) {
    case CondKind::True: return;
    case CondKind::And:
        for (const auto& k : c.kids) post_implies(p, *k, i);
        return;
    case CondKind::Rel: {
        LinExpr diff = combine(expr(*c.lhs, i), expr(*c.rhs, i), -1);
        if (diff.stray) return;
        if (diff.def) s_.post_clause({~p, *diff.def});
        if (diff.is_const()) {
            if (!rel_holds(c.op, diff.constant, 0)) s_.post_clause({~p});
        } else if (p == t) {
            s_.post_linear(diff.terms, to_rel(c.op), -diff.constant);
        } else {
            s_.post_reif_linear(p, fd::ReifMode::Implies, diff.terms, to_rel(c.op), -diff.constant);
        }
        return;
    }
    default: s_.post_clause({~p, cond(c, i, true)});
    }
}

void Compiler::post(const Cond& c, int i) { post_implies(s_.true_lit(), c, i); }

void Compiler::post_equal(Lit p, VarId x, VarId y) {
    Lit t = s_.true_lit();
    if (p == ~t) return;
    if (p == t) s_.post_linear({{1, x}, {-1, y}}, fd::Rel::Eq, 0);
    else s_.post_reif_linear(p, fd::ReifMode::Implies, {{1, x}, {-1, y}}, fd::Rel::Eq, 0);
}

// ---------------------------------------------------------------------------
// Clusters

std::vector<Cluster> compute_clusters(const DomainDescription& d) {
    int n = d.num_fluents();
    std::vector<int> parent(static_cast<std::size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        return x;
    };
    std::vector<std::vector<int>> law_fluents;
    for (const auto& law : d.static_laws) {
        std::vector<int> fs = fluents_of(*law.body);
        for (int f : fluents_of(*law.head)) fs.push_back(f);
        for (std::size_t k = 1; k < fs.size(); ++k) parent[static_cast<std::size_t>(find(fs[k]))] = find(fs[0]);
        law_fluents.push_back(std::move(fs));
    }
    std::map<int, std::size_t> by_root;
    std::vector<Cluster> out;
    for (int f = 0; f < n; ++f) {
        auto [it, fresh] = by_root.try_emplace(find(f), out.size());
        if (fresh) out.emplace_back();
        out[it->second].fluents.push_back(f);
    }
    for (std::size_t k = 0; k < d.static_laws.size(); ++k) {
        if (law_fluents[k].empty()) continue;
        Cluster& c = out[by_root.at(find(law_fluents[k][0]))];
        c.laws.push_back(static_cast<int>(k));
        const auto& law = d.static_laws[k];
        if (refs_other_layers(*law.body) || refs_other_layers(*law.head) || has_cost_terms(*law.body) ||
            has_cost_terms(*law.head))
            c.temporal = true;
    }
    return out;
}

std::vector<std::string> explain_clusters(const DomainDescription& d, const std::vector<Cluster>& clusters) {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < clusters.size(); ++k) {
        std::string line = "cluster " + std::to_string(k) + ":";
        for (int f : clusters[k].fluents) line += " " + d.fluents[static_cast<std::size_t>(f)].name;
        line += " laws=" + std::to_string(clusters[k].laws.size());
        if (clusters[k].temporal) line += " temporal";
        out.push_back(std::move(line));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Minimality check

bool has_closed_revert(const DomainDescription& d, int horizon, const std::vector<std::vector<Value>>& layers,
                       const std::vector<Value>& next, const std::vector<char>& touched) {
    if (layers.empty()) throw std::invalid_argument("minimality check needs a non-empty prefix");
    const auto& prev = layers.back();
    int now = static_cast<int>(layers.size());
    fd::Solver s;
    std::vector<VarId> x(next.size(), -1);
    std::vector<Lit> any;
    for (std::size_t f = 0; f < next.size(); ++f) {
        if (touched[f] || prev[f] == next[f]) continue;
        Lit sel{s.new_bool(), true};
        x[f] = s.new_var(fd::Domain::from_values({prev[f], next[f]}));
        s.post_linear({{1, x[f]}, {next[f] - prev[f], sel.var}}, fd::Rel::Eq, next[f]);
        any.push_back(sel);
    }
    if (any.empty()) return false;
    s.post_clause(any);

    Compiler cp(
        s, horizon,
        [&](int f, int layer) -> LinExpr {
            auto uf = static_cast<std::size_t>(f);
            if (layer < now) return LinExpr{{}, layers[static_cast<std::size_t>(layer)][uf], std::nullopt, false};
            if (layer > now) return LinExpr{{}, 0, ~s.true_lit(), false};
            if (x[uf] >= 0) return LinExpr{{{1, x[uf]}}, 0, std::nullopt, false};
            return LinExpr{{}, next[uf], std::nullopt, false};
        },
        [&](const Expr&) { return LinExpr{{}, 0, ~s.true_lit(), false}; });
    for (const auto& law : d.static_laws) cp.post_implies(cp.cond(*law.body, now, true), *law.head, now);
    if (s.failed() || !s.propagate()) return false;
    fd::Search search(s, {});
    return search.next() == fd::SearchStatus::Solution;
}

class MinimalityCheck {
public:
    MinimalityCheck(const DomainDescription& d, const MVProblem& p)
        : d_(d), horizon_(p.horizon), F_(p.F), touched_(p.touched) {}

    bool check(fd::Solver& s) {
        int nf = d_.num_fluents();
        auto layer_fixed = [&](int L) {
            for (VarId v : F_[static_cast<std::size_t>(L)])
                if (!s.fixed(v)) return false;
            return true;
        };
        if (!layer_fixed(0)) return true;
        std::vector<std::vector<Value>> layers;
        auto read = [&](int L) {
            std::vector<Value> row;
            for (VarId v : F_[static_cast<std::size_t>(L)]) row.push_back(s.value(v));
            return row;
        };
        layers.push_back(read(0));
        for (int i = 0; i < horizon_; ++i) {
            if (!layer_fixed(i + 1)) break;
            std::vector<Value> next = read(i + 1);
            std::vector<char> touched(static_cast<std::size_t>(nf), 0);
            bool ready = true, changed = false;
            for (int f = 0; f < nf; ++f) {
                Lit t = touched_[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(f)];
                if (!s.lit_fixed(t)) ready = false;
                touched[static_cast<std::size_t>(f)] = s.lit_true(t);
                if (!touched[static_cast<std::size_t>(f)] && next[static_cast<std::size_t>(f)] != layers.back()[static_cast<std::size_t>(f)])
                    changed = true;
            }
            if (!ready) break;
            if (changed && !minimal(layers, next, touched)) return false;
            layers.push_back(std::move(next));
        }
        return true;
    }

    std::uint64_t checks() const { return checks_; }

private:
    bool minimal(const std::vector<std::vector<Value>>& layers, const std::vector<Value>& next,
                 const std::vector<char>& touched) {
        std::vector<Value> key;
        for (const auto& row : layers) key.insert(key.end(), row.begin(), row.end());
        key.insert(key.end(), next.begin(), next.end());
        for (char t : touched) key.push_back(t);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        ++checks_;
        bool ok = !has_closed_revert(d_, horizon_, layers, next, touched);
        memo_.emplace(std::move(key), ok);
        return ok;
    }

    const DomainDescription& d_;
    int horizon_;
    std::vector<std::vector<VarId>> F_;
    std::vector<std::vector<Lit>> touched_;
    std::map<std::vector<Value>, bool> memo_;
    std::uint64_t checks_ = 0;
};

MVProblem::MVProblem() = default;
MVProblem::~MVProblem() = default;
MVProblem::MVProblem(MVProblem&&) noexcept = default;
MVProblem& MVProblem::operator=(MVProblem&&) noexcept = default;

bool MVProblem::check_node(fd::Solver& s) { return !minimality || minimality->check(s); }
std::uint64_t MVProblem::minimality_checks() const { return minimality ? minimality->checks() : 0; }

// ---------------------------------------------------------------------------
// Problem encoding

namespace {

class ProblemEncoder {
public:
    ProblemEncoder(const DomainDescription& d, int N, const EncodeOptions& opts, MVProblem& p)
        : d_(d), N_(N), opts_(opts), p_(p), s_(*p.solver),
          cp_(
              s_, N,
              [this](int f, int layer) {
                  return LinExpr{{{1, p_.F[static_cast<std::size_t>(layer)][static_cast<std::size_t>(f)]}}, 0,
                                 std::nullopt, false};
              },
              [this](const Expr& e) { return cost_atom(e); }),
          reverted_(
              s_, N,
              [this](int f, int layer) {
                  std::size_t L = static_cast<std::size_t>(layer);
                  if (f == revert_f_ && layer == revert_L_) --L;
                  return LinExpr{{{1, p_.F[L][static_cast<std::size_t>(f)]}}, 0, std::nullopt, false};
              },
              [this](const Expr& e) { return cost_atom(e); }) {}

    void run() {
        make_variables();
        for (int i = 0; i < N_; ++i) encode_step(i);
        make_touched();
        for (int L = 0; L <= N_; ++L) encode_closure(L);
        encode_inertia();
        bool full = opts_.minimality == Minimality::Full || opts_.minimality == Minimality::Supported;
        if (full) encode_revert_one();
        if (opts_.problem_axioms) encode_axioms();
        if (full && !d_.static_laws.empty())
            p_.minimality = std::make_unique<MinimalityCheck>(d_, p_);
    }

private:
    std::string fname(int f, int L) const { return "F(" + d_.fluents[static_cast<std::size_t>(f)].name + "," + std::to_string(L) + ")"; }
    std::string aname(int a, int i) const { return "A(" + d_.actions[static_cast<std::size_t>(a)] + "," + std::to_string(i) + ")"; }
    std::string src(const CondPtr& c) const { return "[" + to_source(*c, d_) + "]"; }

    void note(std::string line) {
        if (opts_.record) p_.listing.push_back(std::move(line));
    }

    void make_variables() {
        p_.horizon = N_;
        int nf = d_.num_fluents(), na = d_.num_actions();
        for (int L = 0; L <= N_; ++L) {
            std::vector<VarId> layer;
            for (int f = 0; f < nf; ++f) {
                layer.push_back(s_.new_var(d_.fluents[static_cast<std::size_t>(f)].domain, fname(f, L)));
                note(fname(f, L) + " in " + d_.fluents[static_cast<std::size_t>(f)].domain.to_string());
            }
            p_.order.insert(p_.order.end(), layer.begin(), layer.end());
            p_.F.push_back(std::move(layer));
            if (L == N_) break;
            std::vector<VarId> acts;
            for (int a = 0; a < na; ++a) acts.push_back(s_.new_bool(aname(a, L)));
            p_.order.insert(p_.order.end(), acts.begin(), acts.end());
            p_.A.push_back(std::move(acts));
        }
        touch_lists_.assign(static_cast<std::size_t>(N_) + 1, std::vector<std::vector<Lit>>(static_cast<std::size_t>(nf)));
    }

    void encode_step(int i) {
        const auto& acts = p_.A[static_cast<std::size_t>(i)];
        std::vector<fd::Term> one;
        for (VarId a : acts) one.push_back({1, a});
        s_.post_linear(std::move(one), fd::Rel::Eq, 1);
        note("sum A(*," + std::to_string(i) + ") = 1");

        for (int a = 0; a < d_.num_actions(); ++a) {
            Lit act{acts[static_cast<std::size_t>(a)], true};
            std::vector<Lit> exec{~act};
            std::string text;
            for (const auto& law : d_.executable) {
                if (law.action != a) continue;
                exec.push_back(cp_.cond(*law.cond, i, true));
                text += (text.empty() ? "" : " | ") + src(law.cond);
            }
            s_.post_clause(exec);
            note(aname(a, i) + " -> " + (text.empty() ? "false" : text));
            for (const auto& law : d_.nonexecutable) {
                if (law.action != a) continue;
                s_.post_clause({~act, ~cp_.cond(*law.cond, i, true)});
                note(aname(a, i) + " -> ~" + src(law.cond));
            }
        }

        for (std::size_t k = 0; k < d_.dynamic_laws.size(); ++k) {
            const auto& law = d_.dynamic_laws[k];
            Lit act{acts[static_cast<std::size_t>(law.action)], true};
            Lit dyn = cp_.mk_and({act, cp_.cond(*law.pre, i, true)});
            cp_.post_implies(dyn, *law.effect, i + 1);
            std::string name = "Dyn(" + std::to_string(k) + "," + std::to_string(i) + ")";
            note(name + " <-> " + aname(law.action, i) + " & " + src(law.pre) + "@" + std::to_string(i));
            note(name + " -> " + src(law.effect) + "@" + std::to_string(i + 1));
            for (auto [f, L] : read_layers(*law.effect, i + 1, N_))
                if (L >= i + 1) touch_lists_[static_cast<std::size_t>(L)][static_cast<std::size_t>(f)].push_back(dyn);
        }
    }

    void make_touched() {
        p_.touched.assign(static_cast<std::size_t>(N_) + 1, std::vector<Lit>(static_cast<std::size_t>(d_.num_fluents()), ~s_.true_lit()));
        for (int L = 1; L <= N_; ++L)
            for (int f = 0; f < d_.num_fluents(); ++f) {
                auto& list = touch_lists_[static_cast<std::size_t>(L)][static_cast<std::size_t>(f)];
                if (list.empty()) continue;
                p_.touched[static_cast<std::size_t>(L)][static_cast<std::size_t>(f)] = cp_.mk_or(list);
                note("Touch(" + d_.fluents[static_cast<std::size_t>(f)].name + "," + std::to_string(L) + ") <-> " +
                     std::to_string(list.size()) + " dynamic law(s)");
            }
    }

    void encode_closure(int L) {
        for (const auto& law : d_.static_laws) {
            cp_.post_implies(cp_.cond(*law.body, L, true), *law.head, L);
            note(src(law.body) + "@" + std::to_string(L) + " -> " + src(law.head) + "@" + std::to_string(L));
        }
    }

    void encode_inertia() {
        p_.clusters = compute_clusters(d_);
        for (std::size_t k = 0; k < p_.clusters.size(); ++k) {
            const Cluster& c = p_.clusters[k];
            bool use = c.laws.empty() || (opts_.minimality != Minimality::Off && !c.temporal);
            if (!use) continue;
            for (int L = 1; L <= N_; ++L) {
                std::vector<Lit> touched;
                for (int f : c.fluents) touched.push_back(p_.touched[static_cast<std::size_t>(L)][static_cast<std::size_t>(f)]);
                Lit stat = ~cp_.mk_or(touched);
                for (int f : c.fluents)
                    cp_.post_equal(stat, p_.F[static_cast<std::size_t>(L)][static_cast<std::size_t>(f)],
                                   p_.F[static_cast<std::size_t>(L) - 1][static_cast<std::size_t>(f)]);
                note("Stat(" + std::to_string(k) + "," + std::to_string(L) + ") -> cluster " + std::to_string(k) +
                     " unchanged");
            }
        }
    }

    // A changed inertial fluent must be needed: putting its old value back
    // breaks some static law that reads it.
    void encode_revert_one() {
        for (const Cluster& c : p_.clusters) {
            if (c.laws.empty()) continue;
            for (int f : c.fluents)
                for (int L = 1; L <= N_; ++L) {
                    VarId now = p_.F[static_cast<std::size_t>(L)][static_cast<std::size_t>(f)];
                    VarId before = p_.F[static_cast<std::size_t>(L) - 1][static_cast<std::size_t>(f)];
                    Lit changed{s_.new_bool(), true};
                    s_.post_reif_linear(changed, fd::ReifMode::Equiv, {{1, now}, {-1, before}}, fd::Rel::Ne, 0);
                    std::vector<Lit> clause{p_.touched[static_cast<std::size_t>(L)][static_cast<std::size_t>(f)], ~changed};
                    revert_f_ = f;
                    revert_L_ = L;
                    for (int k : c.laws) {
                        const auto& law = d_.static_laws[static_cast<std::size_t>(k)];
                        bool reads = false;
                        for (const auto* side : {&law.body, &law.head})
                            for (auto [g, layer] : read_layers(**side, L, N_)) reads = reads || (g == f && layer == L);
                        if (!reads) continue;
                        clause.push_back(reverted_.mk_and(
                            {reverted_.cond(*law.body, L, true), ~reverted_.cond(*law.head, L, true)}));
                    }
                    revert_f_ = -1;
                    s_.post_clause(std::move(clause));
                    if (opts_.minimality == Minimality::Supported) post_support(c, f, L, changed);
                    note("Touch(" + d_.fluents[static_cast<std::size_t>(f)].name + "," + std::to_string(L) +
                         ") | F(" + d_.fluents[static_cast<std::size_t>(f)].name + "," + std::to_string(L) +
                         ") unchanged | reverting it breaks a static law");
                }
        }
    }

    // Untouched fluents may only change when a law of their cluster fires in the new state.
    void post_support(const Cluster& c, int f, int L, Lit changed) {
        std::vector<Lit> clause{p_.touched[static_cast<std::size_t>(L)][static_cast<std::size_t>(f)], ~changed};
        for (int k : c.laws) clause.push_back(cp_.cond(*d_.static_laws[static_cast<std::size_t>(k)].body, L, true));
        s_.post_clause(std::move(clause));
        note("Touch(" + d_.fluents[static_cast<std::size_t>(f)].name + "," + std::to_string(L) + ") | F(" +
             d_.fluents[static_cast<std::size_t>(f)].name + "," + std::to_string(L) +
             ") unchanged | a cluster law fires");
    }

    void encode_axioms() {
        for (const auto& c : d_.initially) post_axiom("initially", c, 0);
        for (const auto& [c, t] : d_.holds)
            if (t >= 0 && t <= N_) post_axiom("holds", c, t);
        for (const auto& c : d_.always)
            for (int L = 0; L <= N_; ++L) post_axiom("always", c, L);
        for (const auto& c : d_.time_constraints) post_axiom("time_constraint", c, 0);
        for (const auto& c : d_.goal) post_axiom("goal", c, N_);
        for (const auto& c : d_.cost_constraints) post_axiom("cost_constraint", c, N_);
        if (d_.minimize_cost) {
            LinExpr e = cp_.expr(*d_.minimize_cost, N_);
            if (e.stray) e.def = ~s_.true_lit();
            if (e.def) s_.post_clause({*e.def});
            p_.objective = cp_.materialize(e);
            note("minimize " + to_source(*d_.minimize_cost, d_));
        }
    }

    void post_axiom(const char* what, const CondPtr& c, int L) {
        cp_.post(*c, L);
        note(std::string(what) + ": " + src(c) + "@" + std::to_string(L));
    }

    LinExpr state_cost(int i) {
        if (i < 0 || i > N_) return LinExpr{};
        if (!d_.state_cost) return LinExpr{{}, 1, std::nullopt, false};
        LinExpr e = cp_.expr(*d_.state_cost, i);
        if (e.stray) e = LinExpr{{}, 0, ~s_.true_lit(), false};
        return e;
    }

    LinExpr plan_cost() {
        if (plan_) return *plan_;
        LinExpr total;
        for (int j = 0; j < N_; ++j) {
            const auto& acts = p_.A[static_cast<std::size_t>(j)];
            bool constant = true;
            std::vector<LinExpr> costs;
            for (int a = 0; a < d_.num_actions(); ++a) {
                const auto& fe = d_.action_cost[static_cast<std::size_t>(a)];
                LinExpr w = fe ? cp_.expr(*fe, j) : LinExpr{{}, 1, std::nullopt, false};
                if (w.stray) w = LinExpr{{}, 0, ~s_.true_lit(), false};
                constant = constant && w.is_const() && !w.def;
                costs.push_back(std::move(w));
            }
            if (constant) {
                for (int a = 0; a < d_.num_actions(); ++a)
                    if (Value c = costs[static_cast<std::size_t>(a)].constant; c != 0)
                        total.terms.push_back({c, acts[static_cast<std::size_t>(a)]});
                continue;
            }
            Value lo = fd::kValueMax, hi = fd::kValueMin;
            std::vector<VarId> w;
            for (auto& c : costs) {
                w.push_back(cp_.materialize(c));
                lo = std::min(lo, s_.min(w.back()));
                hi = std::max(hi, s_.max(w.back()));
            }
            VarId z = s_.new_var(fd::Domain::range(lo, hi));
            std::vector<Lit> defined;
            for (int a = 0; a < d_.num_actions(); ++a) {
                Lit act{acts[static_cast<std::size_t>(a)], true};
                cp_.post_equal(act, z, w[static_cast<std::size_t>(a)]);
                defined.push_back(cp_.mk_and({act, cp_.def_of(costs[static_cast<std::size_t>(a)])}));
            }
            total.terms.push_back({1, z});
            total.def = total.def ? cp_.mk_and({*total.def, cp_.mk_or(defined)}) : cp_.mk_or(defined);
        }
        if (!total.terms.empty() || total.def) p_.plan_cost = cp_.materialize(total);
        plan_ = total;
        return total;
    }

    LinExpr cost_atom(const Expr& e) {
        switch (e.kind) {
        case ExprKind::CostPlan: return plan_cost();
        case ExprKind::CostGoal: return state_cost(N_);
        case ExprKind::CostState: return state_cost(static_cast<int>(e.value));
        default: throw std::logic_error("not a cost atom");
        }
    }

    const DomainDescription& d_;
    int N_;
    EncodeOptions opts_;
    MVProblem& p_;
    fd::Solver& s_;
    Compiler cp_;
    Compiler reverted_; // reads F(revert_f_, revert_L_) from the layer before
    int revert_f_ = -1;
    int revert_L_ = -1;
    std::vector<std::vector<std::vector<Lit>>> touch_lists_;
    std::optional<LinExpr> plan_;
};

} // namespace

MVProblem encode_problem(const DomainDescription& d, int N, const EncodeOptions& opts) {
    if (N < 0) throw std::invalid_argument("negative plan length");
    MVProblem p;
    p.solver = std::make_unique<fd::Solver>();
    ProblemEncoder(d, N, opts, p).run();
    return p;
}

} // namespace bplan::mvencoder
