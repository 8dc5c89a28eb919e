#include "bplan/mvoracle/mvoracle.hpp"

#include <algorithm>
#include <stdexcept>

namespace bplan::mvoracle {

namespace {

Truth t_not(Truth x) {
    if (x == Truth::Undef) return x;
    return x == Truth::True ? Truth::False : Truth::True;
}

// A timed reference outside the plan makes its enclosing primitive hold.
bool stray_timed(const Expr& e, int horizon) {
    switch (e.kind) {
    case ExprKind::Timed: return e.shift < 0 || e.shift > horizon;
    case ExprKind::Rei: return false;
    default: break;
    }
    return (e.a && stray_timed(*e.a, horizon)) || (e.b && stray_timed(*e.b, horizon));
}

ExprPtr shift_expr(const ExprPtr& e, int t);

CondPtr shift_cond(const CondPtr& c, int t) {
    switch (c->kind) {
    case CondKind::True:
    case CondKind::False: return c;
    case CondKind::Rel: return make_rel(c->op, shift_expr(c->lhs, t), shift_expr(c->rhs, t));
    case CondKind::Not: return make_not(shift_cond(c->kids[0], t));
    case CondKind::And:
    case CondKind::Or: {
        std::vector<CondPtr> kids;
        for (const auto& k : c->kids) kids.push_back(shift_cond(k, t));
        return c->kind == CondKind::And ? make_and(std::move(kids)) : make_or(std::move(kids));
    }
    }
    return c;
}

ExprPtr shift_expr(const ExprPtr& e, int t) {
    switch (e->kind) {
    case ExprKind::Fluent: return make_fluent(e->fluent, e->shift - t);
    case ExprKind::Rei: return make_rei(shift_cond(e->c, t));
    case ExprKind::Neg:
    case ExprKind::Abs: return make_unary(e->kind, shift_expr(e->a, t));
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
    case ExprKind::Mod: return make_binary(e->kind, shift_expr(e->a, t), shift_expr(e->b, t));
    default: return e;
    }
}

// Layers (within 0..horizon) read by c at time i.
std::vector<std::pair<int, int>> read_layers(const Cond& c, int i, int horizon) {
    std::vector<FluentRef> refs;
    collect_refs(c, refs);
    std::vector<std::pair<int, int>> out; // (fluent, layer)
    for (const auto& r : refs) {
        if (r.timed) {
            if (r.shift >= 0 && r.shift <= horizon) out.push_back({r.fluent, r.shift});
        } else {
            out.push_back({r.fluent, ref_layer(i, r.shift, horizon)});
        }
    }
    return out;
}

std::vector<std::vector<Value>> value_lists(const DomainDescription& d, const std::vector<int>& fluents,
                                            std::size_t budget) {
    std::vector<std::vector<Value>> out;
    double product = 1;
    for (int f : fluents) {
        const auto& dom = d.fluents[static_cast<std::size_t>(f)].domain;
        product *= static_cast<double>(dom.size());
        if (product > static_cast<double>(budget)) throw std::length_error("candidate enumeration exceeds the budget");
        out.push_back(dom.values());
    }
    return out;
}

// Odometer over the cartesian product; the first list varies slowest.
template <class Fn> void product(const std::vector<std::vector<Value>>& lists, const Fn& fn) {
    for (const auto& l : lists)
        if (l.empty()) return;
    std::vector<std::size_t> idx(lists.size(), 0);
    std::vector<Value> cur(lists.size());
    while (true) {
        for (std::size_t k = 0; k < lists.size(); ++k) cur[k] = lists[k][idx[k]];
        fn(cur);
        std::size_t k = lists.size();
        while (k > 0) {
            --k;
            if (++idx[k] < lists[k].size()) break;
            idx[k] = 0;
            if (k == 0) return;
        }
        if (lists.empty()) return;
    }
}


} // namespace

Timeline make_timeline(const DomainDescription& d, const Trajectory& t) {
    return Timeline{&d, t.states, t.actions, t.length()};
}

int ref_layer(int i, int shift, int horizon) { return std::clamp(i + shift, 0, horizon); }

Value eval(const Expr& e, const Timeline& t, int i) {
    auto layer_value = [&](int layer, int f) -> Value {
        if (layer < 0 || layer >= static_cast<int>(t.states.size())) return kUndef;
        return t.states[static_cast<std::size_t>(layer)][static_cast<std::size_t>(f)];
    };
    switch (e.kind) {
    case ExprKind::Const: return e.value;
    case ExprKind::Fluent: return layer_value(ref_layer(i, e.shift, t.horizon), e.fluent);
    case ExprKind::Timed:
        if (e.shift < 0 || e.shift > t.horizon) return kUndef;
        return layer_value(e.shift, e.fluent);
    case ExprKind::Rei: return truth(*e.c, t, i) == Truth::True ? 1 : 0;
    case ExprKind::CostPlan: return plan_cost(t);
    case ExprKind::CostGoal: return state_cost(t, t.horizon);
    case ExprKind::CostState: return state_cost(t, static_cast<int>(e.value));
    default: break;
    }
    Value a = eval(*e.a, t, i);
    if (a == kUndef) return kUndef;
    if (e.kind == ExprKind::Neg) return -a;
    if (e.kind == ExprKind::Abs) return a < 0 ? -a : a;
    Value b = eval(*e.b, t, i);
    if (b == kUndef) return kUndef;
    Value r = 0;
    bool overflow = false;
    switch (e.kind) {
    case ExprKind::Add: overflow = __builtin_add_overflow(a, b, &r); break;
    case ExprKind::Sub: overflow = __builtin_sub_overflow(a, b, &r); break;
    case ExprKind::Mul: overflow = __builtin_mul_overflow(a, b, &r); break;
    case ExprKind::Div: return b == 0 ? kUndef : a / b;
    case ExprKind::Mod: return b == 0 ? kUndef : a % b;
    default: throw std::logic_error("unexpected expression node");
    }
    return overflow ? kUndef : r;
}

Truth truth(const Cond& c, const Timeline& t, int i) {
    switch (c.kind) {
    case CondKind::True: return Truth::True;
    case CondKind::False: return Truth::False;
    case CondKind::Rel: {
        if (stray_timed(*c.lhs, t.horizon) || stray_timed(*c.rhs, t.horizon)) return Truth::True;
        Value a = eval(*c.lhs, t, i), b = eval(*c.rhs, t, i);
        if (a == kUndef || b == kUndef) return Truth::Undef;
        return rel_holds(c.op, a, b) ? Truth::True : Truth::False;
    }
    case CondKind::Not: return t_not(truth(*c.kids[0], t, i));
    case CondKind::And:
    case CondKind::Or: {
        Truth dominant = c.kind == CondKind::And ? Truth::False : Truth::True;
        Truth out = t_not(dominant);
        for (const auto& k : c.kids) {
            Truth x = truth(*k, t, i);
            if (x == dominant) return x;
            if (x == Truth::Undef) out = x;
        }
        return out;
    }
    }
    return Truth::Undef;
}

bool satisfies_at(const Timeline& t, int i, const Cond& c) { return truth(c, t, i) == Truth::True; }

Value eval(const MVState& v, const Expr& e) {
    Timeline t;
    t.states = std::span<const MVState>(&v, 1);
    return eval(e, t, 0);
}

bool satisfies(const MVState& v, const Cond& c) {
    Timeline t;
    t.states = std::span<const MVState>(&v, 1);
    return satisfies_at(t, 0, c);
}

Value plan_cost(const Timeline& t) {
    if (!t.domain) throw std::logic_error("cost atoms need the domain description");
    Value total = 0;
    for (std::size_t j = 0; j < t.actions.size() && static_cast<int>(j) < t.horizon; ++j) {
        const auto& fe = t.domain->action_cost[static_cast<std::size_t>(t.actions[j])];
        Value c = fe ? eval(*fe, t, static_cast<int>(j)) : 1;
        if (c == kUndef || __builtin_add_overflow(total, c, &total)) return kUndef;
    }
    return total;
}

Value state_cost(const Timeline& t, int i) {
    if (!t.domain) throw std::logic_error("cost atoms need the domain description");
    if (i < 0 || i > t.horizon) return 0;
    return t.domain->state_cost ? eval(*t.domain->state_cost, t, i) : 1;
}

std::vector<Assignment> solutions(const DomainDescription& d, const Cond& c, std::size_t budget) {
    std::vector<int> fs = fluents_of(c);
    MVState v(static_cast<std::size_t>(d.num_fluents()), kUndef);
    std::vector<Assignment> out;
    product(value_lists(d, fs, budget), [&](const std::vector<Value>& vals) {
        for (std::size_t k = 0; k < fs.size(); ++k) v[static_cast<std::size_t>(fs[k])] = vals[k];
        if (!satisfies(v, c)) return;
        Assignment a;
        for (std::size_t k = 0; k < fs.size(); ++k) a.push_back({fs[k], vals[k]});
        out.push_back(std::move(a));
    });
    return out;
}

std::vector<TimedAssignment> i_solutions(const DomainDescription& d, const Cond& c, std::span<const MVState> prefix,
                                         int horizon, std::size_t budget) {
    if (prefix.empty()) throw std::invalid_argument("i-solutions need a non-empty prefix");
    int next = static_cast<int>(prefix.size());
    if (next > horizon) throw std::invalid_argument("prefix reaches the horizon");
    std::vector<TimedKey> keys;
    for (auto [f, layer] : read_layers(c, next, horizon))
        if (layer >= next) keys.push_back({f, layer - next});
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    std::vector<int> fs;
    for (const auto& k : keys) fs.push_back(k.fluent);

    std::vector<MVState> seq(prefix.begin(), prefix.end());
    seq.resize(static_cast<std::size_t>(horizon) + 1, MVState(static_cast<std::size_t>(d.num_fluents()), kUndef));
    Timeline t{&d, seq, {}, horizon};
    std::vector<TimedAssignment> out;
    product(value_lists(d, fs, budget), [&](const std::vector<Value>& vals) {
        seq[static_cast<std::size_t>(next)] = prefix.back();
        for (std::size_t l = static_cast<std::size_t>(next) + 1; l < seq.size(); ++l)
            std::fill(seq[l].begin(), seq[l].end(), kUndef);
        for (std::size_t k = 0; k < keys.size(); ++k)
            seq[static_cast<std::size_t>(next + keys[k].shift)][static_cast<std::size_t>(keys[k].fluent)] = vals[k];
        if (!satisfies_at(t, next, c)) return;
        TimedAssignment a;
        for (std::size_t k = 0; k < keys.size(); ++k) a.push_back({keys[k], vals[k]});
        out.push_back(std::move(a));
    });
    return out;
}

MVState ine(const Assignment& sigma, const MVState& v) {
    MVState out = v;
    for (auto [f, x] : sigma) out[static_cast<std::size_t>(f)] = x;
    return out;
}

MVState delta(const MVState& v1, const MVState& v2, const std::vector<int>& fluents) {
    MVState out = v2;
    for (int f : fluents) out[static_cast<std::size_t>(f)] = v1[static_cast<std::size_t>(f)];
    return out;
}

MVState state_union(const MVState& v1, const MVState& v2) {
    MVState out(v1.size());
    for (std::size_t f = 0; f < v1.size(); ++f) {
        if (v1[f] == v2[f] || v2[f] == kUndef) out[f] = v1[f];
        else if (v1[f] == kUndef) out[f] = v2[f];
        else out[f] = kUndef;
    }
    return out;
}

MVState state_intersection(const MVState& v1, const MVState& v2) {
    MVState out(v1.size());
    for (std::size_t f = 0; f < v1.size(); ++f) out[f] = v1[f] == v2[f] ? v1[f] : kUndef;
    return out;
}

CondPtr shift(const CondPtr& c, int t) { return shift_cond(c, t); }

MVOracle::MVOracle(const DomainDescription& d, OracleOptions opts) : d_(d), opts_(opts) {}

bool MVOracle::in_domain(const MVState& v) const {
    if (v.size() != static_cast<std::size_t>(d_.num_fluents())) return false;
    for (std::size_t f = 0; f < v.size(); ++f)
        if (v[f] == kUndef || !d_.fluents[f].domain.contains(v[f])) return false;
    return true;
}

bool MVOracle::closed_at(const Timeline& t, int i) const {
    for (const auto& law : d_.static_laws)
        if (satisfies_at(t, i, *law.body) && !satisfies_at(t, i, *law.head)) return false;
    return true;
}

bool MVOracle::executable(const Timeline& t, int action, int i) const {
    for (const auto& law : d_.nonexecutable)
        if (law.action == action && satisfies_at(t, i, *law.cond)) return false;
    for (const auto& law : d_.executable)
        if (law.action == action && satisfies_at(t, i, *law.cond)) return true;
    return false;
}

CondPtr MVOracle::eff(const Timeline& t, int i) const {
    std::vector<CondPtr> kids;
    int a = t.actions[static_cast<std::size_t>(i)];
    for (const auto& law : d_.dynamic_laws)
        if (law.action == a && satisfies_at(t, i, *law.pre)) kids.push_back(law.effect);
    return kids.empty() ? make_true() : make_and(std::move(kids));
}

CondPtr MVOracle::eff_seq(const Timeline& t, int i) const {
    std::vector<CondPtr> kids;
    for (int j = 0; j <= i; ++j) {
        // Effects of step j are read at j+1; re-anchor them at i+1.
        kids.push_back(shift(eff(t, j), i - j));
        const MVState& v = t.states[static_cast<std::size_t>(j)];
        for (int f = 0; f < d_.num_fluents(); ++f)
            kids.push_back(make_rel(RelOp::Eq, make_fluent(f, j - i - 1), make_const(v[static_cast<std::size_t>(f)])));
    }
    return make_and(std::move(kids));
}

std::vector<char> MVOracle::touched(const Timeline& t, int i) const {
    std::vector<char> out(static_cast<std::size_t>(d_.num_fluents()), 0);
    for (int j = 0; j <= i; ++j) {
        int a = t.actions[static_cast<std::size_t>(j)];
        for (const auto& law : d_.dynamic_laws) {
            if (law.action != a || !satisfies_at(t, j, *law.pre)) continue;
            for (auto [f, layer] : read_layers(*law.effect, j + 1, t.horizon))
                if (layer == i + 1) out[static_cast<std::size_t>(f)] = 1;
        }
    }
    return out;
}

bool MVOracle::is_minimally_closed(std::span<const MVState> prefix, const MVState& next, const std::vector<char>& D,
                                   int horizon) const {
    if (prefix.empty()) throw std::invalid_argument("minimal closure needs a non-empty prefix");
    std::vector<MVState> seq(prefix.begin(), prefix.end());
    seq.push_back(next);
    Timeline t{&d_, seq, {}, horizon};
    for (int l = 0; l < static_cast<int>(seq.size()); ++l)
        if (!closed_at(t, l)) return false;
    const MVState& prev = prefix.back();
    std::vector<int> changed;
    for (std::size_t f = 0; f < next.size(); ++f)
        if (D[f] && prev[f] != next[f]) changed.push_back(static_cast<int>(f));
    // Only reverting a changed fluent yields a state different from `next`.
    if (static_cast<int>(changed.size()) > opts_.max_reverted)
        throw std::length_error("too many changed inertial fluents for the minimality check");
    int last = static_cast<int>(seq.size()) - 1;
    for (std::uint32_t mask = 1; mask < (1u << changed.size()); ++mask) {
        std::vector<int> S;
        for (std::size_t k = 0; k < changed.size(); ++k)
            if (mask >> k & 1) S.push_back(changed[k]);
        seq.back() = delta(prev, next, S);
        if (closed_at(t, last)) return false;
    }
    return true;
}

Verdict MVOracle::check_step(const Timeline& t, int i) const {
    auto fail = [&](std::string why) { return Verdict{false, i + 1, std::move(why)}; };
    std::string step = std::to_string(i + 1);
    const MVState& next = t.states[static_cast<std::size_t>(i) + 1];
    if (!in_domain(next)) return fail("state " + step + " has values outside the declared domains");
    int a = t.actions[static_cast<std::size_t>(i)];
    if (!executable(t, a, i)) return fail("executability violated at step " + step);
    for (int j = 0; j <= i; ++j) {
        int aj = t.actions[static_cast<std::size_t>(j)];
        for (const auto& law : d_.dynamic_laws) {
            if (law.action != aj || !satisfies_at(t, j, *law.pre)) continue;
            int top = -1;
            for (auto [f, layer] : read_layers(*law.effect, j + 1, t.horizon)) top = std::max(top, layer);
            if (top > i + 1 || (top < i + 1 && j < i)) continue;
            if (!satisfies_at(t, j + 1, *law.effect))
                return fail("effect violated at step " + step + ": " + d_.actions[static_cast<std::size_t>(aj)] +
                            " causes " + to_source(*law.effect, d_));
        }
    }
    if (!closed_at(t, i + 1)) return fail("closure violated in state " + step);
    std::vector<char> D = touched(t, i);
    for (auto& x : D) x = !x;
    if (!is_minimally_closed(t.states.subspan(0, static_cast<std::size_t>(i) + 1), next, D, t.horizon))
        return fail("minimal closure violated at step " + step);
    return {};
}

template <class Fn> void MVOracle::enumerate(const Fn& fn) const {
    std::vector<int> all;
    for (int f = 0; f < d_.num_fluents(); ++f) all.push_back(f);
    product(value_lists(d_, all, opts_.max_candidates), [&](const std::vector<Value>& vals) { fn(MVState(vals)); });
}

std::vector<MVState> MVOracle::successors(std::span<const MVState> prefix, std::span<const int> actions, int action,
                                          int horizon) const {
    int i = static_cast<int>(prefix.size()) - 1;
    if (i < 0 || i >= horizon) throw std::invalid_argument("successor layer outside the plan");
    std::vector<MVState> seq(prefix.begin(), prefix.end());
    seq.emplace_back();
    std::vector<int> acts(actions.begin(), actions.begin() + i);
    acts.push_back(action);
    Timeline t{&d_, seq, acts, horizon};
    std::vector<MVState> out;
    enumerate([&](MVState v) {
        seq.back() = v;
        if (check_step(t, i).ok) out.push_back(std::move(v));
    });
    return out;
}

std::vector<MVState> MVOracle::initial_states(int horizon) const {
    std::vector<MVState> seq(1);
    Timeline t{&d_, seq, {}, horizon};
    std::vector<MVState> out;
    enumerate([&](MVState v) {
        seq[0] = v;
        if (!closed_at(t, 0)) return;
        for (const auto& c : d_.initially)
            if (!satisfies_at(t, 0, *c)) return;
        for (const auto& [c, when] : d_.holds)
            if (when == 0 && !satisfies_at(t, 0, *c)) return;
        out.push_back(std::move(v));
    });
    return out;
}

Verdict MVOracle::valid_trajectory(const Trajectory& tr) const {
    int N = tr.length();
    if (static_cast<int>(tr.states.size()) != N + 1) return {false, 0, "trajectory needs one more state than actions"};
    Timeline t = make_timeline(d_, tr);
    if (!in_domain(tr.states[0])) return {false, 0, "state 0 has values outside the declared domains"};
    if (!closed_at(t, 0)) return {false, 0, "closure violated in state 0"};
    for (const auto& c : d_.initially)
        if (!satisfies_at(t, 0, *c)) return {false, 0, "initially violated in state 0: " + to_source(*c, d_)};
    for (int i = 0; i < N; ++i) {
        Verdict v = check_step(t, i);
        if (!v.ok) return v;
    }
    for (const auto& c : d_.goal)
        if (!satisfies_at(t, N, *c)) return {false, N, "goal violated: " + to_source(*c, d_)};
    for (const auto& r : check_assertions(tr))
        if (!r.ok) return {false, N, r.what + " violated"};
    return {};
}

std::vector<AssertionResult> MVOracle::check_assertions(const Trajectory& tr) const {
    Timeline t = make_timeline(d_, tr);
    int N = tr.length();
    std::vector<AssertionResult> out;
    for (const auto& c : d_.time_constraints)
        out.push_back({"time_constraint(" + to_source(*c, d_) + ")", satisfies_at(t, 0, *c)});
    for (const auto& [c, when] : d_.holds) {
        bool ok = when < 0 || when > N || satisfies_at(t, when, *c);
        out.push_back({"holds(" + to_source(*c, d_) + ", " + std::to_string(when) + ")", ok});
    }
    for (const auto& c : d_.always) {
        bool ok = true;
        for (int i = 0; i <= N && ok; ++i) ok = satisfies_at(t, i, *c);
        out.push_back({"always(" + to_source(*c, d_) + ")", ok});
    }
    for (const auto& c : d_.cost_constraints)
        out.push_back({"cost_constraint(" + to_source(*c, d_) + ")", satisfies_at(t, N, *c)});
    return out;
}

} // namespace bplan::mvoracle
