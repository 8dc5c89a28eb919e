#include "bplan/boracle/boracle.hpp"

#include <stdexcept>

namespace bplan::boracle {

namespace {

Lit as_lit(const Cond& c) {
    if (c.kind != CondKind::Rel || c.op != RelOp::Eq || c.lhs->kind != ExprKind::Fluent || c.rhs->kind != ExprKind::Const)
        throw std::invalid_argument("not a Boolean literal");
    return c.rhs->value != 0 ? pos_lit(c.lhs->fluent) : neg_lit(c.lhs->fluent);
}

std::vector<Lit> as_lits(const Cond& c) {
    std::vector<Lit> out;
    if (c.kind == CondKind::True) return out;
    if (c.kind == CondKind::And) {
        for (const auto& k : c.kids) out.push_back(as_lit(*k));
        return out;
    }
    out.push_back(as_lit(c));
    return out;
}

} // namespace

BTheory literal_theory(const DomainDescription& d) {
    if (d.lang != Language::B) throw std::invalid_argument("literal_theory needs a B description");
    BTheory th;
    th.num_fluents = d.num_fluents();
    th.num_actions = d.num_actions();
    for (const auto& l : d.dynamic_laws) th.dynamic_laws.push_back({l.action, as_lit(*l.effect), as_lits(*l.pre)});
    for (const auto& l : d.static_laws) th.static_laws.push_back({-1, as_lit(*l.head), as_lits(*l.body)});
    for (const auto& l : d.executable) th.executable.push_back({l.action, -1, as_lits(*l.cond)});
    for (const auto& l : d.nonexecutable) th.nonexecutable.push_back({l.action, -1, as_lits(*l.cond)});
    for (const auto& c : d.initially)
        for (Lit l : as_lits(*c)) th.initially.push_back(l);
    for (const auto& c : d.goal)
        for (Lit l : as_lits(*c)) th.goal.push_back(l);
    return th;
}

BOracle::BOracle(BTheory th, OracleOptions opts) : th_(std::move(th)), opts_(opts) {
    static_by_body_.resize(static_cast<std::size_t>(2 * th_.num_fluents));
    for (std::size_t i = 0; i < th_.static_laws.size(); ++i)
        for (Lit l : th_.static_laws[i].body) static_by_body_[static_cast<std::size_t>(l)].push_back(static_cast<int>(i));
}

BOracle::BOracle(const DomainDescription& d, OracleOptions opts) : BOracle(literal_theory(d), opts) {}

LitSet BOracle::literals(const BState& s) const {
    LitSet out = empty_set();
    for (int f = 0; f < th_.num_fluents; ++f) out[static_cast<std::size_t>(s.value[static_cast<std::size_t>(f)] ? pos_lit(f) : neg_lit(f))] = 1;
    return out;
}

bool BOracle::consistent(const LitSet& s) const {
    for (int f = 0; f < th_.num_fluents; ++f)
        if (s[static_cast<std::size_t>(pos_lit(f))] && s[static_cast<std::size_t>(neg_lit(f))]) return false;
    return true;
}

bool BOracle::complete(const LitSet& s) const {
    for (int f = 0; f < th_.num_fluents; ++f)
        if (!s[static_cast<std::size_t>(pos_lit(f))] && !s[static_cast<std::size_t>(neg_lit(f))]) return false;
    return true;
}

bool BOracle::holds(const BState& s, const std::vector<Lit>& body) const {
    for (Lit l : body)
        if ((s.value[static_cast<std::size_t>(lit_fluent(l))] != 0) != lit_positive(l)) return false;
    return true;
}

LitSet BOracle::closure(LitSet s) const {
    // Counter-based forward chaining: a law fires once all body literals are in.
    std::vector<int> missing(th_.static_laws.size());
    std::vector<Lit> queue;
    auto add = [&](Lit l) {
        if (!s[static_cast<std::size_t>(l)]) {
            s[static_cast<std::size_t>(l)] = 1;
            queue.push_back(l);
        }
    };
    for (std::size_t i = 0; i < th_.static_laws.size(); ++i) {
        int m = 0;
        const auto& body = th_.static_laws[i].body;
        for (std::size_t j = 0; j < body.size(); ++j) {
            bool dup = false;
            for (std::size_t k = 0; k < j; ++k) dup = dup || body[k] == body[j];
            if (!dup && !s[static_cast<std::size_t>(body[j])]) ++m;
        }
        missing[i] = m;
    }
    for (std::size_t i = 0; i < th_.static_laws.size(); ++i)
        if (missing[i] == 0) add(th_.static_laws[i].head);
    while (!queue.empty()) {
        Lit l = queue.back();
        queue.pop_back();
        const auto& laws = static_by_body_[static_cast<std::size_t>(l)];
        for (std::size_t k = 0; k < laws.size(); ++k) {
            int i = laws[k];
            if (k > 0 && laws[k - 1] == i) continue; // literal repeated in one body
            if (--missing[static_cast<std::size_t>(i)] == 0) add(th_.static_laws[static_cast<std::size_t>(i)].head);
        }
    }
    return s;
}

LitSet BOracle::direct_effects(int action, const BState& s) const {
    LitSet e = empty_set();
    for (const auto& law : th_.dynamic_laws)
        if (law.action == action && holds(s, law.body)) e[static_cast<std::size_t>(law.head)] = 1;
    return e;
}

bool BOracle::is_executable(int action, const BState& s) const {
    bool some = false;
    for (const auto& law : th_.executable)
        if (law.action == action && holds(s, law.body)) some = true;
    if (!some) return false;
    for (const auto& law : th_.nonexecutable)
        if (law.action == action && holds(s, law.body)) return false;
    return true;
}

bool BOracle::is_successor(const BState& s, int action, const BState& s2) const {
    LitSet base = direct_effects(action, s);
    for (int f = 0; f < th_.num_fluents; ++f)
        if (s.value[static_cast<std::size_t>(f)] == s2.value[static_cast<std::size_t>(f)])
            base[static_cast<std::size_t>(s.value[static_cast<std::size_t>(f)] ? pos_lit(f) : neg_lit(f))] = 1;
    return closure(std::move(base)) == literals(s2);
}

std::vector<BState> BOracle::successors(const BState& s, int action) const {
    if (th_.num_fluents > opts_.max_fluents)
        throw std::length_error("successor enumeration limited to " + std::to_string(opts_.max_fluents) + " fluents");
    std::vector<BState> out;
    if (!is_executable(action, s)) return out;
    const std::uint64_t n = std::uint64_t{1} << th_.num_fluents;
    BState c{std::vector<char>(static_cast<std::size_t>(th_.num_fluents), 0)};
    for (std::uint64_t bits = 0; bits < n; ++bits) {
        // Fluent 0 is the most significant bit so the output is sorted.
        for (int f = 0; f < th_.num_fluents; ++f)
            c.value[static_cast<std::size_t>(f)] = static_cast<char>((bits >> (th_.num_fluents - 1 - f)) & 1);
        if (is_successor(s, action, c)) out.push_back(c);
    }
    return out;
}

BState BOracle::initial_state() const {
    LitSet s = empty_set();
    for (Lit l : th_.initially) s[static_cast<std::size_t>(l)] = 1;
    s = closure(std::move(s));
    if (!consistent(s)) throw std::runtime_error("the initial state is inconsistent");
    if (!complete(s)) throw std::runtime_error("the initial state is incomplete after closure");
    BState out{std::vector<char>(static_cast<std::size_t>(th_.num_fluents), 0)};
    for (int f = 0; f < th_.num_fluents; ++f) out.value[static_cast<std::size_t>(f)] = s[static_cast<std::size_t>(pos_lit(f))];
    return out;
}

BState BOracle::from_values(const StateValues& v) {
    BState s;
    s.value.reserve(v.size());
    for (auto x : v) s.value.push_back(static_cast<char>(x != 0));
    return s;
}

StateValues BOracle::to_values(const BState& s) {
    return StateValues(s.value.begin(), s.value.end());
}

Verdict BOracle::verify_trajectory(const Trajectory& t) const {
    auto reject = [](int step, std::string why) { return Verdict{false, step, std::move(why)}; };
    if (t.states.size() != t.actions.size() + 1) return reject(-1, "malformed trajectory");
    std::vector<BState> states;
    for (std::size_t i = 0; i < t.states.size(); ++i) {
        if (t.states[i].size() != static_cast<std::size_t>(th_.num_fluents)) return reject(static_cast<int>(i), "state size");
        for (auto v : t.states[i])
            if (v != 0 && v != 1) return reject(static_cast<int>(i), "state " + std::to_string(i) + " is not Boolean");
        states.push_back(from_values(t.states[i]));
    }
    if (!holds(states[0], th_.initially)) return reject(0, "initially violated in state 0");
    if (closure(literals(states[0])) != literals(states[0])) return reject(0, "closure violated in state 0");
    for (std::size_t i = 0; i < t.actions.size(); ++i) {
        int step = static_cast<int>(i) + 1;
        const BState& u = states[i];
        const BState& v = states[i + 1];
        int a = t.actions[i];
        if (a < 0 || a >= th_.num_actions) return reject(step, "unknown action");
        if (!is_executable(a, u)) return reject(step, "executability violated at step " + std::to_string(step));
        LitSet e = direct_effects(a, u);
        LitSet lv = literals(v);
        for (std::size_t l = 0; l < e.size(); ++l)
            if (e[l] && !lv[l]) return reject(step, "effect violated at step " + std::to_string(step));
        if (closure(lv) != lv) return reject(step, "closure violated at step " + std::to_string(step));
        if (!is_successor(u, a, v)) return reject(step, "inertia violated at step " + std::to_string(step));
    }
    if (!holds(states.back(), th_.goal)) return reject(t.length(), "goal violated");
    return {};
}

std::string format_lits(const DomainDescription& d, const LitSet& s) {
    std::string out = "{";
    bool first = true;
    for (std::size_t l = 0; l < s.size(); ++l) {
        if (!s[l]) continue;
        if (!first) out += ", ";
        first = false;
        out += literal_name(d, lit_fluent(static_cast<Lit>(l)), lit_positive(static_cast<Lit>(l)));
    }
    return out + "}";
}

} // namespace bplan::boracle
