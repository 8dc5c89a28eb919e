#include "bplan/bencoder/bencoder.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace bplan::bencoder {

using boracle::complement;
using boracle::lit_fluent;
using boracle::lit_positive;

DepGraph dependency_graph(const BTheory& th) {
    DepGraph g;
    g.num_lits = 2 * th.num_fluents;
    g.succ.resize(static_cast<std::size_t>(g.num_lits));
    for (const auto& law : th.static_laws)
        for (Lit l : law.body) g.succ[static_cast<std::size_t>(law.head)].push_back(l);
    for (auto& s : g.succ) {
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
    }
    return g;
}

namespace {

std::vector<std::vector<int>> sccs(const DepGraph& g) {
    int n = g.num_lits, counter = 0;
    std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
    std::vector<char> on(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> out;
    std::function<void(int)> visit = [&](int v) {
        auto vi = static_cast<std::size_t>(v);
        index[vi] = low[vi] = counter++;
        stack.push_back(v);
        on[vi] = 1;
        for (int w : g.succ[vi]) {
            auto wi = static_cast<std::size_t>(w);
            if (index[wi] < 0) {
                visit(w);
                low[vi] = std::min(low[vi], low[wi]);
            } else if (on[wi]) {
                low[vi] = std::min(low[vi], index[wi]);
            }
        }
        if (low[vi] == index[vi]) {
            std::vector<int> comp;
            int w;
            do {
                w = stack.back();
                stack.pop_back();
                on[static_cast<std::size_t>(w)] = 0;
                comp.push_back(w);
            } while (w != v);
            std::sort(comp.begin(), comp.end());
            out.push_back(std::move(comp));
        }
    };
    for (int v = 0; v < n; ++v)
        if (index[static_cast<std::size_t>(v)] < 0) visit(v);
    return out;
}

bool has_edge(const DepGraph& g, int a, int b) {
    const auto& s = g.succ[static_cast<std::size_t>(a)];
    return std::binary_search(s.begin(), s.end(), b);
}

bool strongly_connected(const DepGraph& g, const std::vector<int>& set, std::vector<char>& in) {
    if (set.size() == 1) return has_edge(g, set[0], set[0]);
    for (int v : set) in[static_cast<std::size_t>(v)] = 1;
    auto reach_all = [&](bool forward) {
        std::vector<int> seen{set[0]}, todo{set[0]};
        std::vector<char> mark(in.size(), 0);
        mark[static_cast<std::size_t>(set[0])] = 1;
        while (!todo.empty()) {
            int v = todo.back();
            todo.pop_back();
            for (int w : set) {
                if (mark[static_cast<std::size_t>(w)]) continue;
                if (forward ? has_edge(g, v, w) : has_edge(g, w, v)) {
                    mark[static_cast<std::size_t>(w)] = 1;
                    seen.push_back(w);
                    todo.push_back(w);
                }
            }
        }
        return seen.size() == set.size();
    };
    bool ok = reach_all(true) && reach_all(false);
    for (int v : set) in[static_cast<std::size_t>(v)] = 0;
    return ok;
}

} // namespace

bool is_acyclic(const DepGraph& g) {
    for (const auto& c : sccs(g))
        if (c.size() > 1 || has_edge(g, c[0], c[0])) return false;
    return true;
}

LoopSet find_loops(const DepGraph& g, std::size_t max_loops, std::size_t max_work) {
    LoopSet out;
    std::size_t work = 0;
    std::vector<char> in(static_cast<std::size_t>(g.num_lits), 0);
    for (const auto& comp : sccs(g)) {
        if (comp.size() == 1) {
            if (has_edge(g, comp[0], comp[0])) out.loops.push_back(comp);
            continue;
        }
        // Undirected adjacency inside the component.
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.num_lits));
        std::vector<char> member(static_cast<std::size_t>(g.num_lits), 0);
        for (int v : comp) member[static_cast<std::size_t>(v)] = 1;
        for (int v : comp)
            for (int w : g.succ[static_cast<std::size_t>(v)])
                if (member[static_cast<std::size_t>(w)] && w != v) {
                    adj[static_cast<std::size_t>(v)].push_back(w);
                    adj[static_cast<std::size_t>(w)].push_back(v);
                }
        // Each connected subset is generated once, anchored at its smallest node.
        std::vector<char> in_sub(static_cast<std::size_t>(g.num_lits), 0), near(static_cast<std::size_t>(g.num_lits), 0);
        std::vector<int> sub;
        std::function<void(std::vector<int>, int)> extend = [&](std::vector<int> ext, int anchor) {
            if (out.overflow) return;
            if (++work > max_work) {
                out.overflow = true;
                return;
            }
            std::vector<int> sorted = sub;
            std::sort(sorted.begin(), sorted.end());
            if (strongly_connected(g, sorted, in)) {
                out.loops.push_back(sorted);
                if (out.loops.size() > max_loops) {
                    out.overflow = true;
                    return;
                }
            }
            while (!ext.empty()) {
                int w = ext.back();
                ext.pop_back();
                std::vector<int> next = ext;
                std::vector<int> added;
                for (int x : adj[static_cast<std::size_t>(w)])
                    if (x > anchor && !in_sub[static_cast<std::size_t>(x)] && !near[static_cast<std::size_t>(x)] &&
                        std::find(next.begin(), next.end(), x) == next.end()) {
                        next.push_back(x);
                    }
                sub.push_back(w);
                in_sub[static_cast<std::size_t>(w)] = 1;
                for (int x : adj[static_cast<std::size_t>(w)])
                    if (!near[static_cast<std::size_t>(x)]) {
                        near[static_cast<std::size_t>(x)] = 1;
                        added.push_back(x);
                    }
                extend(next, anchor);
                for (int x : added) near[static_cast<std::size_t>(x)] = 0;
                in_sub[static_cast<std::size_t>(w)] = 0;
                sub.pop_back();
                if (out.overflow) return;
            }
        };
        for (int v : comp) {
            sub = {v};
            in_sub[static_cast<std::size_t>(v)] = 1;
            near[static_cast<std::size_t>(v)] = 1;
            std::vector<int> added{v};
            std::vector<int> ext;
            for (int x : adj[static_cast<std::size_t>(v)])
                if (x > v && !near[static_cast<std::size_t>(x)]) {
                    near[static_cast<std::size_t>(x)] = 1;
                    added.push_back(x);
                    ext.push_back(x);
                }
            extend(ext, v);
            for (int x : added) near[static_cast<std::size_t>(x)] = 0;
            in_sub[static_cast<std::size_t>(v)] = 0;
            if (out.overflow) return out;
        }
    }
    return out;
}

} // namespace bplan::bencoder

namespace bplan::bencoder {

namespace {
std::vector<std::string> fluent_names_of(const DomainDescription& d) {
    std::vector<std::string> out;
    for (const auto& f : d.fluents) out.push_back(f.name);
    return out;
}
} // namespace

Encoder::Encoder(const DomainDescription& d, fd::Solver& s, EncodeOptions opts)
    : Encoder(boracle::literal_theory(d), fluent_names_of(d), d.actions, s, opts) {}

Encoder::Encoder(BTheory th, std::vector<std::string> fluent_names, std::vector<std::string> action_names,
                 fd::Solver& s, EncodeOptions opts)
    : th_(std::move(th)), fluent_names_(std::move(fluent_names)), action_names_(std::move(action_names)), s_(s),
      opts_(opts) {
    auto n = static_cast<std::size_t>(2 * th_.num_fluents);
    dyn_by_head_.resize(n);
    stat_by_head_.resize(n);
    exec_by_action_.resize(static_cast<std::size_t>(th_.num_actions));
    nonexec_by_action_.resize(static_cast<std::size_t>(th_.num_actions));
    for (std::size_t j = 0; j < th_.dynamic_laws.size(); ++j)
        dyn_by_head_[static_cast<std::size_t>(th_.dynamic_laws[j].head)].push_back(static_cast<int>(j));
    for (std::size_t j = 0; j < th_.static_laws.size(); ++j)
        stat_by_head_[static_cast<std::size_t>(th_.static_laws[j].head)].push_back(static_cast<int>(j));
    for (std::size_t j = 0; j < th_.executable.size(); ++j)
        exec_by_action_[static_cast<std::size_t>(th_.executable[j].action)].push_back(static_cast<int>(j));
    for (std::size_t j = 0; j < th_.nonexecutable.size(); ++j)
        nonexec_by_action_[static_cast<std::size_t>(th_.nonexecutable[j].action)].push_back(static_cast<int>(j));
    if (fluent_names_.empty())
        for (int f = 0; f < th_.num_fluents; ++f) fluent_names_.push_back("f" + std::to_string(f));
    if (action_names_.empty())
        for (int a = 0; a < th_.num_actions; ++a) action_names_.push_back("a" + std::to_string(a));

    if (opts_.loops != LoopMode::Off) {
        DepGraph g = dependency_graph(th_);
        loops_ = find_loops(g, opts_.max_loops);
        use_loops_ = !loops_.loops.empty() || loops_.overflow;
    }
}

std::vector<fd::VarId> Encoder::new_state_layer(int index) {
    std::vector<fd::VarId> out;
    for (int f = 0; f < th_.num_fluents; ++f)
        out.push_back(s_.new_bool("F(" + fluent_names_[static_cast<std::size_t>(f)] + "," + std::to_string(index) + ")"));
    return out;
}

std::vector<fd::VarId> Encoder::new_action_layer(int index) {
    std::vector<fd::VarId> out;
    for (int a = 0; a < th_.num_actions; ++a)
        out.push_back(s_.new_bool("A(" + action_names_[static_cast<std::size_t>(a)] + "," + std::to_string(index) + ")"));
    return out;
}

fd::Lit Encoder::lit(const std::vector<fd::VarId>& layer, Lit l) const {
    return fd::Lit{layer[static_cast<std::size_t>(lit_fluent(l))], lit_positive(l)};
}

fd::Lit Encoder::mk_and(std::vector<fd::Lit> lits) {
    fd::Lit t = s_.true_lit();
    std::vector<fd::Lit> keep;
    for (const auto& l : lits) {
        if (l == ~t) return ~t;
        if (l == t || std::find(keep.begin(), keep.end(), l) != keep.end()) continue;
        if (std::find(keep.begin(), keep.end(), ~l) != keep.end()) return ~t;
        keep.push_back(l);
    }
    if (keep.empty()) return t;
    if (keep.size() == 1) return keep[0];
    fd::Lit b{s_.new_bool(), true};
    s_.post_and_equiv(b, keep);
    return b;
}

fd::Lit Encoder::mk_or(std::vector<fd::Lit> lits) {
    for (auto& l : lits) l = ~l;
    return ~mk_and(std::move(lits));
}

std::string Encoder::name(Lit l, int index) const {
    const std::string& f = fluent_names_[static_cast<std::size_t>(lit_fluent(l))];
    return "F(" + (lit_positive(l) ? f : "neg(" + f + ")") + "," + std::to_string(index) + ")";
}

std::string Encoder::conj_text(const std::vector<Lit>& body, int index) const {
    if (body.empty()) return "true";
    std::string out;
    for (std::size_t k = 0; k < body.size(); ++k) out += (k ? " & " : "") + name(body[k], index);
    return out;
}

void Encoder::note(std::string line) {
    if (opts_.record) listing_.push_back(std::move(line));
}

void Encoder::encode_transition(const std::vector<fd::VarId>& u, const std::vector<fd::VarId>& a,
                                const std::vector<fd::VarId>& v, int step) {
    const int iu = step, iv = step + 1;
    auto act = [&](int k) { return fd::Lit{a[static_cast<std::size_t>(k)], true}; };
    auto aname = [&](int k) { return "A(" + action_names_[static_cast<std::size_t>(k)] + "," + std::to_string(iu) + ")"; };
    auto lname = [&](Lit l) {
        const std::string& f = fluent_names_[static_cast<std::size_t>(lit_fluent(l))];
        return lit_positive(l) ? f : "neg(" + f + ")";
    };

    std::vector<fd::Lit> fired(static_cast<std::size_t>(2 * th_.num_fluents));
    for (Lit l = 0; l < 2 * th_.num_fluents; ++l) {
        std::vector<fd::Lit> dyn, stat;
        std::string dyn_text, stat_text;
        for (int j : dyn_by_head_[static_cast<std::size_t>(l)]) {
            const auto& law = th_.dynamic_laws[static_cast<std::size_t>(j)];
            std::vector<fd::Lit> parts{act(law.action)};
            for (Lit b : law.body) parts.push_back(lit(u, b));
            dyn.push_back(mk_and(parts));
            if (opts_.record) dyn_text += (dyn_text.empty() ? "" : " | ") + ("(" + conj_text(law.body, iu) + " & " + aname(law.action) + ")");
        }
        for (int j : stat_by_head_[static_cast<std::size_t>(l)]) {
            const auto& law = th_.static_laws[static_cast<std::size_t>(j)];
            std::vector<fd::Lit> parts;
            for (Lit b : law.body) parts.push_back(lit(v, b));
            stat.push_back(mk_and(parts));
            if (opts_.record) stat_text += (stat_text.empty() ? "" : " | ") + ("(" + conj_text(law.body, iv) + ")");
        }
        fd::Lit d = mk_or(dyn), st = mk_or(stat);
        fired[static_cast<std::size_t>(l)] = mk_or({d, st});
        std::string ln = lname(l);
        note("Dyn(" + ln + "," + std::to_string(iu) + ") <-> " + (dyn_text.empty() ? "false" : dyn_text));
        note("Stat(" + ln + "," + std::to_string(iv) + ") <-> " + (stat_text.empty() ? "false" : stat_text));
        note("Fired(" + ln + "," + std::to_string(iu) + ") <-> Dyn(" + ln + "," + std::to_string(iu) + ") | Stat(" + ln +
             "," + std::to_string(iv) + ")");
    }
    for (int f = 0; f < th_.num_fluents; ++f) {
        for (Lit l : {boracle::pos_lit(f), boracle::neg_lit(f)}) {
            fd::Lit fl = fired[static_cast<std::size_t>(l)];
            fd::Lit fc = fired[static_cast<std::size_t>(complement(l))];
            if (lit_positive(l)) {
                s_.post_clause({~fl, ~fc});
                note("~Fired(" + lname(l) + "," + std::to_string(iu) + ") | ~Fired(" + lname(complement(l)) + "," +
                     std::to_string(iu) + ")");
            }
            fd::Lit keep = mk_and({~fc, lit(u, l)});
            fd::Lit rhs = mk_or({fl, keep});
            fd::Lit lhs = lit(v, l);
            s_.post_clause({~lhs, rhs});
            s_.post_clause({lhs, ~rhs});
            note(name(l, iv) + " <-> Fired(" + lname(l) + "," + std::to_string(iu) + ") | (~Fired(" +
                 lname(complement(l)) + "," + std::to_string(iu) + ") & " + name(l, iu) + ")");
        }
    }

    std::vector<fd::Term> sum;
    std::string sum_text;
    for (int k = 0; k < th_.num_actions; ++k) {
        sum.push_back({1, a[static_cast<std::size_t>(k)]});
        sum_text += (k ? " + " : "") + aname(k);
    }
    s_.post_linear(sum, fd::Rel::Eq, 1);
    note(sum_text + " = 1");
    for (int k = 0; k < th_.num_actions; ++k) {
        std::vector<fd::Lit> clause{~act(k)};
        std::string text;
        for (int j : exec_by_action_[static_cast<std::size_t>(k)]) {
            const auto& law = th_.executable[static_cast<std::size_t>(j)];
            std::vector<fd::Lit> parts;
            for (Lit b : law.body) parts.push_back(lit(u, b));
            clause.push_back(mk_and(parts));
            text += (text.empty() ? "" : " | ") + ("(" + conj_text(law.body, iu) + ")");
        }
        s_.post_clause(clause);
        note(aname(k) + " -> " + (text.empty() ? "false" : text));
        for (int j : nonexec_by_action_[static_cast<std::size_t>(k)]) {
            const auto& law = th_.nonexecutable[static_cast<std::size_t>(j)];
            std::vector<fd::Lit> parts;
            for (Lit b : law.body) parts.push_back(lit(u, b));
            s_.post_clause({~act(k), ~mk_and(parts)});
            note(aname(k) + " -> ~(" + conj_text(law.body, iu) + ")");
        }
    }
    if (use_loops_)
        for (const auto& loop : loops_.loops) encode_loop(loop, u, a, v, step);
}

void Encoder::encode_loop(const std::vector<Lit>& loop, const std::vector<fd::VarId>& u,
                          const std::vector<fd::VarId>& a, const std::vector<fd::VarId>& v, int step) {
    // One requirement per supporting law plus the inertia requirement; a
    // counter-support picks one falsifying option from each.
    std::vector<std::vector<fd::Lit>> reqs;
    std::vector<std::vector<std::string>> req_text;
    auto in_loop = [&](Lit l) { return std::binary_search(loop.begin(), loop.end(), l); };
    const int iu = step, iv = step + 1;
    for (Lit l : loop) {
        for (int j : dyn_by_head_[static_cast<std::size_t>(l)]) {
            const auto& law = th_.dynamic_laws[static_cast<std::size_t>(j)];
            std::vector<fd::Lit> opts{fd::Lit{a[static_cast<std::size_t>(law.action)], false}};
            std::vector<std::string> txt{"A(" + action_names_[static_cast<std::size_t>(law.action)] + "," + std::to_string(iu) + ")=0"};
            for (Lit b : law.body) {
                opts.push_back(lit(u, complement(b)));
                txt.push_back(name(complement(b), iu) + "=1");
            }
            reqs.push_back(opts);
            req_text.push_back(txt);
        }
        for (int j : stat_by_head_[static_cast<std::size_t>(l)]) {
            const auto& law = th_.static_laws[static_cast<std::size_t>(j)];
            if (std::any_of(law.body.begin(), law.body.end(), in_loop)) continue;
            std::vector<fd::Lit> opts;
            std::vector<std::string> txt;
            for (Lit b : law.body) {
                opts.push_back(lit(v, complement(b)));
                txt.push_back(name(complement(b), iv) + "=1");
            }
            if (opts.empty()) return; // an unconditional external support: Form(L) is empty
            reqs.push_back(opts);
            req_text.push_back(txt);
        }
        reqs.push_back({lit(u, complement(l)), lit(v, complement(l))});
        req_text.push_back({name(complement(l), iu) + "=1", name(complement(l), iv) + "=1"});
    }
    std::string consequent;
    for (std::size_t k = 0; k < loop.size(); ++k) consequent += (k ? " & " : "") + name(loop[k], iv) + "=0";

    std::size_t combos = 1;
    for (const auto& r : reqs) {
        combos *= r.size();
        if (combos > opts_.max_combinations) break;
    }
    if (combos <= opts_.max_combinations) {
        std::vector<std::size_t> pick(reqs.size(), 0);
        while (true) {
            std::vector<fd::Lit> neg_ante;
            std::string ante;
            for (std::size_t r = 0; r < reqs.size(); ++r) {
                neg_ante.push_back(~reqs[r][pick[r]]);
                if (opts_.record) ante += (r ? " & " : "") + req_text[r][pick[r]];
            }
            for (Lit l : loop) {
                std::vector<fd::Lit> clause = neg_ante;
                clause.push_back(~lit(v, l));
                s_.post_clause(clause);
            }
            note("loop: " + ante + " -> " + consequent);
            std::size_t r = 0;
            while (r < reqs.size() && ++pick[r] == reqs[r].size()) pick[r++] = 0;
            if (r == reqs.size()) break;
        }
    } else {
        std::vector<fd::Lit> all;
        std::string ante;
        for (std::size_t r = 0; r < reqs.size(); ++r) {
            all.push_back(mk_or(reqs[r]));
            if (opts_.record) {
                std::string alt;
                for (std::size_t k = 0; k < req_text[r].size(); ++k) alt += (k ? " | " : "") + req_text[r][k];
                ante += (r ? " & " : "") + ("(" + alt + ")");
            }
        }
        fd::Lit none = mk_and(all);
        for (Lit l : loop) s_.post_clause({~none, ~lit(v, l)});
        note("loop: " + ante + " -> " + consequent);
    }
}

void Encoder::pin_literals(const std::vector<fd::VarId>& layer, const std::vector<Lit>& lits, int index, const char* what) {
    for (Lit l : lits) {
        s_.post_clause({lit(layer, l)});
        note(std::string(what) + ": " + name(l, index) + "=1");
    }
}

BProblem encode_problem(const DomainDescription& d, int N, const EncodeOptions& opts) {
    if (N < 0) throw std::invalid_argument("plan length must be non-negative");
    BProblem p;
    p.solver = std::make_unique<fd::Solver>();
    boracle::BOracle oracle(d);
    boracle::BState s0 = oracle.initial_state();
    Encoder enc(d, *p.solver, opts);
    for (int i = 0; i <= N; ++i) {
        p.layers.F.push_back(enc.new_state_layer(i));
        if (i < N) p.layers.A.push_back(enc.new_action_layer(i));
    }
    std::vector<Lit> init;
    for (int f = 0; f < d.num_fluents(); ++f)
        init.push_back(s0.value[static_cast<std::size_t>(f)] ? boracle::pos_lit(f) : boracle::neg_lit(f));
    enc.pin_literals(p.layers.F[0], init, 0, "initially");
    for (int i = 0; i < N; ++i)
        enc.encode_transition(p.layers.F[static_cast<std::size_t>(i)], p.layers.A[static_cast<std::size_t>(i)],
                              p.layers.F[static_cast<std::size_t>(i + 1)], i);
    enc.pin_literals(p.layers.F[static_cast<std::size_t>(N)], oracle.theory().goal, N, "goal");
    for (int i = 0; i <= N; ++i) {
        for (auto v : p.layers.F[static_cast<std::size_t>(i)]) p.order.push_back(v);
        if (i < N)
            for (auto v : p.layers.A[static_cast<std::size_t>(i)]) p.order.push_back(v);
    }
    p.needs_oracle_check = enc.needs_oracle_check();
    p.listing = enc.listing();
    return p;
}

} // namespace bplan::bencoder
