#include "bplan/fd/solver.hpp"

#include "propagators.hpp"

#include <algorithm>
#include <stdexcept>

namespace bplan::fd {

Rel negate(Rel r) {
    switch (r) {
    case Rel::Eq: return Rel::Ne;
    case Rel::Ne: return Rel::Eq;
    case Rel::Le: return Rel::Gt;
    case Rel::Lt: return Rel::Ge;
    case Rel::Ge: return Rel::Lt;
    case Rel::Gt: return Rel::Le;
    }
    return r;
}

const char* rel_symbol(Rel r) {
    switch (r) {
    case Rel::Eq: return "=";
    case Rel::Ne: return "\\=";
    case Rel::Le: return "=<";
    case Rel::Lt: return "<";
    case Rel::Ge: return ">=";
    case Rel::Gt: return ">";
    }
    return "?";
}

Solver::Solver() = default;
Solver::~Solver() = default;

VarId Solver::new_var(Domain d, std::string name) {
    if (d.empty()) throw std::invalid_argument("empty domain for variable " + name);
    doms_.push_back(std::move(d));
    names_.push_back(std::move(name));
    stamp_.push_back(current_id_);
    watchers_.emplace_back();
    return static_cast<VarId>(doms_.size() - 1);
}

VarId Solver::new_bool(std::string name) { return new_var(Domain::range(0, 1), std::move(name)); }

Lit Solver::true_lit() {
    if (true_var_ < 0) true_var_ = new_var(Domain::range(1, 1), "true");
    return {true_var_, true};
}

bool Solver::lit_true(Lit l) const {
    const Domain& d = dom(l.var);
    return d.is_fixed() && ((d.min() != 0) == l.positive);
}

bool Solver::lit_false(Lit l) const {
    const Domain& d = dom(l.var);
    return d.is_fixed() && ((d.min() != 0) != l.positive);
}

int Solver::add(std::unique_ptr<Propagator> p) {
    int id = static_cast<int>(props_.size());
    std::vector<VarId> sc = p->scope();
    std::sort(sc.begin(), sc.end());
    sc.erase(std::unique(sc.begin(), sc.end()), sc.end());
    for (VarId v : sc) watchers_[static_cast<std::size_t>(v)].push_back(id);
    props_.push_back(std::move(p));
    queued_.push_back(0);
    if (!failed_) {
        enqueue(id);
        if (!propagate()) failed_ = true;
    }
    return id;
}

int Solver::post_linear(std::vector<Term> terms, Rel rel, Value rhs) {
    return add(make_linear(LinearForm::make(std::move(terms), rel, rhs)));
}

int Solver::post_reif_linear(Lit b, ReifMode mode, std::vector<Term> terms, Rel rel, Value rhs) {
    return add(make_reif_linear(b, mode, LinearForm::make(std::move(terms), rel, rhs)));
}

int Solver::post_clause(std::vector<Lit> lits) { return add(make_clause(std::move(lits))); }
int Solver::post_times(VarId z, VarId x, VarId y) { return add(make_times(z, x, y)); }
int Solver::post_div(VarId z, VarId x, VarId y, bool total) { return add(make_div(z, x, y, total)); }
int Solver::post_mod(VarId z, VarId x, VarId y, bool total) { return add(make_mod(z, x, y, total)); }
int Solver::post_abs(VarId z, VarId x) { return add(make_abs(z, x)); }

void Solver::post_and_equiv(Lit b, const std::vector<Lit>& lits) {
    std::vector<Lit> big{b};
    for (Lit l : lits) {
        post_clause({~b, l});
        big.push_back(~l);
    }
    post_clause(std::move(big));
}

void Solver::post_or_equiv(Lit b, const std::vector<Lit>& lits) {
    std::vector<Lit> big{~b};
    for (Lit l : lits) {
        post_clause({b, ~l});
        big.push_back(l);
    }
    post_clause(std::move(big));
}

void Solver::set_objective_bound(VarId obj, Value upper) {
    if (objective_prop_ < 0) {
        objective_bound_ = std::make_unique<Value>(upper);
        objective_prop_ = add(make_objective_bound(obj, objective_bound_.get()));
        return;
    }
    *objective_bound_ = upper;
    enqueue(objective_prop_);
}

std::string Solver::describe_constraint(int id) const { return props_[static_cast<std::size_t>(id)]->describe(*this); }

void Solver::save(VarId v) {
    auto idx = static_cast<std::size_t>(v);
    if (stamp_[idx] == current_id_) return;
    const auto& iv = doms_[idx].intervals();
    trail_.push_back({v, static_cast<std::uint32_t>(pool_.size()), static_cast<std::uint32_t>(iv.size()), stamp_[idx]});
    pool_.insert(pool_.end(), iv.begin(), iv.end());
    stamp_[idx] = current_id_;
}

bool Solver::changed(VarId v) {
    const Domain& d = dom(v);
    if (trace_) trace_(v, d, current_prop_);
    if (d.empty()) return false;
    for (int pid : watchers_[static_cast<std::size_t>(v)])
        if (pid != current_prop_) enqueue(pid);
    return true;
}

void Solver::enqueue(int pid) {
    auto idx = static_cast<std::size_t>(pid);
    if (queued_[idx]) return;
    queued_[idx] = 1;
    if (props_[idx]->slow())
        queue_slow_.push_back(pid);
    else
        queue_fast_.push_back(pid);
}

#define BPLAN_UPDATE(expr_check, expr_apply)                                                                          \
    auto idx = static_cast<std::size_t>(v);                                                                            \
    if (!(expr_check)) return !doms_[idx].empty();                                                                     \
    save(v);                                                                                                           \
    expr_apply;                                                                                                        \
    return changed(v);

bool Solver::set_min(VarId v, Value x) { BPLAN_UPDATE(x > doms_[idx].min(), doms_[idx].remove_below(x)) }
bool Solver::set_max(VarId v, Value x) { BPLAN_UPDATE(x < doms_[idx].max(), doms_[idx].remove_above(x)) }
bool Solver::remove(VarId v, Value x) { BPLAN_UPDATE(doms_[idx].contains(x), doms_[idx].remove_value(x)) }
bool Solver::remove_range(VarId v, Value lo, Value hi) {
    BPLAN_UPDATE(lo <= hi && !intersection(doms_[idx], Domain::range(lo, hi)).empty(), doms_[idx].remove_range(lo, hi))
}
bool Solver::assign(VarId v, Value x) {
    BPLAN_UPDATE(!(doms_[idx].is_fixed() && doms_[idx].min() == x), doms_[idx].assign(x))
}
bool Solver::intersect(VarId v, const Domain& d) {
    auto idx = static_cast<std::size_t>(v);
    Domain r = intersection(doms_[idx], d);
    if (r == doms_[idx]) return !r.empty();
    save(v);
    doms_[idx] = std::move(r);
    return changed(v);
}

#undef BPLAN_UPDATE

bool Solver::propagate() {
    if (failed_) return false;
    if (objective_prop_ >= 0) enqueue(objective_prop_);
    for (;;) {
        int pid;
        if (head_fast_ < queue_fast_.size()) {
            pid = queue_fast_[head_fast_++];
        } else if (head_slow_ < queue_slow_.size()) {
            pid = queue_slow_[head_slow_++];
        } else {
            break;
        }
        queued_[static_cast<std::size_t>(pid)] = 0;
        current_prop_ = pid;
        ++propagations_;
        bool ok = props_[static_cast<std::size_t>(pid)]->propagate(*this);
        current_prop_ = -1;
        if (!ok) {
            for (std::size_t i = head_fast_; i < queue_fast_.size(); ++i) queued_[static_cast<std::size_t>(queue_fast_[i])] = 0;
            for (std::size_t i = head_slow_; i < queue_slow_.size(); ++i) queued_[static_cast<std::size_t>(queue_slow_[i])] = 0;
            queue_fast_.clear();
            queue_slow_.clear();
            head_fast_ = head_slow_ = 0;
            if (levels_.empty()) failed_ = true;
            return false;
        }
        if (head_fast_ == queue_fast_.size()) {
            queue_fast_.clear();
            head_fast_ = 0;
        }
        if (head_slow_ == queue_slow_.size() && head_fast_ == queue_fast_.size()) {
            queue_slow_.clear();
            head_slow_ = 0;
        }
    }
    return true;
}

void Solver::push_level() {
    levels_.push_back({trail_.size(), pool_.size(), current_id_});
    current_id_ = next_level_id_++;
}

void Solver::pop_level() {
    const LevelMark m = levels_.back();
    levels_.pop_back();
    while (trail_.size() > m.trail) {
        const Saved& e = trail_.back();
        auto idx = static_cast<std::size_t>(e.var);
        std::vector<Interval> ivs(pool_.begin() + e.offset, pool_.begin() + e.offset + e.count);
        doms_[idx] = Domain::from_intervals(std::move(ivs));
        stamp_[idx] = e.stamp;
        trail_.pop_back();
    }
    pool_.resize(m.pool);
    current_id_ = m.id;
}

// ---------------------------------------------------------------------------

Search::Search(Solver& s, SearchOptions opts) : s_(s), opts_(std::move(opts)), rng_(opts_.seed * 0x9E3779B97F4A7C15ULL + 1) {}

Search::~Search() {
    while (s_.level() > base_level_) s_.pop_level();
}

bool Search::budget_exceeded() {
    if (opts_.node_limit && stats_.nodes >= opts_.node_limit) return true;
    if (opts_.deadline && (stats_.nodes & 255) == 0 && std::chrono::steady_clock::now() > *opts_.deadline) return true;
    return false;
}

bool Search::pick(VarId& var, Value& val) {
    const std::size_t n_order = opts_.order.size();
    const std::size_t total = n_order + (opts_.label_all ? static_cast<std::size_t>(s_.num_vars()) : 0);
    std::size_t pos = stack_.empty() ? 0 : order_pos_hint_;
    for (; pos < total; ++pos) {
        VarId v = pos < n_order ? opts_.order[pos] : static_cast<VarId>(pos - n_order);
        if (!s_.fixed(v)) break;
    }
    if (pos >= total) return false;
    order_pos_hint_ = pos;
    var = pos < n_order ? opts_.order[pos] : static_cast<VarId>(pos - n_order);
    const Domain& d = s_.dom(var);
    switch (opts_.value_order) {
    case ValueOrder::Smallest: val = d.min(); break;
    case ValueOrder::Largest: val = d.max(); break;
    case ValueOrder::Random: {
        rng_ ^= rng_ << 13;
        rng_ ^= rng_ >> 7;
        rng_ ^= rng_ << 17;
        auto vals = d.values();
        val = vals[rng_ % vals.size()];
        break;
    }
    }
    return true;
}

SearchStatus Search::next() {
    if (done_) return SearchStatus::Exhausted;
    bool need_backtrack = false;
    if (!started_) {
        started_ = true;
        base_level_ = s_.level();
        if (s_.failed()) {
            done_ = true;
            return SearchStatus::Exhausted;
        }
        // Root-level refutations made by the search stay local to it.
        s_.push_level();
    } else {
        need_backtrack = true;
    }
    // positions of each choice in the labeling sequence, restored on backtrack
    for (;;) {
        if (!need_backtrack) {
            ++stats_.nodes;
            if (budget_exceeded()) return SearchStatus::Budget;
            bool ok = s_.propagate() && (!opts_.node_hook || opts_.node_hook(s_));
            if (ok) {
                VarId var;
                Value val;
                if (!pick(var, val)) {
                    ++stats_.solutions;
                    return SearchStatus::Solution;
                }
                stack_.push_back({var, val});
                hints_.push_back(order_pos_hint_);
                s_.push_level();
                if (!s_.assign(var, val)) need_backtrack = true;
                continue;
            }
            ++stats_.failures;
        }
        need_backtrack = false;
        // Undo the most recent x = v and try x != v at the parent level.
        for (;;) {
            if (stack_.empty()) {
                done_ = true;
                return SearchStatus::Exhausted;
            }
            Choice c = stack_.back();
            stack_.pop_back();
            order_pos_hint_ = hints_.back();
            hints_.pop_back();
            s_.pop_level();
            if (s_.remove(c.var, c.val)) break;
            ++stats_.failures;
        }
    }
}

std::vector<Value> Search::snapshot() const {
    std::vector<Value> out(static_cast<std::size_t>(s_.num_vars()));
    for (VarId v = 0; v < s_.num_vars(); ++v) out[static_cast<std::size_t>(v)] = s_.fixed(v) ? s_.value(v) : s_.min(v);
    return out;
}

MinimizeResult minimize(Solver& s, VarId obj, SearchOptions opts, const std::function<bool(Solver&)>& accept) {
    MinimizeResult res;
    Search search(s, std::move(opts));
    for (;;) {
        SearchStatus st = search.next();
        if (st == SearchStatus::Solution) {
            if (accept && !accept(s)) continue;
            res.found = true;
            res.best = s.value(obj);
            res.values = search.snapshot();
            s.set_objective_bound(obj, res.best - 1);
            continue;
        }
        res.status = st == SearchStatus::Exhausted ? SearchStatus::Solution : SearchStatus::Budget;
        if (st == SearchStatus::Exhausted && !res.found) res.status = SearchStatus::Exhausted;
        break;
    }
    res.stats = search.stats();
    return res;
}

} // namespace bplan::fd
