#include "propagators.hpp"

#include <algorithm>
#include <sstream>

namespace bplan::fd {

Value floor_div(Value a, Value b) {
    Value q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

Value ceil_div(Value a, Value b) {
    Value q = a / b;
    if ((a % b != 0) && ((a < 0) == (b < 0))) ++q;
    return q;
}

Value trunc_div(Value a, Value b) { return a / b; }
Value trunc_mod(Value a, Value b) { return a % b; }

namespace {

Value clampv(__int128 v) {
    if (v < kValueMin) return kValueMin;
    if (v > kValueMax) return kValueMax;
    return static_cast<Value>(v);
}

__int128 term_min(const Solver& s, const Term& t) {
    return t.coef > 0 ? static_cast<__int128>(t.coef) * s.min(t.var) : static_cast<__int128>(t.coef) * s.max(t.var);
}

__int128 term_max(const Solver& s, const Term& t) {
    return t.coef > 0 ? static_cast<__int128>(t.coef) * s.max(t.var) : static_cast<__int128>(t.coef) * s.min(t.var);
}

std::string lit_string(const Solver& s, Lit l) {
    std::string n = s.name(l.var).empty() ? "x" + std::to_string(l.var) : s.name(l.var);
    return l.positive ? n : "not(" + n + ")";
}

std::string var_string(const Solver& s, VarId v) {
    return s.name(v).empty() ? "x" + std::to_string(v) : s.name(v);
}

// sum(terms) <= rhs, bounds consistent. One pass reaches the fixpoint.
bool le_pass(Solver& s, const std::vector<Term>& terms, Value rhs, bool& changed) {
    __int128 total = 0;
    for (const auto& t : terms) total += term_min(s, t);
    if (total > rhs) return false;
    for (const auto& t : terms) {
        __int128 slack = static_cast<__int128>(rhs) - (total - term_min(s, t));
        Value sl = clampv(slack);
        if (t.coef > 0) {
            Value ub = floor_div(sl, t.coef);
            if (ub < s.max(t.var)) {
                changed = true;
                if (!s.set_max(t.var, ub)) return false;
            }
        } else {
            Value lb = ceil_div(sl, t.coef);
            if (lb > s.min(t.var)) {
                changed = true;
                if (!s.set_min(t.var, lb)) return false;
            }
        }
    }
    return true;
}

class LinearProp final : public Propagator {
public:
    explicit LinearProp(LinearForm f) : f_(std::move(f)) {
        for (const auto& t : f_.terms) neg_.push_back({-t.coef, t.var});
    }
    bool propagate(Solver& s) override {
        if (f_.rel == Rel::Le) {
            bool ch = false;
            return le_pass(s, f_.terms, f_.rhs, ch);
        }
        if (f_.rel == Rel::Ne) return ne(s);
        bool ch = true;
        while (ch) {
            ch = false;
            if (!le_pass(s, f_.terms, f_.rhs, ch)) return false;
            if (!le_pass(s, neg_, -f_.rhs, ch)) return false;
        }
        return exact(s);
    }
    std::vector<VarId> scope() const override {
        std::vector<VarId> v;
        for (const auto& t : f_.terms) v.push_back(t.var);
        return v;
    }
    std::string describe(const Solver& s) const override { return f_.to_string(s); }
    bool slow() const override { return f_.terms.size() > 3; }

private:
    // With one unfixed variable the remaining value is forced exactly.
    bool exact(Solver& s) {
        int unfixed = -1;
        __int128 sum = 0;
        for (std::size_t i = 0; i < f_.terms.size(); ++i) {
            const auto& t = f_.terms[i];
            if (s.fixed(t.var))
                sum += static_cast<__int128>(t.coef) * s.value(t.var);
            else if (unfixed >= 0)
                return true;
            else
                unfixed = static_cast<int>(i);
        }
        if (unfixed < 0) return sum == f_.rhs;
        const auto& t = f_.terms[static_cast<std::size_t>(unfixed)];
        __int128 rest = static_cast<__int128>(f_.rhs) - sum;
        if (rest % t.coef != 0) return false;
        __int128 v = rest / t.coef;
        if (v < kValueMin || v > kValueMax) return false;
        return s.assign(t.var, static_cast<Value>(v));
    }
    bool ne(Solver& s) {
        int unfixed = -1;
        __int128 sum = 0;
        for (std::size_t i = 0; i < f_.terms.size(); ++i) {
            const auto& t = f_.terms[i];
            if (s.fixed(t.var))
                sum += static_cast<__int128>(t.coef) * s.value(t.var);
            else if (unfixed >= 0)
                return true;
            else
                unfixed = static_cast<int>(i);
        }
        if (unfixed < 0) return sum != f_.rhs;
        const auto& t = f_.terms[static_cast<std::size_t>(unfixed)];
        __int128 rest = static_cast<__int128>(f_.rhs) - sum;
        if (rest % t.coef != 0) return true;
        __int128 v = rest / t.coef;
        if (v < kValueMin || v > kValueMax) return true;
        return s.remove(t.var, static_cast<Value>(v));
    }

    LinearForm f_;
    std::vector<Term> neg_;
};

class ReifLinearProp final : public Propagator {
public:
    ReifLinearProp(Lit b, ReifMode mode, LinearForm f)
        : b_(b), mode_(mode), f_(std::move(f)), nf_(f_.negated()), pos_(f_), neg_(nf_) {}
    bool propagate(Solver& s) override {
        if (s.lit_true(b_)) return pos_.propagate(s);
        if (s.lit_false(b_)) return mode_ == ReifMode::Implies ? true : neg_.propagate(s);
        Truth t = linear_status(s, f_);
        if (t == Truth::False) return s.set_lit(b_, false);
        if (t == Truth::True && mode_ == ReifMode::Equiv) return s.set_lit(b_, true);
        return true;
    }
    std::vector<VarId> scope() const override {
        std::vector<VarId> v{b_.var};
        for (const auto& t : f_.terms) v.push_back(t.var);
        return v;
    }
    std::string describe(const Solver& s) const override {
        return lit_string(s, b_) + (mode_ == ReifMode::Equiv ? " <-> " : " -> ") + f_.to_string(s);
    }

private:
    Lit b_;
    ReifMode mode_;
    LinearForm f_;
    LinearForm nf_;
    LinearProp pos_;
    LinearProp neg_;
};

class ClauseProp final : public Propagator {
public:
    explicit ClauseProp(std::vector<Lit> lits) : lits_(std::move(lits)) {}
    bool propagate(Solver& s) override {
        int unfixed = -1;
        int count = 0;
        for (std::size_t i = 0; i < lits_.size(); ++i) {
            const Lit l = lits_[i];
            const Domain& d = s.dom(l.var);
            if (d.is_fixed()) {
                if ((d.min() != 0) == l.positive) return true;
            } else {
                ++count;
                unfixed = static_cast<int>(i);
                if (count > 1) return true;
            }
        }
        if (count == 0) return false;
        return s.set_lit(lits_[static_cast<std::size_t>(unfixed)], true);
    }
    std::vector<VarId> scope() const override {
        std::vector<VarId> v;
        for (const auto& l : lits_) v.push_back(l.var);
        return v;
    }
    std::string describe(const Solver& s) const override {
        std::string out = "or(";
        for (std::size_t i = 0; i < lits_.size(); ++i) out += (i ? ", " : "") + lit_string(s, lits_[i]);
        return out + ")";
    }

private:
    std::vector<Lit> lits_;
};

class TimesProp final : public Propagator {
public:
    TimesProp(VarId z, VarId x, VarId y) : z_(z), x_(x), y_(y) {}
    bool propagate(Solver& s) override {
        for (int round = 0; round < 4; ++round) {
            Value zl = s.min(z_), zh = s.max(z_);
            __int128 c[4] = {static_cast<__int128>(s.min(x_)) * s.min(y_), static_cast<__int128>(s.min(x_)) * s.max(y_),
                             static_cast<__int128>(s.max(x_)) * s.min(y_), static_cast<__int128>(s.max(x_)) * s.max(y_)};
            __int128 lo = *std::min_element(c, c + 4), hi = *std::max_element(c, c + 4);
            if (!s.set_min(z_, clampv(lo)) || !s.set_max(z_, clampv(hi))) return false;
            if (!narrow(s, x_, y_) || !narrow(s, y_, x_)) return false;
            if (s.min(z_) == zl && s.max(z_) == zh) break;
        }
        if (s.fixed(x_) && s.fixed(y_)) return s.assign(z_, clampv(static_cast<__int128>(s.value(x_)) * s.value(y_)));
        return true;
    }
    std::vector<VarId> scope() const override { return {z_, x_, y_}; }
    std::string describe(const Solver& s) const override {
        return var_string(s, z_) + " = " + var_string(s, x_) + " * " + var_string(s, y_);
    }
    bool slow() const override { return true; }

private:
    // a = z / b when b is fixed and non-zero.
    bool narrow(Solver& s, VarId a, VarId b) {
        if (!s.fixed(b)) return true;
        Value k = s.value(b);
        if (k == 0) return true;
        Value zl = s.min(z_), zh = s.max(z_);
        Value lo = k > 0 ? ceil_div(zl, k) : ceil_div(zh, k);
        Value hi = k > 0 ? floor_div(zh, k) : floor_div(zl, k);
        return s.set_min(a, lo) && s.set_max(a, hi);
    }
    VarId z_, x_, y_;
};

// Smallest / largest x with trunc(x / b) inside [zl, zh], b > 0.
void div_inverse(Value zl, Value zh, Value b, Value& xl, Value& xh) {
    xl = zl > 0 ? zl * b : zl * b - (b - 1);
    xh = zh >= 0 ? zh * b + (b - 1) : zh * b;
}

class DivProp final : public Propagator {
public:
    DivProp(VarId z, VarId x, VarId y, bool total, bool is_mod) : z_(z), x_(x), y_(y), total_(total), mod_(is_mod) {}
    bool propagate(Solver& s) override {
        if (!total_ && !s.remove(y_, 0)) return false;
        if (s.fixed(x_) && s.fixed(y_)) {
            Value a = s.value(x_), b = s.value(y_);
            Value r = b == 0 ? 0 : (mod_ ? trunc_mod(a, b) : trunc_div(a, b));
            return s.assign(z_, r);
        }
        if (!(mod_ ? bounds_mod(s) : bounds_div(s))) return false;
        if (s.fixed(x_) && s.fixed(y_)) {
            Value a = s.value(x_), b = s.value(y_);
            return s.assign(z_, b == 0 ? 0 : (mod_ ? trunc_mod(a, b) : trunc_div(a, b)));
        }
        return true;
    }
    std::vector<VarId> scope() const override { return {z_, x_, y_}; }
    std::string describe(const Solver& s) const override {
        return var_string(s, z_) + " = " + var_string(s, x_) + (mod_ ? " mod " : " / ") + var_string(s, y_) +
               (total_ ? " (total)" : "");
    }
    bool slow() const override { return true; }

private:
    bool bounds_div(Solver& s) {
        Value xl = s.min(x_), xh = s.max(x_), yl = s.min(y_), yh = s.max(y_);
        bool any = false;
        Value lo = kValueMax, hi = kValueMin;
        auto part = [&](Value a, Value b) {
            for (Value xv : {xl, xh})
                for (Value yv : {a, b}) {
                    Value q = trunc_div(xv, yv);
                    lo = std::min(lo, q);
                    hi = std::max(hi, q);
                }
            any = true;
        };
        if (yh >= 1) part(std::max<Value>(yl, 1), yh);
        if (yl <= -1) part(yl, std::min<Value>(yh, -1));
        if (total_ && s.dom(y_).contains(0)) {
            lo = std::min<Value>(lo, 0);
            hi = std::max<Value>(hi, 0);
            any = true;
        }
        if (!any) return false;
        if (!s.set_min(z_, lo) || !s.set_max(z_, hi)) return false;
        if (s.fixed(y_) && s.value(y_) != 0) {
            Value b = s.value(y_);
            Value zl = s.min(z_), zh = s.max(z_), nl, nh;
            if (b > 0) {
                div_inverse(zl, zh, b, nl, nh);
            } else {
                div_inverse(-zh, -zl, -b, nl, nh);
            }
            if (!s.set_min(x_, nl) || !s.set_max(x_, nh)) return false;
        }
        return true;
    }
    bool bounds_mod(Solver& s) {
        Value xl = s.min(x_), xh = s.max(x_);
        Value m = std::max(std::abs(s.min(y_)), std::abs(s.max(y_)));
        if (m == 0) return total_ ? s.assign(z_, 0) : false;
        Value lo = xl >= 0 ? 0 : std::max(xl, -(m - 1));
        Value hi = xh <= 0 ? 0 : std::min(xh, m - 1);
        return s.set_min(z_, lo) && s.set_max(z_, hi);
    }
    VarId z_, x_, y_;
    bool total_;
    bool mod_;
};

class AbsProp final : public Propagator {
public:
    AbsProp(VarId z, VarId x) : z_(z), x_(x) {}
    bool propagate(Solver& s) override {
        Value xl = s.min(x_), xh = s.max(x_);
        Value lo, hi;
        if (xl >= 0) {
            lo = xl;
            hi = xh;
        } else if (xh <= 0) {
            lo = -xh;
            hi = -xl;
        } else {
            lo = 0;
            hi = std::max(-xl, xh);
        }
        if (!s.set_min(z_, lo) || !s.set_max(z_, hi)) return false;
        Value zl = s.min(z_), zh = s.max(z_);
        if (!s.set_min(x_, -zh) || !s.set_max(x_, zh)) return false;
        if (zl > 0 && !s.remove_range(x_, -zl + 1, zl - 1)) return false;
        if (s.fixed(x_)) return s.assign(z_, std::abs(s.value(x_)));
        return true;
    }
    std::vector<VarId> scope() const override { return {z_, x_}; }
    std::string describe(const Solver& s) const override {
        return var_string(s, z_) + " = abs(" + var_string(s, x_) + ")";
    }

private:
    VarId z_, x_;
};

class ObjectiveBoundProp final : public Propagator {
public:
    ObjectiveBoundProp(VarId obj, Value* bound) : obj_(obj), bound_(bound) {}
    bool propagate(Solver& s) override { return s.set_max(obj_, *bound_); }
    std::vector<VarId> scope() const override { return {obj_}; }
    std::string describe(const Solver& s) const override {
        return var_string(s, obj_) + " =< " + std::to_string(*bound_);
    }

private:
    VarId obj_;
    Value* bound_;
};

} // namespace

LinearForm LinearForm::make(std::vector<Term> terms, Rel rel, Value rhs) {
    // Merge duplicate variables and drop zero coefficients.
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    std::vector<Term> merged;
    for (const auto& t : terms) {
        if (!merged.empty() && merged.back().var == t.var)
            merged.back().coef += t.coef;
        else
            merged.push_back(t);
    }
    std::erase_if(merged, [](const Term& t) { return t.coef == 0; });
    LinearForm f;
    f.terms = std::move(merged);
    switch (rel) {
    case Rel::Eq: f.rel = Rel::Eq; f.rhs = rhs; break;
    case Rel::Ne: f.rel = Rel::Ne; f.rhs = rhs; break;
    case Rel::Le: f.rel = Rel::Le; f.rhs = rhs; break;
    case Rel::Lt: f.rel = Rel::Le; f.rhs = rhs - 1; break;
    case Rel::Ge:
    case Rel::Gt:
        for (auto& t : f.terms) t.coef = -t.coef;
        f.rel = Rel::Le;
        f.rhs = rel == Rel::Ge ? -rhs : -rhs - 1;
        break;
    }
    return f;
}

LinearForm LinearForm::negated() const {
    LinearForm f = *this;
    if (rel == Rel::Eq) {
        f.rel = Rel::Ne;
    } else if (rel == Rel::Ne) {
        f.rel = Rel::Eq;
    } else {
        for (auto& t : f.terms) t.coef = -t.coef;
        f.rhs = -rhs - 1;
    }
    return f;
}

std::string LinearForm::to_string(const Solver& s) const {
    std::ostringstream os;
    if (terms.empty()) os << '0';
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& t = terms[i];
        if (i) os << (t.coef < 0 ? " - " : " + ");
        else if (t.coef < 0) os << '-';
        Value c = t.coef < 0 ? -t.coef : t.coef;
        if (c != 1) os << c << '*';
        os << var_string(s, t.var);
    }
    os << ' ' << (rel == Rel::Le ? "=<" : rel == Rel::Eq ? "=" : "\\=") << ' ' << rhs;
    return os.str();
}

Truth linear_status(const Solver& s, const LinearForm& f) {
    __int128 lo = 0, hi = 0;
    int unfixed = 0;
    for (const auto& t : f.terms) {
        lo += term_min(s, t);
        hi += term_max(s, t);
        if (!s.fixed(t.var)) ++unfixed;
    }
    switch (f.rel) {
    case Rel::Le:
        if (hi <= f.rhs) return Truth::True;
        if (lo > f.rhs) return Truth::False;
        return Truth::Unknown;
    case Rel::Eq:
    case Rel::Ne: {
        Truth eq = Truth::Unknown;
        if (lo == hi) {
            eq = lo == f.rhs ? Truth::True : Truth::False;
        } else if (f.rhs < lo || f.rhs > hi) {
            eq = Truth::False;
        } else if (unfixed == 1 || unfixed == 2) {
            // Domain-level test on the unfixed variables.
            __int128 rest = f.rhs;
            std::vector<Term> open;
            for (const auto& t : f.terms) {
                if (s.fixed(t.var))
                    rest -= static_cast<__int128>(t.coef) * s.value(t.var);
                else
                    open.push_back(t);
            }
            if (open.size() == 1) {
                if (rest % open[0].coef != 0 || !s.dom(open[0].var).contains(clampv(rest / open[0].coef)))
                    eq = Truth::False;
            } else if (std::abs(open[0].coef) == 1 && open[1].coef == -open[0].coef) {
                // x - y = r (after sign normalisation): needs dom(x) and dom(y) + r to meet.
                const Term& px = open[0].coef > 0 ? open[0] : open[1];
                const Term& py = open[0].coef > 0 ? open[1] : open[0];
                Domain shiftedy = shifted(s.dom(py.var), clampv(rest));
                if (intersection(s.dom(px.var), shiftedy).empty()) eq = Truth::False;
            }
        }
        if (f.rel == Rel::Eq) return eq;
        if (eq == Truth::True) return Truth::False;
        if (eq == Truth::False) return Truth::True;
        return Truth::Unknown;
    }
    default:
        return Truth::Unknown;
    }
}

bool linear_enforce(Solver& s, const LinearForm& f) {
    LinearProp p(f);
    return p.propagate(s);
}

std::unique_ptr<Propagator> make_linear(LinearForm f) { return std::make_unique<LinearProp>(std::move(f)); }
std::unique_ptr<Propagator> make_reif_linear(Lit b, ReifMode mode, LinearForm f) {
    return std::make_unique<ReifLinearProp>(b, mode, std::move(f));
}
std::unique_ptr<Propagator> make_clause(std::vector<Lit> lits) { return std::make_unique<ClauseProp>(std::move(lits)); }
std::unique_ptr<Propagator> make_times(VarId z, VarId x, VarId y) { return std::make_unique<TimesProp>(z, x, y); }
std::unique_ptr<Propagator> make_div(VarId z, VarId x, VarId y, bool total) {
    return std::make_unique<DivProp>(z, x, y, total, false);
}
std::unique_ptr<Propagator> make_mod(VarId z, VarId x, VarId y, bool total) {
    return std::make_unique<DivProp>(z, x, y, total, true);
}
std::unique_ptr<Propagator> make_abs(VarId z, VarId x) { return std::make_unique<AbsProp>(z, x); }
std::unique_ptr<Propagator> make_objective_bound(VarId obj, Value* bound) {
    return std::make_unique<ObjectiveBoundProp>(obj, bound);
}

} // namespace bplan::fd
