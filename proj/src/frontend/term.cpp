#include "bplan/frontend/term.hpp"

#include <cctype>
#include <unordered_map>

namespace bplan::frontend {

Term Term::integer(std::int64_t v) {
    Term t;
    t.d_ = std::make_shared<Data>(Data{Kind::Int, v, -1, {}, {}});
    return t;
}

Term Term::atom(std::string name, std::vector<Term> args) {
    Term t;
    t.d_ = std::make_shared<Data>(Data{Kind::Atom, 0, -1, std::move(name), std::move(args)});
    return t;
}

Term Term::var(int id, std::string name) {
    Term t;
    t.d_ = std::make_shared<Data>(Data{Kind::Var, 0, id, std::move(name), {}});
    return t;
}

Term Term::list(std::vector<Term> elems) {
    Term t;
    t.d_ = std::make_shared<Data>(Data{Kind::List, 0, -1, {}, std::move(elems)});
    return t;
}

bool Term::ground() const {
    if (is_var()) return false;
    for (const auto& a : d_->args)
        if (!a.ground()) return false;
    return true;
}

bool Term::operator==(const Term& o) const {
    if (d_ == o.d_) return true;
    if (!d_ || !o.d_ || d_->kind != o.d_->kind) return false;
    switch (d_->kind) {
    case Kind::Int: return d_->ival == o.d_->ival;
    case Kind::Var: return d_->var == o.d_->var;
    case Kind::Atom:
        if (d_->name != o.d_->name) return false;
        [[fallthrough]];
    case Kind::List:
        if (d_->args.size() != o.d_->args.size()) return false;
        for (std::size_t i = 0; i < d_->args.size(); ++i)
            if (!(d_->args[i] == o.d_->args[i])) return false;
        return true;
    }
    return false;
}

const OpInfo* infix_op(const std::string& name) {
    static const std::unordered_map<std::string, OpInfo> ops = {
        {":-", {1200, OpInfo::XFX}}, {";", {1100, OpInfo::XFY}},   {"->", {1050, OpInfo::XFY}},
        {",", {1000, OpInfo::XFY}},  {"=", {700, OpInfo::XFX}},    {"\\=", {700, OpInfo::XFX}},
        {"==", {700, OpInfo::XFX}},  {"\\==", {700, OpInfo::XFX}}, {"is", {700, OpInfo::XFX}},
        {"=:=", {700, OpInfo::XFX}}, {"=\\=", {700, OpInfo::XFX}}, {"<", {700, OpInfo::XFX}},
        {">", {700, OpInfo::XFX}},   {"=<", {700, OpInfo::XFX}},   {">=", {700, OpInfo::XFX}},
        {"eq", {700, OpInfo::XFX}},  {"neq", {700, OpInfo::XFX}},  {"geq", {700, OpInfo::XFX}},
        {"leq", {700, OpInfo::XFX}}, {"gt", {700, OpInfo::XFX}},   {"lt", {700, OpInfo::XFX}},
        {"+", {500, OpInfo::YFX}},   {"-", {500, OpInfo::YFX}},    {"*", {400, OpInfo::YFX}},
        {"/", {400, OpInfo::YFX}},   {"//", {400, OpInfo::YFX}},   {"mod", {400, OpInfo::YFX}},
        {"rem", {400, OpInfo::YFX}}, {"**", {200, OpInfo::XFX}},   {"^", {200, OpInfo::XFY}},
        {"@", {200, OpInfo::XFX}},
    };
    auto it = ops.find(name);
    return it == ops.end() ? nullptr : &it->second;
}

const OpInfo* prefix_op(const std::string& name) {
    static const std::unordered_map<std::string, OpInfo> ops = {
        {":-", {1200, OpInfo::FX}}, {"\\+", {900, OpInfo::FY}}, {"-", {200, OpInfo::FY}}, {"+", {200, OpInfo::FY}}};
    auto it = ops.find(name);
    return it == ops.end() ? nullptr : &it->second;
}

namespace {

bool plain_atom(const std::string& s) {
    if (s.empty()) return false;
    if (s == "[]" || s == "!" || s == ";" || s == "{}") return true;
    if (std::islower(static_cast<unsigned char>(s[0]))) {
        for (char c : s)
            if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
        return true;
    }
    static const std::string sym = "+-*/\\^<>=~:.?@#&$";
    for (char c : s)
        if (sym.find(c) == std::string::npos) return false;
    return true;
}

std::string atom_text(const std::string& s) {
    if (plain_atom(s)) return s;
    std::string out = "'";
    for (char c : s) {
        if (c == '\'' || c == '\\') out += '\\';
        out += c;
    }
    return out + "'";
}

void print(const Term& t, int maxprec, std::string& out) {
    switch (t.kind()) {
    case Term::Kind::Int:
        if (t.int_value() < 0 && maxprec < 200) {
            out += "(" + std::to_string(t.int_value()) + ")";
        } else {
            out += std::to_string(t.int_value());
        }
        return;
    case Term::Kind::Var:
        out += t.name().empty() ? "_G" + std::to_string(t.var_id()) : t.name();
        return;
    case Term::Kind::List:
        out += '[';
        for (std::size_t i = 0; i < t.arity(); ++i) {
            if (i) out += ", ";
            print(t.arg(i), 999, out);
        }
        out += ']';
        return;
    case Term::Kind::Atom: break;
    }
    const std::string& f = t.name();
    if (f == "{}" && t.arity() == 1) {
        out += '{';
        print(t.arg(0), 1200, out);
        out += '}';
        return;
    }
    if (t.arity() == 2) {
        if (const OpInfo* op = infix_op(f)) {
            int lp = op->type == OpInfo::YFX ? op->prec : op->prec - 1;
            int rp = op->type == OpInfo::XFY ? op->prec : op->prec - 1;
            bool paren = op->prec > maxprec;
            if (paren) out += '(';
            print(t.arg(0), lp, out);
            if (f == ",") {
                out += ", ";
            } else if (f == "^" || f == "@") {
                out += f;
            } else {
                out += ' ' + f + ' ';
            }
            // Tight operators keep anything but a plain operand in parentheses so it reads back as one token.
            const Term& r = t.arg(1);
            bool simple = r.is_var() || (r.is_int() && r.int_value() >= 0) || (r.is_atom() && !infix_op(r.name()));
            if ((f == "^" || f == "@") && !simple)
                print(r, 0, out);
            else
                print(r, rp, out);
            if (paren) out += ')';
            return;
        }
    }
    out += atom_text(f);
    if (t.arity() == 0) return;
    out += '(';
    for (std::size_t i = 0; i < t.arity(); ++i) {
        if (i) out += ',';
        print(t.arg(i), 999, out);
    }
    out += ')';
}

} // namespace

std::string Term::to_string() const {
    std::string out;
    print(*this, 1200, out);
    return out;
}

} // namespace bplan::frontend
