#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace bplan::frontend {

struct SourcePos {
    int line = 0;
    int col = 0;
};

class FrontendError : public std::runtime_error {
public:
    FrontendError(SourcePos pos, const std::string& msg)
        : std::runtime_error(pos.line > 0 ? std::to_string(pos.line) + ":" + std::to_string(pos.col) + ": " + msg : msg),
          pos_(pos) {}
    SourcePos pos() const { return pos_; }

private:
    SourcePos pos_;
};

// Immutable Prolog term. Lists are stored flat (no tails); {T} is the
// compound '{}'(T).
class Term {
public:
    enum class Kind : std::uint8_t { Int, Atom, Var, List };

    Term() = default;
    static Term integer(std::int64_t v);
    static Term atom(std::string name, std::vector<Term> args = {});
    static Term var(int id, std::string name = {});
    static Term list(std::vector<Term> elems);

    bool valid() const { return static_cast<bool>(d_); }
    Kind kind() const { return d_->kind; }
    bool is_int() const { return d_->kind == Kind::Int; }
    bool is_atom() const { return d_->kind == Kind::Atom; }
    bool is_var() const { return d_->kind == Kind::Var; }
    bool is_list() const { return d_->kind == Kind::List; }
    std::int64_t int_value() const { return d_->ival; }
    const std::string& name() const { return d_->name; }
    int var_id() const { return d_->var; }
    std::size_t arity() const { return d_->args.size(); }
    const std::vector<Term>& args() const { return d_->args; }
    const Term& arg(std::size_t i) const { return d_->args[i]; }
    bool is(const std::string& functor, std::size_t n) const {
        return is_atom() && d_->name == functor && d_->args.size() == n;
    }
    bool ground() const;

    // Structural identity (variables compare by id).
    bool operator==(const Term& o) const;
    bool same_node(const Term& o) const { return d_ == o.d_; }

    std::string to_string() const;

private:
    struct Data {
        Kind kind;
        std::int64_t ival = 0;
        int var = -1;
        std::string name;
        std::vector<Term> args;
    };
    std::shared_ptr<const Data> d_;
};

// Operator table shared by the parser and the printer.
struct OpInfo {
    int prec;
    enum Type { XFX, XFY, YFX, FY, FX } type;
};
const OpInfo* infix_op(const std::string& name);
const OpInfo* prefix_op(const std::string& name);

} // namespace bplan::frontend
