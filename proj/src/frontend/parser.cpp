#include "bplan/frontend/parser.hpp"

#include <cctype>
#include <map>

namespace bplan::frontend {

namespace {

struct Token {
    enum Kind { Int, Name, Var, Punct, End, Eof } kind = Eof;
    std::string text;
    std::int64_t ival = 0;
    SourcePos pos;
    bool functional = false; // name immediately followed by '('
};

const std::string kSymbolChars = "+-*/\\^<>=~:.?@#&$";

class Lexer {
public:
    explicit Lexer(std::string_view src) : s_(src) {}

    Token next() {
        skip_layout();
        Token t;
        t.pos = {line_, col_};
        if (i_ >= s_.size()) return t;
        char c = s_[i_];
        unsigned char uc = static_cast<unsigned char>(c);
        if (std::isdigit(uc)) {
            std::size_t st = i_;
            while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) advance();
            t.kind = Token::Int;
            t.text = std::string(s_.substr(st, i_ - st));
            try {
                t.ival = std::stoll(t.text);
            } catch (...) {
                throw FrontendError(t.pos, "integer literal out of range: " + t.text);
            }
            return t;
        }
        if (std::isalpha(uc) || c == '_') {
            std::size_t st = i_;
            while (i_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_')) advance();
            t.text = std::string(s_.substr(st, i_ - st));
            t.kind = (std::isupper(uc) || c == '_') ? Token::Var : Token::Name;
            mark_functional(t);
            return t;
        }
        if (c == '\'') {
            advance();
            std::string out;
            for (;;) {
                if (i_ >= s_.size()) throw FrontendError(t.pos, "unterminated quoted atom");
                char d = s_[i_];
                advance();
                if (d == '\\' && i_ < s_.size()) {
                    out += s_[i_];
                    advance();
                } else if (d == '\'') {
                    if (i_ < s_.size() && s_[i_] == '\'') {
                        out += '\'';
                        advance();
                    } else {
                        break;
                    }
                } else {
                    out += d;
                }
            }
            t.kind = Token::Name;
            t.text = out;
            mark_functional(t);
            return t;
        }
        if (std::string("()[]{},|").find(c) != std::string::npos) {
            advance();
            t.kind = Token::Punct;
            t.text = std::string(1, c);
            return t;
        }
        if (c == '!' || c == ';') {
            advance();
            t.kind = Token::Name;
            t.text = std::string(1, c);
            mark_functional(t);
            return t;
        }
        if (c == '.') {
            char n = i_ + 1 < s_.size() ? s_[i_ + 1] : ' ';
            if (std::isspace(static_cast<unsigned char>(n)) || n == '%') {
                advance();
                t.kind = Token::End;
                return t;
            }
        }
        // UTF-8 comparison symbols map onto their ASCII operators.
        static const std::map<std::string, std::string> utf = {
            {"\xE2\x89\xA4", "=<"}, {"\xE2\x89\xA5", ">="}, {"\xE2\x89\xA0", "\\="}};
        for (const auto& [k, v] : utf) {
            if (s_.substr(i_, k.size()) == k) {
                i_ += k.size();
                col_ += 1;
                t.kind = Token::Name;
                t.text = v;
                mark_functional(t);
                return t;
            }
        }
        if (kSymbolChars.find(c) != std::string::npos) {
            std::size_t st = i_;
            while (i_ < s_.size() && kSymbolChars.find(s_[i_]) != std::string::npos) {
                // Stop before a clause-ending full stop.
                if (s_[i_] == '.' && i_ > st) {
                    char n = i_ + 1 < s_.size() ? s_[i_ + 1] : ' ';
                    if (std::isspace(static_cast<unsigned char>(n)) || n == '%') break;
                }
                advance();
            }
            t.kind = Token::Name;
            t.text = std::string(s_.substr(st, i_ - st));
            mark_functional(t);
            return t;
        }
        throw FrontendError(t.pos, std::string("unexpected character '") + c + "'");
    }

private:
    void advance() {
        if (s_[i_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++i_;
    }
    void skip_layout() {
        for (;;) {
            while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) advance();
            if (i_ < s_.size() && s_[i_] == '%') {
                while (i_ < s_.size() && s_[i_] != '\n') advance();
                continue;
            }
            if (i_ + 1 < s_.size() && s_[i_] == '/' && s_[i_ + 1] == '*') {
                SourcePos p{line_, col_};
                advance();
                advance();
                while (i_ + 1 < s_.size() && !(s_[i_] == '*' && s_[i_ + 1] == '/')) advance();
                if (i_ + 1 >= s_.size()) throw FrontendError(p, "unterminated block comment");
                advance();
                advance();
                continue;
            }
            break;
        }
    }
    void mark_functional(Token& t) { t.functional = i_ < s_.size() && s_[i_] == '('; }

    std::string_view s_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { tok_ = lex_.next(); }

    bool at_eof() const { return tok_.kind == Token::Eof; }

    Clause clause() {
        vars_.clear();
        next_var_ = 0;
        Clause c;
        c.pos = tok_.pos;
        Term t = term(1200);
        expect_end();
        if (t.is(":-", 2)) {
            c.head = t.arg(0);
            flatten(t.arg(1), c.body);
        } else {
            c.head = t;
        }
        if (!c.head.is_atom() && !(c.head.is(":-", 1)))
            throw FrontendError(c.pos, "clause head must be an atom or compound term");
        c.num_vars = next_var_;
        return c;
    }

    Term single() {
        vars_.clear();
        next_var_ = 0;
        Term t = term(1200);
        if (tok_.kind == Token::End) tok_ = lex_.next();
        if (tok_.kind != Token::Eof) throw FrontendError(tok_.pos, "unexpected text after term");
        return t;
    }

private:
    static void flatten(const Term& t, std::vector<Term>& out) {
        if (t.is(",", 2)) {
            flatten(t.arg(0), out);
            flatten(t.arg(1), out);
        } else {
            out.push_back(t);
        }
    }

    void expect_end() {
        if (tok_.kind != Token::End) throw FrontendError(tok_.pos, "expected '.' at end of clause, found '" + tok_.text + "'");
        tok_ = lex_.next();
    }

    void expect_punct(const char* p) {
        if (tok_.kind != Token::Punct || tok_.text != p)
            throw FrontendError(tok_.pos, std::string("expected '") + p + "', found '" + tok_.text + "'");
        tok_ = lex_.next();
    }

    bool is_punct(const char* p) const { return tok_.kind == Token::Punct && tok_.text == p; }

    bool starts_term() const {
        switch (tok_.kind) {
        case Token::Int:
        case Token::Var: return true;
        case Token::Name: return tok_.functional || !infix_op(tok_.text) || prefix_op(tok_.text);
        case Token::Punct: return tok_.text == "(" || tok_.text == "[" || tok_.text == "{";
        default: return false;
        }
    }

    std::vector<Term> arglist(const char* close) {
        std::vector<Term> args;
        args.push_back(term(999));
        while (is_punct(",")) {
            tok_ = lex_.next();
            args.push_back(term(999));
        }
        if (is_punct("|")) throw FrontendError(tok_.pos, "list tails are not supported");
        expect_punct(close);
        return args;
    }

    Term primary(int maxprec, int& prec) {
        prec = 0;
        Token t = tok_;
        switch (t.kind) {
        case Token::Int:
            tok_ = lex_.next();
            return Term::integer(t.ival);
        case Token::Var: {
            tok_ = lex_.next();
            if (t.text == "_") return Term::var(next_var_++, "_");
            auto it = vars_.find(t.text);
            if (it == vars_.end()) it = vars_.emplace(t.text, next_var_++).first;
            return Term::var(it->second, t.text);
        }
        case Token::Punct:
            if (t.text == "(") {
                tok_ = lex_.next();
                Term inner = term(1200);
                expect_punct(")");
                return inner;
            }
            if (t.text == "[") {
                tok_ = lex_.next();
                if (is_punct("]")) {
                    tok_ = lex_.next();
                    return Term::list({});
                }
                return Term::list(arglist("]"));
            }
            if (t.text == "{") {
                tok_ = lex_.next();
                Term inner = term(1200);
                expect_punct("}");
                return Term::atom("{}", {inner});
            }
            throw FrontendError(t.pos, "unexpected '" + t.text + "'");
        case Token::Name: {
            tok_ = lex_.next();
            if (t.functional) {
                tok_ = lex_.next(); // '('
                return Term::atom(t.text, arglist(")"));
            }
            if ((t.text == "-" || t.text == "+") && tok_.kind == Token::Int) {
                std::int64_t v = tok_.ival;
                tok_ = lex_.next();
                return Term::integer(t.text == "-" ? -v : v);
            }
            if (const OpInfo* op = prefix_op(t.text); op && starts_term()) {
                int p = op->prec > maxprec ? 999 : op->prec;
                int argmax = op->type == OpInfo::FY ? p : p - 1;
                Term operand = term(argmax);
                prec = p;
                return Term::atom(t.text, {operand});
            }
            return Term::atom(t.text);
        }
        case Token::End: throw FrontendError(t.pos, "unexpected end of clause");
        case Token::Eof: throw FrontendError(t.pos, "unexpected end of input");
        }
        throw FrontendError(t.pos, "unexpected token");
    }

    Term term(int maxprec) {
        int left_prec = 0;
        Term left = primary(maxprec, left_prec);
        for (;;) {
            std::string name;
            if (tok_.kind == Token::Name)
                name = tok_.text;
            else if (is_punct(","))
                name = ",";
            else
                break;
            const OpInfo* op = infix_op(name);
            if (!op || op->prec > maxprec) break;
            int lmax = op->type == OpInfo::YFX ? op->prec : op->prec - 1;
            if (left_prec > lmax) break;
            tok_ = lex_.next();
            int rmax = op->type == OpInfo::XFY ? op->prec : op->prec - 1;
            Term right = term(rmax);
            left = Term::atom(name, {left, right});
            left_prec = op->prec;
        }
        return left;
    }

    Lexer lex_;
    Token tok_;
    std::map<std::string, int> vars_;
    int next_var_ = 0;
};

} // namespace

Program parse_program(std::string_view text) {
    Parser p(text);
    Program prog;
    while (!p.at_eof()) {
        Clause c = p.clause();
        if (c.head.is(":-", 1)) continue; // directives carry no facts
        prog.clauses.push_back(std::move(c));
    }
    return prog;
}

Term parse_term(std::string_view text) {
    Parser p(text);
    return p.single();
}

std::string print_clause(const Clause& c) {
    std::string out = c.head.to_string();
    if (!c.body.empty()) {
        out += " :- ";
        for (std::size_t i = 0; i < c.body.size(); ++i) {
            if (i) out += ", ";
            // Body goals sit below the comma operator.
            std::string g = c.body[i].to_string();
            const OpInfo* op = c.body[i].is_atom() && c.body[i].arity() == 2 ? infix_op(c.body[i].name()) : nullptr;
            out += (op && op->prec >= 1000) ? "(" + g + ")" : g;
        }
    }
    return out + ".";
}

std::string print_program(const Program& p) {
    std::string out;
    for (const auto& c : p.clauses) out += print_clause(c) + "\n";
    return out;
}

} // namespace bplan::frontend
