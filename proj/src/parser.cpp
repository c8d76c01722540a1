#include "orsplit/parser.hpp"

#include <cctype>
#include <map>
#include <sstream>

namespace orsplit {

const std::vector<uint32_t> Program::kNoClauses;

const std::vector<uint32_t>& Program::candidates(PredKey key) const {
    auto it = index_.find(key);
    return it == index_.end() ? kNoClauses : it->second;
}

uint32_t Program::add_clause(Clause c) {
    uint32_t idx = static_cast<uint32_t>(clauses_.size());
    PredKey key = pred_key(c.head);
    index_[key].push_back(idx);
    first_args_.push_back(FirstArg::of_head(c.head));
    clauses_.push_back(std::move(c));
    return idx;
}

FirstArg FirstArg::of_head(Term head) {
    FirstArg fa;
    if (head->tag != Tag::Struct) return fa;
    Term arg = head->args[0];
    if (arg->tag == Tag::Var) return fa;
    fa.any = false;
    fa.tag = arg->tag;
    switch (arg->tag) {
        case Tag::Int: fa.ival = arg->ival; break;
        case Tag::Atom: fa.functor = arg->functor; break;
        case Tag::Struct:
            fa.functor = arg->functor;
            fa.arity = arg->arity;
            break;
        default: break;
    }
    return fa;
}

bool FirstArg::admits(Term goal_arg) const {
    if (any || goal_arg->tag == Tag::Var) return true;
    if (goal_arg->tag != tag) return false;
    switch (tag) {
        case Tag::Int: return goal_arg->ival == ival;
        case Tag::Atom: return goal_arg->functor == functor;
        case Tag::Struct: return goal_arg->functor == functor && goal_arg->arity == arity;
        default: return true;
    }
}

PredKey pred_key(Term goal) {
    if (goal->tag == Tag::Atom) return {goal->functor, 0};
    return {goal->functor, goal->arity};
}

namespace {

enum class Tok {
    Atom,     // lowercase identifier, or 'is'/'mod' (also usable as operators)
    Var,      // Uppercase/underscore identifier
    Int,
    Op,       // symbolic operator, text carried in sym
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Bar,
    End,      // clause-terminating period
    Eof,
};

struct Token {
    Tok kind;
    std::string text;
    int64_t ival = 0;
    int line = 1, col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(tok_.line, tok_.col, msg); }

private:
    std::string_view src_;
    size_t pos_ = 0;
    int line_ = 1, col_ = 1;
    Token tok_;

    int cur() const { return pos_ < src_.size() ? static_cast<unsigned char>(src_[pos_]) : -1; }
    int lookahead(size_t k = 1) const {
        return pos_ + k < src_.size() ? static_cast<unsigned char>(src_[pos_ + k]) : -1;
    }
    void bump() {
        if (cur() == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_layout() {
        for (;;) {
            int c = cur();
            if (c == '%') {
                while (cur() != -1 && cur() != '\n') bump();
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                bump();
            } else {
                return;
            }
        }
    }

    static bool ident_char(int c) { return std::isalnum(c) || c == '_'; }
    static bool sym_char(int c) {
        return c == '+' || c == '-' || c == '*' || c == '/' || c == '\\' || c == '=' || c == '<' ||
               c == '>' || c == ':';
    }

    void advance() {
        skip_layout();
        tok_ = Token{};
        tok_.line = line_;
        tok_.col = col_;
        int c = cur();
        if (c == -1) {
            tok_.kind = Tok::Eof;
            return;
        }
        if (c == '.') {
            int n = lookahead();
            if (n == -1 || std::isspace(n) || n == '%') {
                bump();
                tok_.kind = Tok::End;
                return;
            }
            // '.' as a symbol would be the list constructor; not in the subset
            throw ParseError(line_, col_, "unexpected '.'");
        }
        if (std::isdigit(c)) {
            int64_t v = 0;
            while (std::isdigit(cur())) {
                v = v * 10 + (cur() - '0');
                bump();
            }
            tok_.kind = Tok::Int;
            tok_.ival = v;
            return;
        }
        if (std::islower(c)) {
            std::string s;
            while (ident_char(cur())) {
                s += static_cast<char>(cur());
                bump();
            }
            tok_.kind = Tok::Atom;
            tok_.text = std::move(s);
            return;
        }
        if (std::isupper(c) || c == '_') {
            std::string s;
            while (ident_char(cur())) {
                s += static_cast<char>(cur());
                bump();
            }
            tok_.kind = Tok::Var;
            tok_.text = std::move(s);
            return;
        }
        switch (c) {
            case '(': bump(); tok_.kind = Tok::LParen; return;
            case ')': bump(); tok_.kind = Tok::RParen; return;
            case '[': bump(); tok_.kind = Tok::LBracket; return;
            case ']': bump(); tok_.kind = Tok::RBracket; return;
            case ',': bump(); tok_.kind = Tok::Comma; return;
            case '|': bump(); tok_.kind = Tok::Bar; return;
            default: break;
        }
        if (sym_char(c)) {
            std::string s;
            while (sym_char(cur())) {
                s += static_cast<char>(cur());
                bump();
            }
            tok_.kind = Tok::Op;
            tok_.text = std::move(s);
            return;
        }
        throw ParseError(line_, col_, "unexpected character");
    }
};

class TermParser {
public:
    TermParser(Lexer& lex, TermArena& arena) : lex_(lex), arena_(arena) {}

    std::vector<std::string> var_names;

    Term parse_goal() { return expr700(); }

    Term expr700() {
        Term lhs = expr500();
        const Token& t = lex_.peek();
        Symbol op;
        if (t.kind == Tok::Op && is_cmp_op(t.text)) {
            op = intern(t.text);
        } else if (t.kind == Tok::Atom && t.text == "is") {
            op = WellKnown::get().is_;
        } else {
            return lhs;
        }
        lex_.take();
        Term rhs = expr500();
        Term args[2] = {lhs, rhs};
        return arena_.make(op, args);
    }

    Term expr500() {
        Term acc = expr400();
        for (;;) {
            const Token& t = lex_.peek();
            if (t.kind != Tok::Op || (t.text != "+" && t.text != "-")) return acc;
            Symbol op = intern(lex_.take().text);
            Term rhs = expr400();
            Term args[2] = {acc, rhs};
            acc = arena_.make(op, args);
        }
    }

    Term expr400() {
        Term acc = primary();
        for (;;) {
            const Token& t = lex_.peek();
            Symbol op;
            if (t.kind == Tok::Op && (t.text == "*" || t.text == "//")) {
                op = intern(t.text);
            } else if (t.kind == Tok::Atom && t.text == "mod") {
                op = WellKnown::get().mod_;
            } else {
                return acc;
            }
            lex_.take();
            Term rhs = primary();
            Term args[2] = {acc, rhs};
            acc = arena_.make(op, args);
        }
    }

    Term primary() {
        const Token& t = lex_.peek();
        switch (t.kind) {
            case Tok::Int: return arena_.integer(lex_.take().ival);
            case Tok::Op:
                if (t.text == "-") {  // negative literal
                    lex_.take();
                    if (lex_.peek().kind != Tok::Int) lex_.fail("expected integer after '-'");
                    return arena_.integer(-lex_.take().ival);
                }
                lex_.fail("unexpected operator");
            case Tok::Var: {
                Token v = lex_.take();
                return arena_.variable(var_id(v.text));
            }
            case Tok::Atom: {
                Token a = lex_.take();
                Symbol f = intern(a.text);
                if (lex_.peek().kind == Tok::LParen) {
                    lex_.take();
                    std::vector<Term> args;
                    args.push_back(expr700());
                    while (lex_.peek().kind == Tok::Comma) {
                        lex_.take();
                        args.push_back(expr700());
                    }
                    expect(Tok::RParen, "expected ')'");
                    return arena_.make(f, args);
                }
                return arena_.atom(f);
            }
            case Tok::LParen: {
                lex_.take();
                Term inner = expr700();
                expect(Tok::RParen, "expected ')'");
                return inner;
            }
            case Tok::LBracket: return list();
            default: lex_.fail("expected a term");
        }
    }

    Term list() {
        expect(Tok::LBracket, "expected '['");
        const WellKnown& wk = WellKnown::get();
        if (lex_.peek().kind == Tok::RBracket) {
            lex_.take();
            return arena_.atom(wk.nil);
        }
        std::vector<Term> items;
        items.push_back(expr700());
        while (lex_.peek().kind == Tok::Comma) {
            lex_.take();
            items.push_back(expr700());
        }
        Term tail;
        if (lex_.peek().kind == Tok::Bar) {
            lex_.take();
            tail = expr700();
        } else {
            tail = arena_.atom(wk.nil);
        }
        expect(Tok::RBracket, "expected ']'");
        for (auto it = items.rbegin(); it != items.rend(); ++it) {
            Term cell[2] = {*it, tail};
            tail = arena_.make(wk.dot, cell);
        }
        return tail;
    }

    void expect(Tok kind, const char* msg) {
        if (lex_.peek().kind != kind) lex_.fail(msg);
        lex_.take();
    }

    void reset_vars() {
        vars_.clear();
        var_names.clear();
    }

private:
    Lexer& lex_;
    TermArena& arena_;
    std::map<std::string, uint64_t> vars_;

    uint64_t var_id(const std::string& name) {
        if (name == "_") {
            uint64_t id = var_names.size();
            var_names.push_back("_");
            return id;
        }
        auto it = vars_.find(name);
        if (it != vars_.end()) return it->second;
        uint64_t id = var_names.size();
        vars_.emplace(name, id);
        var_names.push_back(name);
        return id;
    }

    static bool is_cmp_op(const std::string& s) {
        return s == "=" || s == "==" || s == "\\==" || s == "<" || s == ">" || s == "=<" ||
               s == ">=" || s == "=:=" || s == "=\\=";
    }
};

}  // namespace

std::shared_ptr<Program> parse_program(std::string_view text) {
    auto prog = std::make_shared<Program>();
    Lexer lex(text);
    TermParser tp(lex, prog->arena());
    while (lex.peek().kind != Tok::Eof) {
        tp.reset_vars();
        if (lex.peek().kind == Tok::Op && lex.peek().text == ":-") {
            // directive
            lex.take();
            const Token& t = lex.peek();
            if (t.kind != Tok::Atom || t.text != "parallel") lex.fail("unsupported directive");
            lex.take();
            if (lex.peek().kind != Tok::Atom) lex.fail("expected predicate name");
            Symbol f = intern(lex.take().text);
            if (lex.peek().kind != Tok::Op || lex.peek().text != "/") lex.fail("expected '/'");
            lex.take();
            if (lex.peek().kind != Tok::Int) lex.fail("expected arity");
            uint32_t arity = static_cast<uint32_t>(lex.take().ival);
            tp.expect(Tok::End, "expected '.' after directive");
            prog->declare_parallel({f, arity});
            continue;
        }
        Term head = tp.primary();
        if (head->tag != Tag::Atom && head->tag != Tag::Struct)
            lex.fail("clause head must be an atom or compound");
        Clause clause;
        clause.head = head;
        if (lex.peek().kind == Tok::Op && lex.peek().text == ":-") {
            lex.take();
            clause.body.push_back(tp.parse_goal());
            while (lex.peek().kind == Tok::Comma) {
                lex.take();
                clause.body.push_back(tp.parse_goal());
            }
        }
        tp.expect(Tok::End, "expected '.' at end of clause");
        clause.var_count = static_cast<uint32_t>(tp.var_names.size());
        clause.var_names = tp.var_names;
        prog->add_clause(std::move(clause));
    }
    return prog;
}

Query parse_query(Program& program, std::string_view text) {
    Lexer lex(text);
    TermParser tp(lex, program.arena());
    Query q;
    if (lex.peek().kind == Tok::Eof) lex.fail("empty query");
    q.goals.push_back(tp.parse_goal());
    while (lex.peek().kind == Tok::Comma) {
        lex.take();
        q.goals.push_back(tp.parse_goal());
    }
    tp.expect(Tok::End, "expected '.' at end of query");
    if (lex.peek().kind != Tok::Eof) lex.fail("trailing input after query");
    q.var_names = tp.var_names;
    q.var_count = static_cast<uint32_t>(q.var_names.size());
    return q;
}

namespace {

bool infix_op(Symbol f, uint32_t arity) {
    if (arity != 2) return false;
    const WellKnown& wk = WellKnown::get();
    return f == wk.is_ || f == wk.unify || f == wk.eq || f == wk.neq || f == wk.lt ||
           f == wk.gt || f == wk.le || f == wk.ge || f == wk.aeq || f == wk.ane ||
           f == wk.plus || f == wk.minus || f == wk.star || f == wk.intdiv || f == wk.mod_;
}

void print_rec(std::ostream& os, Term t, const std::vector<std::string>& names, bool parens) {
    switch (t->tag) {
        case Tag::Int: os << t->ival; return;
        case Tag::Atom: os << symbol_name(t->functor); return;
        case Tag::Var: {
            uint64_t id = t->var_id();
            if (id < names.size() && names[id] != "_")
                os << names[id];
            else
                os << "_G" << id;
            return;
        }
        case Tag::Struct: break;
    }
    if (is_list_cell(t)) {
        os << '[';
        print_rec(os, t->args[0], names, false);
        Term tail = t->args[1];
        while (is_list_cell(tail)) {
            os << ',';
            print_rec(os, tail->args[0], names, false);
            tail = tail->args[1];
        }
        if (!is_nil(tail)) {
            os << '|';
            print_rec(os, tail, names, false);
        }
        os << ']';
        return;
    }
    if (infix_op(t->functor, t->arity)) {
        if (parens) os << '(';
        print_rec(os, t->args[0], names, true);
        os << ' ' << symbol_name(t->functor) << ' ';
        print_rec(os, t->args[1], names, true);
        if (parens) os << ')';
        return;
    }
    const std::string& fname = symbol_name(t->functor);
    os << fname << '(';
    for (uint32_t i = 0; i < t->arity; ++i) {
        if (i) os << ',';
        print_rec(os, t->args[i], names, false);
    }
    os << ')';
}

}  // namespace

std::string print_term(Term t, const std::vector<std::string>& var_names) {
    std::ostringstream os;
    print_rec(os, t, var_names, false);
    return os.str();
}

std::string print_program(const Program& program) {
    std::ostringstream os;
    for (const PredKey& key : program.parallel_predicates())
        os << ":- parallel " << symbol_name(key.functor) << "/" << key.arity << ".\n";
    for (const Clause& c : program.clauses()) {
        print_rec(os, c.head, c.var_names, false);
        if (!c.body.empty()) {
            os << " :- ";
            for (size_t i = 0; i < c.body.size(); ++i) {
                if (i) os << ", ";
                print_rec(os, c.body[i], c.var_names, true);
            }
        }
        os << ".\n";
    }
    return os.str();
}

}  // namespace orsplit
