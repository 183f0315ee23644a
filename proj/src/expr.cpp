#include "beets/expr.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace beets {

bool scalar_truthy(const Scalar& s) {
    switch (s.index()) {
        case 0: return std::get<bool>(s);
        case 1: return std::get<double>(s) != 0.0;
        default: return !std::get<std::string>(s).empty();
    }
}

std::string scalar_to_string(const Scalar& s) {
    switch (s.index()) {
        case 0: return std::get<bool>(s) ? "true" : "false";
        case 1: {
            double d = std::get<double>(s);
            if (d == std::floor(d) && std::abs(d) < 1e15) {
                std::ostringstream os;
                os << static_cast<long long>(d);
                return os.str();
            }
            std::ostringstream os;
            os << d;
            return os.str();
        }
        default: return std::get<std::string>(s);
    }
}

Value scalar_to_value(const Scalar& s) {
    switch (s.index()) {
        case 0: return classify_value(std::get<bool>(s) ? 1 : 0);
        case 1: return classify_value(std::get<double>(s));
        default: return Value(std::get<std::string>(s));
    }
}

Scalar value_to_scalar(const Value& v) {
    switch (v.index()) {
        case 1: return Scalar(std::get<std::string>(v));
        case 2: return Scalar(static_cast<double>(std::get<std::int16_t>(v)));
        case 3: return Scalar(static_cast<double>(std::get<float>(v)));
        default: throw std::runtime_error("formal has no scalar value");
    }
}

namespace {

enum class Tok { Num, Str, Ident, Op, LParen, RParen, LBracket, RBracket, End };

struct Token {
    Tok kind;
    std::string text;
    double num = 0;
    std::size_t pos = 0;
};

std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            std::size_t end;
            double v = std::stod(s.substr(i), &end);
            out.push_back({Tok::Num, s.substr(i, end), v, start});
            i += end;
        } else if (c == '\'') {
            std::string lit;
            ++i;
            while (i < s.size() && s[i] != '\'') lit.push_back(s[i++]);
            if (i >= s.size()) throw std::runtime_error("unterminated string literal at " + std::to_string(start));
            ++i;
            out.push_back({Tok::Str, lit, 0, start});
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            out.push_back({Tok::Ident, s.substr(i, j - i), 0, start});
            i = j;
        } else if (c == '(') {
            out.push_back({Tok::LParen, "(", 0, start});
            ++i;
        } else if (c == ')') {
            out.push_back({Tok::RParen, ")", 0, start});
            ++i;
        } else if (c == '[') {
            out.push_back({Tok::LBracket, "[", 0, start});
            ++i;
        } else if (c == ']') {
            out.push_back({Tok::RBracket, "]", 0, start});
            ++i;
        } else {
            static const char* two[] = {"<=", ">=", "==", "!="};
            std::string op;
            for (const char* t : two)
                if (s.compare(i, 2, t) == 0) op = t;
            if (op.empty()) {
                if (std::string("+-*/<>").find(c) == std::string::npos)
                    throw std::runtime_error(std::string("bad character '") + c + "' at " + std::to_string(start));
                op = std::string(1, c);
            }
            out.push_back({Tok::Op, op, 0, start});
            i += op.size();
        }
    }
    out.push_back({Tok::End, "", 0, s.size()});
    return out;
}

}  // namespace

struct Expr::Node {
    enum Kind { Lit, Var, TupleIdx, Unary, Binary, Abs } kind;
    Scalar lit;
    std::string name;  // Var name or operator
    int index = 0;     // TupleIdx, 1-based
    std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

class Parser {
public:
    explicit Parser(const std::string& s) : toks_(tokenize(s)) {}

    NodePtr parse() {
        NodePtr e = parse_or();
        expect(Tok::End, "end of expression");
        return e;
    }

private:
    const Token& cur() const { return toks_[i_]; }
    void advance() { ++i_; }
    bool accept_op(const std::string& op) {
        if (cur().kind == Tok::Op && cur().text == op) {
            advance();
            return true;
        }
        return false;
    }
    bool accept_ident(const std::string& id) {
        if (cur().kind == Tok::Ident && cur().text == id) {
            advance();
            return true;
        }
        return false;
    }
    void expect(Tok kind, const std::string& what) {
        if (cur().kind != kind)
            throw std::runtime_error("expected " + what + " at " + std::to_string(cur().pos));
        advance();
    }
    static NodePtr binary(std::string op, NodePtr a, NodePtr b) {
        auto n = std::make_shared<Expr::Node>();
        n->kind = Expr::Node::Binary;
        n->name = std::move(op);
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    NodePtr parse_or() {
        NodePtr e = parse_and();
        while (accept_ident("or")) e = binary("or", e, parse_and());
        return e;
    }
    NodePtr parse_and() {
        NodePtr e = parse_not();
        while (accept_ident("and")) e = binary("and", e, parse_not());
        return e;
    }
    NodePtr parse_not() {
        if (accept_ident("not")) {
            auto n = std::make_shared<Expr::Node>();
            n->kind = Expr::Node::Unary;
            n->name = "not";
            n->a = parse_not();
            return n;
        }
        return parse_cmp();
    }
    NodePtr parse_cmp() {
        NodePtr e = parse_add();
        for (const char* op : {"<=", ">=", "==", "!=", "<", ">"})
            if (cur().kind == Tok::Op && cur().text == op) {
                advance();
                return binary(op, e, parse_add());
            }
        return e;
    }
    NodePtr parse_add() {
        NodePtr e = parse_mul();
        while (true) {
            if (accept_op("+"))
                e = binary("+", e, parse_mul());
            else if (accept_op("-"))
                e = binary("-", e, parse_mul());
            else
                return e;
        }
    }
    NodePtr parse_mul() {
        NodePtr e = parse_unary();
        while (true) {
            if (accept_op("*"))
                e = binary("*", e, parse_unary());
            else if (accept_op("/"))
                e = binary("/", e, parse_unary());
            else
                return e;
        }
    }
    NodePtr parse_unary() {
        if (accept_op("-")) {
            auto n = std::make_shared<Expr::Node>();
            n->kind = Expr::Node::Unary;
            n->name = "-";
            n->a = parse_unary();
            return n;
        }
        return parse_primary();
    }
    NodePtr parse_primary() {
        auto n = std::make_shared<Expr::Node>();
        const Token& t = cur();
        switch (t.kind) {
            case Tok::Num:
                n->kind = Expr::Node::Lit;
                n->lit = Scalar(t.num);
                advance();
                return n;
            case Tok::Str:
                n->kind = Expr::Node::Lit;
                n->lit = Scalar(t.text);
                advance();
                return n;
            case Tok::LParen: {
                advance();
                NodePtr e = parse_or();
                expect(Tok::RParen, "')'");
                return e;
            }
            case Tok::Ident: {
                std::string name = t.text;
                advance();
                if (name == "abs") {
                    expect(Tok::LParen, "'('");
                    n->kind = Expr::Node::Abs;
                    n->a = parse_or();
                    expect(Tok::RParen, "')'");
                    return n;
                }
                if (name == "true" || name == "false") {
                    n->kind = Expr::Node::Lit;
                    n->lit = Scalar(name == "true");
                    return n;
                }
                if (name == "t" && cur().kind == Tok::LBracket) {
                    advance();
                    if (cur().kind != Tok::Num)
                        throw std::runtime_error("expected tuple index at " + std::to_string(cur().pos));
                    n->kind = Expr::Node::TupleIdx;
                    n->index = static_cast<int>(cur().num);
                    advance();
                    expect(Tok::RBracket, "']'");
                    return n;
                }
                n->kind = Expr::Node::Var;
                n->name = name;
                return n;
            }
            default:
                throw std::runtime_error("unexpected token at " + std::to_string(t.pos));
        }
    }

    std::vector<Token> toks_;
    std::size_t i_ = 0;
};

double as_number(const Scalar& s, const char* op) {
    if (std::holds_alternative<double>(s)) return std::get<double>(s);
    if (std::holds_alternative<bool>(s)) return std::get<bool>(s) ? 1.0 : 0.0;
    throw std::runtime_error(std::string("string operand for '") + op + "'");
}

Scalar eval_node(const Expr::Node& n, const ExprEnv& env) {
    using Node = Expr::Node;
    switch (n.kind) {
        case Node::Lit:
            return n.lit;
        case Node::Var: {
            auto it = env.vars.find(n.name);
            if (it == env.vars.end())
                throw std::runtime_error("undefined identifier '" + n.name + "'");
            return it->second;
        }
        case Node::TupleIdx: {
            if (!env.tuple) throw std::runtime_error("no tuple in scope");
            if (n.index < 1 || static_cast<std::size_t>(n.index) > env.tuple->size())
                throw std::runtime_error("tuple index " + std::to_string(n.index) + " out of range");
            return value_to_scalar((*env.tuple)[n.index - 1]);
        }
        case Node::Unary: {
            Scalar a = eval_node(*n.a, env);
            if (n.name == "not") return Scalar(!scalar_truthy(a));
            return Scalar(-as_number(a, "-"));
        }
        case Node::Abs:
            return Scalar(std::abs(as_number(eval_node(*n.a, env), "abs")));
        case Node::Binary: {
            if (n.name == "and") {
                if (!scalar_truthy(eval_node(*n.a, env))) return Scalar(false);
                return Scalar(scalar_truthy(eval_node(*n.b, env)));
            }
            if (n.name == "or") {
                if (scalar_truthy(eval_node(*n.a, env))) return Scalar(true);
                return Scalar(scalar_truthy(eval_node(*n.b, env)));
            }
            Scalar a = eval_node(*n.a, env);
            Scalar b = eval_node(*n.b, env);
            bool strings = std::holds_alternative<std::string>(a) &&
                           std::holds_alternative<std::string>(b);
            if (n.name == "==") {
                if (strings) return Scalar(std::get<std::string>(a) == std::get<std::string>(b));
                if (std::holds_alternative<std::string>(a) || std::holds_alternative<std::string>(b))
                    return Scalar(false);
                return Scalar(as_number(a, "==") == as_number(b, "=="));
            }
            if (n.name == "!=") {
                if (strings) return Scalar(std::get<std::string>(a) != std::get<std::string>(b));
                if (std::holds_alternative<std::string>(a) || std::holds_alternative<std::string>(b))
                    return Scalar(true);
                return Scalar(as_number(a, "!=") != as_number(b, "!="));
            }
            double x = as_number(a, n.name.c_str());
            double y = as_number(b, n.name.c_str());
            if (n.name == "+") return Scalar(x + y);
            if (n.name == "-") return Scalar(x - y);
            if (n.name == "*") return Scalar(x * y);
            if (n.name == "/") {
                if (y == 0.0) throw std::runtime_error("division by zero");
                return Scalar(x / y);
            }
            if (n.name == "<") return Scalar(x < y);
            if (n.name == "<=") return Scalar(x <= y);
            if (n.name == ">") return Scalar(x > y);
            if (n.name == ">=") return Scalar(x >= y);
            throw std::runtime_error("bad operator " + n.name);
        }
    }
    throw std::runtime_error("bad expression node");
}

}  // namespace

Expr Expr::parse(const std::string& text) {
    Expr e;
    e.text_ = text;
    e.root_ = Parser(text).parse();
    return e;
}

Scalar Expr::eval(const ExprEnv& env) const {
    if (!root_) throw std::runtime_error("empty expression");
    return eval_node(*root_, env);
}

}  // namespace beets
