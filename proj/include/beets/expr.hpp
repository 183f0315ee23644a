#ifndef BEETS_EXPR_HPP
#define BEETS_EXPR_HPP

#include <map>
#include <memory>
#include <string>
#include <variant>

#include "beets/codec.hpp"

namespace beets {

// Scalar result of an expression: boolean, number or string.
using Scalar = std::variant<bool, double, std::string>;

bool scalar_truthy(const Scalar& s);
std::string scalar_to_string(const Scalar& s);
Value scalar_to_value(const Scalar& s);  // numbers via classify_value
Scalar value_to_scalar(const Value& v);

// Evaluation context: named scalars plus an optional event tuple
// addressed as t[1]..t[4].
struct ExprEnv {
    std::map<std::string, Scalar> vars;
    const Tuple* tuple = nullptr;
};

// A parsed expression. Grammar: literals (numbers, 'strings'),
// identifiers, t[i], abs(), unary -, + - * /, comparisons, and/or/not,
// parentheses.
class Expr {
public:
    static Expr parse(const std::string& text);

    Scalar eval(const ExprEnv& env) const;
    const std::string& text() const { return text_; }

    struct Node;

private:
    std::string text_;
    std::shared_ptr<const Node> root_;
};

}  // namespace beets

#endif
