#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace nafem {

/// Scalar expression over the variables t, x, y.
///
/// Grammar (left associative, unary minus binds tightest):
///
///     expr    := term (('+' | '-') term)*
///     term    := unary (('*' | '/') unary)*
///     unary   := '-' unary | primary
///     primary := number | 't' | 'x' | 'y' | func '(' expr ')' | '(' expr ')'
///     func    := 'sin' | 'cos' | 'exp'
///
/// Expressions are immutable and cheap to copy (shared tree).
class Expression {
public:
    /// The constant 0.
    Expression();

    /// Throws ParseError (with position) on malformed text or unknown identifiers.
    static Expression parse(std::string_view text);
    static Expression constant(double value);

    [[nodiscard]] double operator()(double t, double x, double y = 0.0) const;

    /// Fully parenthesized form; parse(to_string()) reproduces the tree.
    [[nodiscard]] std::string to_string() const;

    [[nodiscard]] bool is_constant() const;
    [[nodiscard]] bool depends_on_time() const;
    [[nodiscard]] bool depends_on_space() const;

    struct Node;

private:
    explicit Expression(std::shared_ptr<const Node> root) : root_(std::move(root)) {}
    std::shared_ptr<const Node> root_;
};

}  // namespace nafem
