#pragma once

// Closed-form scalar expressions in coordinates x1..xn.
//
// Grammar (see docs/expression-grammar.md):
//
//   expr    = term { ("+" | "-") term } ;
//   term    = unary { ("*" | "/") unary } ;
//   unary   = ("-" | "+") unary | power ;
//   power   = primary [ "^" unary ] ;
//   primary = number | variable | "pi" | function "(" expr ")" | "(" expr ")" ;
//
// Expressions are immutable after parsing and safe to evaluate concurrently.

#include "solitonlab/jet.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace solitonlab {

enum class Op : std::uint8_t
{
    Constant,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Neg,
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Coth,
    Sqrt,
    Abs,
};

struct ExprNode
{
    Op op = Op::Constant;
    bool constant = true; ///< subtree has no variables
    int var = -1;         ///< zero-based variable index for Op::Variable
    int lhs = -1;         ///< child indices into the node array
    int rhs = -1;
    double value = 0.0;   ///< literal for Op::Constant
};

class Expression
{
public:
    Expression();

    /// Number of coordinates the expression needs (largest xK index).
    int arity() const noexcept { return arity_; }
    bool is_constant() const noexcept { return node(root_).constant; }

    /// Value-only evaluation.
    double evaluate(std::span<const double> point) const;

    /// Value, gradient and Hessian with respect to all `point.size()` coordinates.
    JetValue eval_jet(std::span<const double> point) const;

    /// Same as eval_jet, but differentiates with respect to `dim` coordinates
    /// while reading only the first `dim` entries of point.
    JetValue eval_jet(std::span<const double> point, int dim) const;

    /// Fully parenthesised text that parses back to an identical tree.
    std::string to_string() const;

    friend bool operator==(const Expression& a, const Expression& b);

    const std::vector<ExprNode>& nodes() const noexcept { return *nodes_; }
    int root() const noexcept { return root_; }

private:
    friend class Parser;
    Expression(std::shared_ptr<const std::vector<ExprNode>> nodes, int root, int arity);

    const ExprNode& node(int i) const { return (*nodes_)[static_cast<std::size_t>(i)]; }

    std::shared_ptr<const std::vector<ExprNode>> nodes_;
    int root_ = 0;
    int arity_ = 0;
};

/// Parse UTF-8 text into an Expression. Throws SyntaxError or UnknownIdentifier.
Expression parse(std::string_view source);

/// Shortest text that reads back as exactly `v`.
std::string format_literal(double v);

/// Free-function form of Expression::eval_jet.
JetValue eval_jet(const Expression& e, std::span<const double> point);

} // namespace solitonlab
