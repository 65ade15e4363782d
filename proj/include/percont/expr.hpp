#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "percont/errors.hpp"

namespace percont::expr {

/// Raised when an identifier is neither a declared variable, `pi`, nor a catalog function.
class UnknownIdentifier : public ParseError {
public:
    UnknownIdentifier(const std::string& name, std::size_t offset)
        : ParseError("unknown identifier '" + name + "'", offset), name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

enum class Op : std::uint8_t {
    Const, Var,
    Neg, Sin, Cos, Exp, Log, Sqrt, Abs, Tanh,
    Add, Sub, Mul, Div, Pow, Min, Max,
};

struct Node {
    Op op = Op::Const;
    double value = 0.0;  // Const
    int var = -1;        // Var: index into the declared variable list
    int lhs = -1;        // operand / left child
    int rhs = -1;        // right child
};

/// Immutable scalar expression over a declared, ordered variable list.
///
/// Grammar, lowest to highest precedence: `+ -`, `* /`, unary `-`, `^` (right
/// associative). Calls: sin cos exp log sqrt abs tanh (one argument), min max
/// (two). `pi` is a constant. There is no implicit multiplication.
class Expression {
public:
    Expression() = default;

    static Expression parse(std::string_view source, std::vector<std::string> allowed_vars);

    /// `values[i]` binds `variables()[i]`.
    double evaluate(std::span<const double> values) const;
    /// Throws EvalError if a free variable has no binding.
    double evaluate(const std::map<std::string, double>& bindings) const;

    std::set<std::string> free_variables() const;
    const std::vector<std::string>& variables() const noexcept { return vars_; }

    /// Fully parenthesised text that parses back to an equivalent expression.
    std::string to_string() const;

    bool empty() const noexcept { return !nodes_ || nodes_->empty(); }

private:
    double eval_node(int index, std::span<const double> values) const;
    std::string print_node(int index) const;

    std::shared_ptr<const std::vector<Node>> nodes_;
    int root_ = -1;
    std::vector<std::string> vars_;
};

inline Expression parse(std::string_view source, std::vector<std::string> allowed_vars) {
    return Expression::parse(source, std::move(allowed_vars));
}

inline double evaluate(const Expression& e, const std::map<std::string, double>& bindings) {
    return e.evaluate(bindings);
}

inline std::set<std::string> free_variables(const Expression& e) { return e.free_variables(); }

}  // namespace percont::expr
