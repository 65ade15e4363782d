#include "percont/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

namespace percont::expr {

namespace {

struct FunctionSpec {
    std::string_view name;
    Op op;
    int arity;
};

constexpr FunctionSpec kFunctions[] = {
    {"sin", Op::Sin, 1},   {"cos", Op::Cos, 1},   {"exp", Op::Exp, 1},
    {"log", Op::Log, 1},   {"sqrt", Op::Sqrt, 1}, {"abs", Op::Abs, 1},
    {"tanh", Op::Tanh, 1}, {"min", Op::Min, 2},   {"max", Op::Max, 2},
};

const FunctionSpec* find_function(std::string_view name) {
    for (const auto& f : kFunctions)
        if (f.name == name) return &f;
    return nullptr;
}

std::string_view op_name(Op op) {
    switch (op) {
        case Op::Neg: return "-";
        case Op::Add: return "+";
        case Op::Sub: return "-";
        case Op::Mul: return "*";
        case Op::Div: return "/";
        case Op::Pow: return "^";
        default: break;
    }
    for (const auto& f : kFunctions)
        if (f.op == op) return f.name;
    return "?";
}

class Parser {
public:
    Parser(std::string_view src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

    int parse_all() {
        int root = parse_sum();
        skip_ws();
        if (pos_ < src_.size()) fail("unexpected character '" + std::string(1, src_[pos_]) + "'");
        return root;
    }

    std::vector<Node> take_nodes() { return std::move(nodes_); }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError("syntax error: " + msg, pos_); }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    int push(Node n) {
        nodes_.push_back(n);
        return static_cast<int>(nodes_.size()) - 1;
    }

    int binary(Op op, int a, int b) { return push(Node{op, 0.0, -1, a, b}); }

    int parse_sum() {
        int lhs = parse_product();
        for (;;) {
            if (accept('+')) lhs = binary(Op::Add, lhs, parse_product());
            else if (accept('-')) lhs = binary(Op::Sub, lhs, parse_product());
            else return lhs;
        }
    }

    int parse_product() {
        int lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = binary(Op::Mul, lhs, parse_unary());
            else if (accept('/')) lhs = binary(Op::Div, lhs, parse_unary());
            else return lhs;
        }
    }

    int parse_unary() {
        if (accept('-')) return push(Node{Op::Neg, 0.0, -1, parse_unary(), -1});
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    int parse_power() {
        int base = parse_primary();
        if (accept('^')) return binary(Op::Pow, base, parse_unary());
        return base;
    }

    int parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("expected operand");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            int inner = parse_sum();
            if (!accept(')')) fail("expected ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
        fail("expected operand");
    }

    int parse_number() {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
            return n;
        };
        std::size_t n = digits();
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            n += digits();
        }
        if (n == 0) fail("malformed number");
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_;
            ++pos_;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (digits() == 0) pos_ = save;
        }
        std::string text(src_.substr(start, pos_ - start));
        return push(Node{Op::Const, std::strtod(text.c_str(), nullptr), -1, -1, -1});
    }

    int parse_identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
            ++pos_;
        const std::string name(src_.substr(start, pos_ - start));

        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            const FunctionSpec* fn = find_function(name);
            if (!fn) throw UnknownIdentifier(name, start);
            ++pos_;
            std::vector<int> args;
            skip_ws();
            if (!accept(')')) {
                do {
                    args.push_back(parse_sum());
                } while (accept(','));
                if (!accept(')')) fail("expected ')' or ','");
            }
            if (static_cast<int>(args.size()) != fn->arity)
                throw ParseError("arity mismatch: " + name + " expects " + std::to_string(fn->arity) +
                                     " argument(s), got " + std::to_string(args.size()),
                                 start);
            return push(Node{fn->op, 0.0, -1, args[0], fn->arity == 2 ? args[1] : -1});
        }

        if (name == "pi") return push(Node{Op::Const, std::numbers::pi, -1, -1, -1});
        auto it = std::find(vars_.begin(), vars_.end(), name);
        if (it == vars_.end()) {
            if (find_function(name)) throw ParseError("arity mismatch: " + name + " is a function", start);
            throw UnknownIdentifier(name, start);
        }
        return push(Node{Op::Var, 0.0, static_cast<int>(it - vars_.begin()), -1, -1});
    }

    std::string_view src_;
    const std::vector<std::string>& vars_;
    std::vector<Node> nodes_;
    std::size_t pos_ = 0;
};

std::string format_constant(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // strtod accepts "inf"/"nan" but the grammar does not; constants are always finite here.
    return s;
}

}  // namespace

Expression Expression::parse(std::string_view source, std::vector<std::string> allowed_vars) {
    for (const auto& v : allowed_vars) {
        if (v == "pi" || find_function(v))
            throw ParseError("variable name '" + v + "' is reserved", 0);
    }
    Parser p(source, allowed_vars);
    Expression e;
    e.root_ = p.parse_all();
    e.nodes_ = std::make_shared<const std::vector<Node>>(p.take_nodes());
    e.vars_ = std::move(allowed_vars);
    return e;
}

double Expression::evaluate(std::span<const double> values) const {
    if (empty()) throw EvalError("evaluation of an empty expression");
    if (values.size() < vars_.size())
        throw EvalError("missing binding: expected " + std::to_string(vars_.size()) + " values");
    return eval_node(root_, values);
}

double Expression::evaluate(const std::map<std::string, double>& bindings) const {
    std::vector<double> values(vars_.size(), 0.0);
    const auto used = free_variables();
    for (std::size_t i = 0; i < vars_.size(); ++i) {
        auto it = bindings.find(vars_[i]);
        if (it != bindings.end()) values[i] = it->second;
        else if (used.count(vars_[i])) throw EvalError("missing binding for '" + vars_[i] + "'");
    }
    return evaluate(values);
}

double Expression::eval_node(int index, std::span<const double> values) const {
    const Node& n = (*nodes_)[static_cast<std::size_t>(index)];
    auto domain_error = [&](const char* why) -> double {
        throw EvalError(std::string("math-domain error (") + why + ") in " + print_node(index));
    };
    double r = 0.0;
    switch (n.op) {
        case Op::Const: return n.value;
        case Op::Var: return values[static_cast<std::size_t>(n.var)];
        case Op::Neg: return -eval_node(n.lhs, values);
        case Op::Sin: r = std::sin(eval_node(n.lhs, values)); break;
        case Op::Cos: r = std::cos(eval_node(n.lhs, values)); break;
        case Op::Exp: r = std::exp(eval_node(n.lhs, values)); break;
        case Op::Tanh: r = std::tanh(eval_node(n.lhs, values)); break;
        case Op::Abs: r = std::fabs(eval_node(n.lhs, values)); break;
        case Op::Log: {
            const double a = eval_node(n.lhs, values);
            if (!(a > 0.0)) domain_error("log of non-positive value");
            r = std::log(a);
            break;
        }
        case Op::Sqrt: {
            const double a = eval_node(n.lhs, values);
            if (a < 0.0) domain_error("sqrt of negative value");
            r = std::sqrt(a);
            break;
        }
        case Op::Add: r = eval_node(n.lhs, values) + eval_node(n.rhs, values); break;
        case Op::Sub: r = eval_node(n.lhs, values) - eval_node(n.rhs, values); break;
        case Op::Mul: r = eval_node(n.lhs, values) * eval_node(n.rhs, values); break;
        case Op::Div: {
            const double a = eval_node(n.lhs, values);
            const double b = eval_node(n.rhs, values);
            if (b == 0.0) domain_error("division by zero");
            r = a / b;
            break;
        }
        case Op::Pow: {
            const double a = eval_node(n.lhs, values);
            const double b = eval_node(n.rhs, values);
            if (a < 0.0 && std::floor(b) != b) domain_error("negative base with non-integer exponent");
            if (a == 0.0 && b < 0.0) domain_error("zero base with negative exponent");
            r = std::pow(a, b);
            break;
        }
        case Op::Min: r = std::min(eval_node(n.lhs, values), eval_node(n.rhs, values)); break;
        case Op::Max: r = std::max(eval_node(n.lhs, values), eval_node(n.rhs, values)); break;
    }
    if (!std::isfinite(r)) domain_error("non-finite result");
    return r;
}

std::set<std::string> Expression::free_variables() const {
    std::set<std::string> out;
    if (empty()) return out;
    for (const Node& n : *nodes_)
        if (n.op == Op::Var) out.insert(vars_[static_cast<std::size_t>(n.var)]);
    return out;
}

std::string Expression::to_string() const { return empty() ? std::string() : print_node(root_); }

std::string Expression::print_node(int index) const {
    const Node& n = (*nodes_)[static_cast<std::size_t>(index)];
    switch (n.op) {
        case Op::Const: return format_constant(n.value);
        case Op::Var: return vars_[static_cast<std::size_t>(n.var)];
        case Op::Neg: return "(-" + print_node(n.lhs) + ")";
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div:
        case Op::Pow:
            return "(" + print_node(n.lhs) + std::string(op_name(n.op)) + print_node(n.rhs) + ")";
        case Op::Min:
        case Op::Max:
            return std::string(op_name(n.op)) + "(" + print_node(n.lhs) + "," + print_node(n.rhs) + ")";
        default:
            return std::string(op_name(n.op)) + "(" + print_node(n.lhs) + ")";
    }
}

}  // namespace percont::expr
