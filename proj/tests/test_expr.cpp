#include <doctest.h>

#include <cmath>
#include <random>

#include "percont/errors.hpp"
#include "percont/expr.hpp"

using percont::EvalError;
using percont::ParseError;
using percont::expr::Expression;
using percont::expr::UnknownIdentifier;

namespace {

double eval1(const char* src, const char* var, double v) {
    return Expression::parse(src, {var}).evaluate(std::vector<double>{v});
}

}  // namespace

TEST_CASE("evaluation of catalog functions") {
    CHECK(eval1("sin(2*pi*t)", "t", 0.25) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(eval1("x1^3 - x1", "x1", 2.0) == 6.0);
    CHECK(eval1("abs(x)", "x", -3.0) == 3.0);
    CHECK(eval1("t^2", "t", 0.0) == 0.0);
    CHECK(eval1("max(x, 2) - min(x, 2)", "x", 5.0) == 3.0);
    CHECK(eval1("exp(log(x))", "x", 2.5) == doctest::Approx(2.5));
    CHECK(eval1("tanh(x)", "x", 0.0) == 0.0);
}

TEST_CASE("precedence and associativity") {
    CHECK(Expression::parse("2+3*4", {}).evaluate(std::vector<double>{}) == 14.0);
    CHECK(Expression::parse("2^3^2", {}).evaluate(std::vector<double>{}) == 512.0);
    CHECK(Expression::parse("-2^2", {}).evaluate(std::vector<double>{}) == -4.0);
    CHECK(Expression::parse("8/4/2", {}).evaluate(std::vector<double>{}) == 1.0);
    CHECK(Expression::parse("2-3-4", {}).evaluate(std::vector<double>{}) == -5.0);
}

TEST_CASE("syntax errors carry offsets") {
    try {
        Expression::parse("1 +", {"t"});
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 3);
    }
    CHECK_THROWS_AS(Expression::parse("sin(1, 2)", {}), ParseError);
    CHECK_THROWS_AS(Expression::parse("x1x2", {"x1", "x2"}), UnknownIdentifier);
    CHECK_THROWS_AS(Expression::parse("2 3", {}), ParseError);
    CHECK_THROWS_AS(Expression::parse("(1 + 2", {}), ParseError);
}

TEST_CASE("unknown identifiers are named") {
    try {
        Expression::parse("y + 1", {"x"});
        FAIL("expected UnknownIdentifier");
    } catch (const UnknownIdentifier& e) {
        CHECK(e.name() == "y");
    }
}

TEST_CASE("math-domain errors") {
    CHECK_THROWS_AS(eval1("sqrt(x)", "x", -1.0), EvalError);
    CHECK_THROWS_AS(eval1("log(x)", "x", 0.0), EvalError);
    CHECK_THROWS_AS(eval1("x^0.5", "x", -2.0), EvalError);
    CHECK(eval1("x^3", "x", -2.0) == -8.0);
}

TEST_CASE("free variables") {
    using S = std::set<std::string>;
    CHECK(Expression::parse("sin(2*pi*t)", {"t", "x"}).free_variables() == S{"t"});
    CHECK(Expression::parse("3.14", {"t"}).free_variables().empty());
    CHECK(Expression::parse("x1*x2 + x1", {"x1", "x2", "x3"}).free_variables() == S{"x1", "x2"});
}

TEST_CASE("named bindings") {
    const Expression e = Expression::parse("a*b + c", {"a", "b", "c"});
    CHECK(e.evaluate(std::map<std::string, double>{{"a", 2}, {"b", 3}, {"c", 1}}) == 7.0);
    CHECK_THROWS_AS(e.evaluate(std::map<std::string, double>{{"a", 2}}), EvalError);
    const Expression unused = Expression::parse("a + 1", {"a", "b"});
    CHECK(unused.evaluate(std::map<std::string, double>{{"a", 1}}) == 2.0);
}

TEST_CASE("print and reparse evaluate identically") {
    const std::vector<std::string> sources = {
        "sin(2*pi*t) - x^2/3", "-(x - t)^3 + abs(-x)", "2^-x^2", "max(x, t) * min(-x, t^2) / (1 + t^2)",
        "exp(-t) * cos(x) - tanh(x*t)", "--x - -t", "sqrt(1 + x^2) - 1e-3*t"};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (const auto& s : sources) {
        const Expression a = Expression::parse(s, {"t", "x"});
        const Expression b = Expression::parse(a.to_string(), {"t", "x"});
        for (int k = 0; k < 100; ++k) {
            const std::vector<double> v{u(rng), u(rng)};
            CHECK(a.evaluate(v) == b.evaluate(v));
        }
    }
}
