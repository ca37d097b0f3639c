#include <doctest.h>

#include <cmath>
#include <numbers>

#include "tmlab/errors.hpp"
#include "tmlab/expression.hpp"

using tmlab::Expression;

TEST_CASE("default expression is the constant zero") {
  const Expression e;
  CHECK(e(0.3, -2) == 0);
  CHECK(e.is_constant());
}

TEST_CASE("arithmetic, precedence and power associativity") {
  CHECK(Expression("1+2*3")(0, 0) == 7);
  CHECK(Expression("2^3^2")(0, 0) == 512);
  CHECK(Expression("-2^2")(0, 0) == -4);
  CHECK(Expression("(1+2)*3")(0, 0) == 9);
  CHECK(Expression("x1/x2 - x2")(3, 2) == doctest::Approx(-0.5));
}

TEST_CASE("functions and constants") {
  CHECK(Expression("sin(pi/2) + log(e)")(0, 0) == doctest::Approx(2));
  CHECK(Expression("exp(x1)*cos(x2)")(1, 0) == doctest::Approx(std::numbers::e));
  CHECK(Expression("sqrt(abs(x1))")(-4, 0) == doctest::Approx(2));
  CHECK(Expression("tanh(x1)+sinh(x1)+cosh(x1)+tan(x1)")(0, 0) == doctest::Approx(1));
  CHECK_FALSE(Expression("x1*x2").is_constant());
  CHECK(Expression("3*pi").is_constant());
}

TEST_CASE("malformed expressions are rejected") {
  CHECK_THROWS_AS(Expression("1+"), tmlab::InvalidArgument);
  CHECK_THROWS_AS(Expression("foo(1)"), tmlab::InvalidArgument);
  CHECK_THROWS_AS(Expression("(x1"), tmlab::InvalidArgument);
  CHECK_THROWS_AS(Expression("x3"), tmlab::InvalidArgument);
  CHECK_THROWS_AS(Expression("1 2"), tmlab::InvalidArgument);
}
