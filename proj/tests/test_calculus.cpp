#include "doctest.h"
#include "support.hpp"

using namespace eqderiv;
using namespace eqderiv::testing;

namespace {

const Expr x = sym("x");
const Expr y = sym("y");

}  // namespace

TEST_CASE("basic derivatives") {
  CHECK(differentiate(num(7), "x") == num(0));
  CHECK(differentiate(y, "x") == num(0));
  CHECK(differentiate(x, "x") == num(1));
  CHECK(differentiate(pow(x, num(3)), "x") == mul(num(3), pow(x, num(2))));
  CHECK(differentiate(pow(x, num(-1)), "x") == neg(pow(x, num(-2))));
  CHECK(differentiate(sin(x), "x") == cos(x));
  CHECK(differentiate(cos(x), "x") == neg(sin(x)));
  CHECK(differentiate(exp(x), "x") == exp(x));
  CHECK(differentiate(log(x), "x") == pow(x, num(-1)));
  CHECK(differentiate(mul(x, sin(x)), "x") == add(sin(x), mul(x, cos(x))));
  CHECK(differentiate(sin(mul(num(2), x)), "x") == mul(num(2), cos(mul(num(2), x))));
  CHECK(differentiate(pow(num(2), x), "x") == mul(pow(num(2), x), log(num(2))));
}

TEST_CASE("unknown functions stay symbolic") {
  const Expr f = applied("f", {x});
  CHECK(differentiate(f, "x") == derivative(f, "x"));
  CHECK(differentiate(f, "y") == num(0));
  CHECK(differentiate(derivative(f, "x"), "x") == derivative(f, "x", 2));
  CHECK(differentiate(mul(num(3), f), "x") == mul(num(3), derivative(f, "x")));
}

TEST_CASE("d/dv of an integral over v is the integrand") {
  const Expr body = mul(y, applied("f", {x}));
  CHECK(differentiate(integral(body, "x"), "x") == body);
}

TEST_CASE("every table rule differentiates back to its integrand") {
  for (const char* v : {"x", "\\theta", "A_{x}"}) {
    const auto rules = IntegralTable::rules(v);
    REQUIRE(rules.size() >= 7);
    for (const auto& r : rules) {
      INFO(r.label);
      CHECK(differentiate(r.antiderivative, v) == r.integrand);
      CHECK(IntegralTable::standard().antiderivative(r.integrand, v) == r.antiderivative);
    }
  }
}

TEST_CASE("integration is linear over sums and constant multiples") {
  const auto& t = IntegralTable::standard();
  const Expr e = add({mul(num(3), pow(x, num(2))), mul(y, cos(x)), num(5)});
  auto a = t.antiderivative(e, "x");
  REQUIRE(a);
  CHECK(*a == add({pow(x, num(3)), mul(y, sin(x)), mul(num(5), x)}));
  CHECK(differentiate(*a, "x") == e);
  CHECK_FALSE(t.antiderivative(sin(pow(x, num(2))), "x"));
  CHECK_FALSE(t.antiderivative(applied("f", {x}), "x"));
}

TEST_CASE("integration constants are fresh") {
  const IntegralTable t({"C", "c_{1}"});
  auto r = t.integrate(x, "x", {"C"});
  REQUIRE(r);
  CHECK(*r == add(mul(Expr::rational(1, 2), pow(x, num(2))), sym("c_{1}")));
  CHECK_FALSE(t.integrate(x, "x", {"C", "c_{1}"}));
}

TEST_CASE("evaluate_derivatives works innermost first and needs a derivative") {
  const Equation eq{applied("f", {x}), derivative(mul(x, derivative(pow(x, num(2)), "x")), "x")};
  CHECK(evaluate_derivatives(eq) == Equation{applied("f", {x}), mul(num(4), x)});
  const Equation none{x, y};
  CHECK_THROWS_AS(evaluate_derivatives(none), NoDerivativePresent);
  // A derivative of an unknown function evaluates to itself.
  const Equation opaque{y, derivative(applied("f", {x}), "x")};
  CHECK_THROWS_AS(evaluate_derivatives(opaque), NoDerivativePresent);
}

TEST_CASE("evaluable integrals") {
  CHECK(is_evaluable_integral(integral(sin(x), "x")));
  CHECK_FALSE(is_evaluable_integral(integral(applied("f", {x}), "x")));
  CHECK_FALSE(is_evaluable_integral(sin(x)));
  const Expr two = add(integral(x, "x"), integral(cos(x), "x"));
  CHECK(count_evaluable_integrals(two) == 2);
}

TEST_CASE("symbolic derivatives match finite differences") {
  Rng rng(99);
  int checked = 0;
  for (int i = 0; i < 150; ++i) {
    const Expr e = random_expr(rng, 4, {"x", "y"});
    for (int k = 0; k < 4; ++k) {
      const std::map<std::string, double> at{{"x", 0.5 + 1.5 * rng.uniform()}, {"y", 0.5 + 1.5 * rng.uniform()}};
      try {
        double d = 0, fd = 0;
        const bool ok = derivative_matches(e, "x", at, 1e-6, &d, &fd);
        INFO(to_latex(e), " d=", d, " fd=", fd);
        CHECK(ok);
        ++checked;
      } catch (const DomainError&) {
      }
    }
  }
  CHECK(checked > 300);
}
