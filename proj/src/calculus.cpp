#include "eqderiv/calculus.hpp"

#include <functional>

#include "eqderiv/canonical.hpp"

namespace eqderiv {

Expr differentiate(const Expr& e, const std::string& v) {
  if (!depends_on(e, v)) return Expr::integer(0);
  switch (e.kind()) {
    case ExprKind::Integer:
    case ExprKind::Rational:
      return Expr::integer(0);
    case ExprKind::Symbol:
      return Expr::integer(e.name() == v ? 1 : 0);
    case ExprKind::Add: {
      std::vector<Expr> terms;
      for (const auto& t : e.operands()) terms.push_back(differentiate(t, v));
      return add(std::move(terms));
    }
    case ExprKind::Mul: {
      const auto fs = e.operands();
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < fs.size(); ++i) {
        Expr di = differentiate(fs[i], v);
        if (di.is_zero()) continue;
        std::vector<Expr> prod{di};
        for (std::size_t j = 0; j < fs.size(); ++j) {
          if (j != i) prod.push_back(fs[j]);
        }
        terms.push_back(mul(std::move(prod)));
      }
      return add(std::move(terms));
    }
    case ExprKind::Pow: {
      const Expr& b = e.base();
      const Expr& x = e.exponent();
      const bool db = depends_on(b, v);
      const bool dx = depends_on(x, v);
      if (db && !dx) {
        return mul({x, pow(b, add(x, Expr::integer(-1))), differentiate(b, v)});
      }
      if (!db) return mul({e, log(b), differentiate(x, v)});
      return mul(e, add(mul(differentiate(x, v), log(b)), mul({x, differentiate(b, v), pow(b, Expr::integer(-1))})));
    }
    case ExprKind::Func: {
      const Expr& a = e.arg();
      const Expr da = differentiate(a, v);
      switch (e.func()) {
        case FuncKind::Sin: return mul(cos(a), da);
        case FuncKind::Cos: return mul({Expr::integer(-1), sin(a), da});
        case FuncKind::Exp: return mul(e, da);
        case FuncKind::Log: return mul(da, pow(a, Expr::integer(-1)));
      }
      break;
    }
    case ExprKind::Applied:
    case ExprKind::Derivative:
      return derivative(e, v);
    case ExprKind::Integral:
      if (e.var() == v) return e.body();
      return derivative(e, v);
  }
  return derivative(e, v);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> vocabulary_pool() {
  std::vector<std::string> out;
  for (const auto& entry : SymbolTable::builtin().entries()) {
    if (entry.kind != SymbolKind::FunctionName) out.push_back(entry.name);
  }
  return out;
}

// Antiderivative of a single v-dependent factor.
std::optional<Expr> factor_antiderivative(const Expr& f, const std::string& v) {
  const Expr x = Expr::symbol(v);
  if (f == x) return mul(Expr::rational(1, 2), pow(x, Expr::integer(2)));
  if (f.is(ExprKind::Pow) && f.base() == x && f.exponent().is_number()) {
    const BigRational n = f.exponent().value();
    if (n == -1) return log(x);
    const Expr n1 = Expr::number(n + 1);
    return mul(pow(x, n1), pow(n1, Expr::integer(-1)));
  }
  if (f.is(ExprKind::Func) && f.arg() == x) {
    switch (f.func()) {
      case FuncKind::Exp: return f;
      case FuncKind::Sin: return neg(cos(x));
      case FuncKind::Cos: return sin(x);
      case FuncKind::Log: return sub(mul(x, log(x)), x);
    }
  }
  return std::nullopt;
}

}  // namespace

IntegralTable::IntegralTable() : pool_(vocabulary_pool()) {}
IntegralTable::IntegralTable(std::vector<std::string> constant_pool) : pool_(std::move(constant_pool)) {}

const IntegralTable& IntegralTable::standard() {
  static const IntegralTable table;
  return table;
}

std::optional<Expr> IntegralTable::antiderivative(const Expr& e, const std::string& v) const {
  const Expr x = Expr::symbol(v);
  if (!depends_on(e, v)) return mul(e, x);
  if (e.is(ExprKind::Add)) {
    std::vector<Expr> terms;
    for (const auto& t : e.operands()) {
      auto a = antiderivative(t, v);
      if (!a) return std::nullopt;
      terms.push_back(*a);
    }
    return add(std::move(terms));
  }
  if (e.is(ExprKind::Mul)) {
    std::vector<Expr> constant;
    std::optional<Expr> dependent;
    for (const auto& f : e.operands()) {
      if (!depends_on(f, v)) {
        constant.push_back(f);
      } else if (dependent) {
        return std::nullopt;
      } else {
        dependent = f;
      }
    }
    auto a = factor_antiderivative(*dependent, v);
    if (!a) return std::nullopt;
    constant.push_back(*a);
    return mul(std::move(constant));
  }
  return factor_antiderivative(e, v);
}

std::optional<std::string> IntegralTable::fresh_constant(const std::set<std::string>& used) const {
  for (const auto& c : pool_) {
    if (!used.count(c)) return c;
  }
  return std::nullopt;
}

std::optional<Expr> IntegralTable::integrate(const Expr& e, const std::string& v,
                                             const std::set<std::string>& used) const {
  auto a = antiderivative(e, v);
  if (!a) return std::nullopt;
  std::set<std::string> taken = used;
  for (auto& s : free_symbols(e)) taken.insert(s);
  taken.insert(v);
  auto c = fresh_constant(taken);
  if (!c) return std::nullopt;
  return add(*a, Expr::symbol(*c));
}

std::vector<IntegralRule> IntegralTable::rules(const std::string& v) {
  const Expr x = Expr::symbol(v);
  std::vector<IntegralRule> out;
  auto rule = [&](std::string label, Expr integrand) {
    auto a = standard().antiderivative(integrand, v);
    out.push_back({std::move(label), integrand, *a});
  };
  rule("constant", Expr::integer(3));
  rule("power 1", x);
  rule("power 2", pow(x, Expr::integer(2)));
  rule("power 5", pow(x, Expr::integer(5)));
  rule("power -2", pow(x, Expr::integer(-2)));
  rule("power 1/2", pow(x, Expr::rational(1, 2)));
  rule("reciprocal", pow(x, Expr::integer(-1)));
  rule("exp", exp(x));
  rule("sin", sin(x));
  rule("cos", cos(x));
  rule("log", log(x));
  rule("scaled sin", mul(Expr::integer(-4), sin(x)));
  rule("sum", add({x, exp(x), Expr::rational(2, 3)}));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool has_unevaluable_parts(const Expr& e) {
  if (e.is(ExprKind::Applied) || e.is(ExprKind::Derivative) || e.is(ExprKind::Integral)) return true;
  for (const auto& c : e.operands()) {
    if (has_unevaluable_parts(c)) return true;
  }
  return false;
}

template <typename F>
Expr map_children(const Expr& e, F&& f) {
  switch (e.kind()) {
    case ExprKind::Integer:
    case ExprKind::Rational:
    case ExprKind::Symbol:
      return e;
    case ExprKind::Func:
      return func(e.func(), f(e.arg()));
    case ExprKind::Applied: {
      std::vector<Expr> xs;
      for (const auto& a : e.operands()) xs.push_back(f(a));
      return applied(e.name(), std::move(xs));
    }
    case ExprKind::Pow:
      return pow(f(e.base()), f(e.exponent()));
    case ExprKind::Mul: {
      std::vector<Expr> xs;
      for (const auto& a : e.operands()) xs.push_back(f(a));
      return mul(std::move(xs));
    }
    case ExprKind::Add: {
      std::vector<Expr> xs;
      for (const auto& a : e.operands()) xs.push_back(f(a));
      return add(std::move(xs));
    }
    case ExprKind::Derivative:
      return derivative(f(e.body()), e.var(), e.order());
    case ExprKind::Integral:
      return integral(f(e.body()), e.var());
  }
  return e;
}

Expr eval_derivs(const Expr& e) {
  if (e.is(ExprKind::Derivative)) {
    Expr body = eval_derivs(e.body());
    for (int i = 0; i < e.order(); ++i) body = differentiate(body, e.var());
    return body;
  }
  return map_children(e, eval_derivs);
}

struct IntegralEvaluator {
  const IntegralTable& table;
  const std::vector<std::string>& constants;
  std::size_t next = 0;
  bool miss = false;

  Expr operator()(const Expr& e) {
    if (miss) return e;
    if (is_evaluable_integral(e)) {
      auto a = table.antiderivative(e.body(), e.var());
      if (!a || next >= constants.size()) {
        miss = true;
        return e;
      }
      return add(*a, Expr::symbol(constants[next++]));
    }
    return map_children(e, std::ref(*this));
  }
};

}  // namespace

bool is_evaluable_integral(const Expr& e) {
  return e.is(ExprKind::Integral) && !has_unevaluable_parts(e.body());
}

std::size_t count_evaluable_integrals(const Expr& e) {
  if (is_evaluable_integral(e)) return 1;
  std::size_t n = 0;
  for (const auto& c : e.operands()) n += count_evaluable_integrals(c);
  return n;
}

Expr evaluate_derivatives(const Expr& e) { return eval_derivs(e); }

Equation evaluate_derivatives(const Equation& eq) {
  Equation out{eval_derivs(eq.lhs), eval_derivs(eq.rhs)};
  if (out == eq) throw NoDerivativePresent("no derivative to evaluate");
  return out;
}

std::optional<Equation> evaluate_integrals(const Equation& eq,
                                           const std::vector<std::string>& constants,
                                           const IntegralTable& table) {
  if (count_evaluable_integrals(eq.lhs) + count_evaluable_integrals(eq.rhs) == 0) {
    throw NoIntegralPresent("no integral to evaluate");
  }
  IntegralEvaluator ev{table, constants};
  Expr lhs = ev(eq.lhs);
  Expr rhs = ev(eq.rhs);
  if (ev.miss) return std::nullopt;
  return Equation{std::move(lhs), std::move(rhs)};
}

std::optional<Equation> evaluate_integrals(const Equation& eq, const std::set<std::string>& used,
                                           const IntegralTable& table) {
  std::set<std::string> taken = used;
  for (auto& s : free_symbols(eq)) taken.insert(s);
  const std::size_t n = count_evaluable_integrals(eq.lhs) + count_evaluable_integrals(eq.rhs);
  std::vector<std::string> constants;
  for (const auto& c : table.constant_pool()) {
    if (constants.size() == n) break;
    if (!taken.count(c)) constants.push_back(c);
  }
  return evaluate_integrals(eq, constants, table);
}

}  // namespace eqderiv
