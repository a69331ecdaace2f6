#include "eqderiv/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace eqderiv {

namespace {

// Exponents larger than this are left as unevaluated powers.
constexpr long kMaxFoldExponent = 256;
constexpr std::size_t kMaxFoldBits = 4096;

std::size_t bit_length(const BigInt& v) {
  return v == 0 ? 0 : boost::multiprecision::msb(boost::multiprecision::abs(v)) + 1;
}

std::optional<BigRational> fold_power(const BigRational& base, const BigRational& exponent) {
  if (denominator(exponent) != 1) return std::nullopt;
  const BigInt e = numerator(exponent);
  if (boost::multiprecision::abs(e) > kMaxFoldExponent) return std::nullopt;
  if (base == 0 && e < 0) return std::nullopt;
  const long k = e.convert_to<long>();
  const std::size_t bits =
      (bit_length(numerator(base)) + bit_length(denominator(base))) * static_cast<std::size_t>(std::labs(k));
  if (bits > kMaxFoldBits) return std::nullopt;
  BigInt n = boost::multiprecision::pow(numerator(base), static_cast<unsigned>(std::labs(k)));
  BigInt d = boost::multiprecision::pow(denominator(base), static_cast<unsigned>(std::labs(k)));
  if (k < 0) std::swap(n, d);
  // boost::rational rejects a negative denominator for unbounded integers.
  if (d < 0) {
    n = -n;
    d = -d;
  }
  return BigRational(n, d);
}

Expr with_coefficient(const BigRational& c, const Expr& rest) {
  if (c == 1) return rest;
  std::vector<Expr> factors{Expr::number(c)};
  if (rest.is(ExprKind::Mul)) {
    factors.insert(factors.end(), rest.operands().begin(), rest.operands().end());
  } else {
    factors.push_back(rest);
  }
  return Expr::make_mul(std::move(factors));
}

const Expr& factor_base(const Expr& f) { return f.is(ExprKind::Pow) ? f.base() : f; }

int compare_factors(const Expr& a, const Expr& b) {
  if (a.is_number() != b.is_number()) return a.is_number() ? -1 : 1;
  if (int c = compare(factor_base(a), factor_base(b)); c != 0) return c;
  static const Expr one = Expr::integer(1);
  const Expr& ea = a.is(ExprKind::Pow) ? a.exponent() : one;
  const Expr& eb = b.is(ExprKind::Pow) ? b.exponent() : one;
  return compare(ea, eb);
}

int compare_terms(const Expr& a, const Expr& b) {
  if (a.is_number() != b.is_number()) return a.is_number() ? -1 : 1;
  auto [ca, ra] = split_coefficient(a);
  auto [cb, rb] = split_coefficient(b);
  if (int c = compare(ra, rb); c != 0) return c;
  if (ca == cb) return 0;
  return ca < cb ? -1 : 1;
}

}  // namespace

std::pair<BigRational, Expr> split_coefficient(const Expr& term) {
  if (term.is_number()) return {term.value(), Expr::integer(1)};
  if (term.is(ExprKind::Mul) && term.operands().front().is_number()) {
    const auto ops = term.operands();
    if (ops.size() == 2) return {ops[0].value(), ops[1]};
    return {ops[0].value(), Expr::make_mul(std::vector<Expr>(ops.begin() + 1, ops.end()))};
  }
  return {BigRational(1), term};
}

Expr add(std::vector<Expr> terms) {
  std::vector<Expr> flat;
  flat.reserve(terms.size());
  for (auto& t : terms) {
    if (t.is(ExprKind::Add)) {
      flat.insert(flat.end(), t.operands().begin(), t.operands().end());
    } else {
      flat.push_back(std::move(t));
    }
  }

  BigRational constant = 0;
  std::vector<std::pair<Expr, BigRational>> groups;
  std::unordered_map<Expr, std::size_t, ExprHash> index;
  for (const auto& t : flat) {
    if (t.is_number()) {
      constant += t.value();
      continue;
    }
    auto [c, rest] = split_coefficient(t);
    auto [it, inserted] = index.try_emplace(rest, groups.size());
    if (inserted) {
      groups.emplace_back(rest, c);
    } else {
      groups[it->second].second += c;
    }
  }

  std::vector<Expr> out;
  out.reserve(groups.size() + 1);
  if (constant != 0) out.push_back(Expr::number(constant));
  for (const auto& [rest, c] : groups) {
    if (c == 0) continue;
    out.push_back(with_coefficient(c, rest));
  }
  if (out.empty()) return Expr::integer(0);
  if (out.size() == 1) return out.front();
  std::sort(out.begin(), out.end(),
            [](const Expr& a, const Expr& b) { return compare_terms(a, b) < 0; });
  return Expr::make_add(std::move(out));
}

Expr add(const Expr& a, const Expr& b) { return add(std::vector<Expr>{a, b}); }

Expr mul(std::vector<Expr> factors) {
  std::vector<Expr> flat;
  flat.reserve(factors.size());
  for (auto& f : factors) {
    if (f.is(ExprKind::Mul)) {
      flat.insert(flat.end(), f.operands().begin(), f.operands().end());
    } else {
      flat.push_back(std::move(f));
    }
  }

  BigRational coeff = 1;
  std::vector<Expr> exp_args;
  std::vector<std::pair<Expr, std::vector<Expr>>> groups;
  std::unordered_map<Expr, std::size_t, ExprHash> index;
  for (const auto& f : flat) {
    if (f.is_number()) {
      coeff *= f.value();
      continue;
    }
    if (f.is(ExprKind::Func) && f.func() == FuncKind::Exp) {
      exp_args.push_back(f.arg());
      continue;
    }
    const Expr& b = factor_base(f);
    Expr e = f.is(ExprKind::Pow) ? f.exponent() : Expr::integer(1);
    auto [it, inserted] = index.try_emplace(b, groups.size());
    if (inserted) {
      groups.emplace_back(b, std::vector<Expr>{std::move(e)});
    } else {
      groups[it->second].second.push_back(std::move(e));
    }
  }
  if (coeff == 0) return Expr::integer(0);

  std::vector<Expr> out;
  std::vector<Expr> reflatten;
  for (auto& [b, exps] : groups) {
    Expr p = exps.size() == 1 ? pow(b, exps.front()) : pow(b, add(std::move(exps)));
    if (p.is_number()) {
      coeff *= p.value();
    } else if (p.is(ExprKind::Func) && p.func() == FuncKind::Exp) {
      exp_args.push_back(p.arg());
    } else if (p.is(ExprKind::Mul) || (p.is(ExprKind::Pow) && p.base() != b)) {
      reflatten.push_back(std::move(p));
    } else {
      out.push_back(std::move(p));
    }
  }
  if (!exp_args.empty()) {
    Expr merged = exp(exp_args.size() == 1 ? exp_args.front() : add(exp_args));
    if (merged.is_number()) {
      coeff *= merged.value();
    } else if (merged.is(ExprKind::Func) && merged.func() == FuncKind::Exp) {
      out.push_back(std::move(merged));
    } else {
      reflatten.push_back(std::move(merged));
    }
  }
  if (coeff == 0) return Expr::integer(0);
  if (!reflatten.empty()) {
    // A merged power or exp(log(..)) produced something with new bases.
    out.insert(out.end(), reflatten.begin(), reflatten.end());
    out.push_back(Expr::number(coeff));
    return mul(std::move(out));
  }

  std::sort(out.begin(), out.end(),
            [](const Expr& a, const Expr& b) { return compare_factors(a, b) < 0; });
  if (out.empty()) return Expr::number(coeff);
  if (out.size() == 1) {
    if (coeff == 1) return out.front();
    if (out.front().is(ExprKind::Add)) {
      std::vector<Expr> terms;
      for (const auto& t : out.front().operands()) terms.push_back(mul(Expr::number(coeff), t));
      return add(std::move(terms));
    }
  }
  if (coeff != 1) out.insert(out.begin(), Expr::number(coeff));
  return Expr::make_mul(std::move(out));
}

Expr mul(const Expr& a, const Expr& b) { return mul(std::vector<Expr>{a, b}); }

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_zero()) return Expr::integer(1);
  if (exponent.is_one()) return base;
  if (base.is_one()) return Expr::integer(1);
  if (base.is_zero()) {
    if (exponent.is_number() && exponent.value() > 0) return Expr::integer(0);
    return Expr::make_pow(base, exponent);
  }
  if (base.is_number() && exponent.is_number()) {
    if (auto folded = fold_power(base.value(), exponent.value())) return Expr::number(*folded);
    return Expr::make_pow(base, exponent);
  }
  if (exponent.is_integer()) {
    if (base.is(ExprKind::Pow)) return pow(base.base(), mul(base.exponent(), exponent));
    if (base.is(ExprKind::Mul)) {
      std::vector<Expr> factors;
      for (const auto& f : base.operands()) factors.push_back(pow(f, exponent));
      return mul(std::move(factors));
    }
    if (base.is(ExprKind::Func) && base.func() == FuncKind::Exp) {
      return exp(mul(base.arg(), exponent));
    }
  }
  return Expr::make_pow(base, exponent);
}

Expr neg(const Expr& e) { return mul(Expr::integer(-1), e); }
Expr sub(const Expr& a, const Expr& b) { return add(a, neg(b)); }
Expr div(const Expr& a, const Expr& b) { return mul(a, pow(b, Expr::integer(-1))); }

Expr func(FuncKind kind, const Expr& arg) {
  switch (kind) {
    case FuncKind::Sin:
      if (arg.is_zero()) return Expr::integer(0);
      break;
    case FuncKind::Cos:
      if (arg.is_zero()) return Expr::integer(1);
      break;
    case FuncKind::Exp:
      if (arg.is_zero()) return Expr::integer(1);
      if (arg.is(ExprKind::Func) && arg.func() == FuncKind::Log) return arg.arg();
      break;
    case FuncKind::Log:
      if (arg.is_one()) return Expr::integer(0);
      if (arg.is(ExprKind::Func) && arg.func() == FuncKind::Exp) return arg.arg();
      break;
  }
  return Expr::make_func(kind, arg);
}

Expr sin(const Expr& arg) { return func(FuncKind::Sin, arg); }
Expr cos(const Expr& arg) { return func(FuncKind::Cos, arg); }
Expr exp(const Expr& arg) { return func(FuncKind::Exp, arg); }
Expr log(const Expr& arg) { return func(FuncKind::Log, arg); }

Expr applied(std::string name, std::vector<Expr> args) {
  return Expr::make_applied(std::move(name), std::move(args));
}

Expr derivative(const Expr& body, const std::string& var, int order) {
  if (body.is(ExprKind::Derivative) && body.var() == var) {
    return Expr::make_derivative(body.body(), var, body.order() + order);
  }
  return Expr::make_derivative(body, var, order);
}

Expr integral(const Expr& body, const std::string& var) { return Expr::make_integral(body, var); }

namespace {

template <typename F>
Expr rebuild(const Expr& e, F&& child) {
  switch (e.kind()) {
    case ExprKind::Integer:
    case ExprKind::Rational:
    case ExprKind::Symbol:
      return e;
    case ExprKind::Func:
      return func(e.func(), child(e.arg()));
    case ExprKind::Applied: {
      std::vector<Expr> args;
      for (const auto& a : e.operands()) args.push_back(child(a));
      return applied(e.name(), std::move(args));
    }
    case ExprKind::Pow:
      return pow(child(e.base()), child(e.exponent()));
    case ExprKind::Mul: {
      std::vector<Expr> xs;
      for (const auto& a : e.operands()) xs.push_back(child(a));
      return mul(std::move(xs));
    }
    case ExprKind::Add: {
      std::vector<Expr> xs;
      for (const auto& a : e.operands()) xs.push_back(child(a));
      return add(std::move(xs));
    }
    case ExprKind::Derivative:
      return derivative(child(e.body()), e.var(), e.order());
    case ExprKind::Integral:
      return integral(child(e.body()), e.var());
  }
  return e;
}

}  // namespace

Expr canonicalize(const Expr& e) {
  return rebuild(e, [](const Expr& c) { return canonicalize(c); });
}

Equation canonicalize(const Equation& eq) { return {canonicalize(eq.lhs), canonicalize(eq.rhs)}; }

Expr rename_symbols(const Expr& e, const std::map<std::string, std::string>& names) {
  auto to = [&](const std::string& n) {
    const auto it = names.find(n);
    return it == names.end() ? n : it->second;
  };
  switch (e.kind()) {
    case ExprKind::Symbol:
      return Expr::symbol(to(e.name()));
    case ExprKind::Applied: {
      std::vector<Expr> args;
      for (const auto& a : e.operands()) args.push_back(rename_symbols(a, names));
      return applied(to(e.name()), std::move(args));
    }
    case ExprKind::Derivative:
      return derivative(rename_symbols(e.body(), names), to(e.var()), e.order());
    case ExprKind::Integral:
      return integral(rename_symbols(e.body(), names), to(e.var()));
    default:
      return rebuild(e, [&](const Expr& c) { return rename_symbols(c, names); });
  }
}

Equation rename_symbols(const Equation& eq, const std::map<std::string, std::string>& names) {
  return {rename_symbols(eq.lhs, names), rename_symbols(eq.rhs, names)};
}

Expr substitute(const Expr& e, const Expr& target, const Expr& replacement) {
  if (e == target) return replacement;
  if (e.node_count() <= target.node_count()) return e;
  return rebuild(e, [&](const Expr& c) { return substitute(c, target, replacement); });
}

Equation substitute(const Equation& eq, const Expr& target, const Expr& replacement) {
  return {substitute(eq.lhs, target, replacement), substitute(eq.rhs, target, replacement)};
}

bool contains(const Expr& e, const Expr& target) {
  if (e == target) return true;
  if (e.node_count() <= target.node_count()) return false;
  for (const auto& c : e.operands()) {
    if (contains(c, target)) return true;
  }
  return false;
}

bool contains(const Equation& eq, const Expr& target) {
  return contains(eq.lhs, target) || contains(eq.rhs, target);
}

namespace {

void collect_names(const Expr& e, bool include_functions, std::set<std::string>& out) {
  switch (e.kind()) {
    case ExprKind::Symbol:
      out.insert(e.name());
      return;
    case ExprKind::Applied:
      if (include_functions) out.insert(e.name());
      break;
    case ExprKind::Derivative:
    case ExprKind::Integral:
      out.insert(e.var());
      break;
    default:
      break;
  }
  for (const auto& c : e.operands()) collect_names(c, include_functions, out);
}

}  // namespace

std::vector<std::string> free_symbols(const Expr& e) {
  std::set<std::string> s;
  collect_names(e, true, s);
  return {s.begin(), s.end()};
}

std::vector<std::string> free_symbols(const Equation& eq) {
  std::set<std::string> s;
  collect_names(eq.lhs, true, s);
  collect_names(eq.rhs, true, s);
  return {s.begin(), s.end()};
}

std::vector<std::string> variables(const Expr& e) {
  std::set<std::string> s;
  collect_names(e, false, s);
  return {s.begin(), s.end()};
}

std::vector<std::string> variables(const Equation& eq) {
  std::set<std::string> s;
  collect_names(eq.lhs, false, s);
  collect_names(eq.rhs, false, s);
  return {s.begin(), s.end()};
}

bool depends_on(const Expr& e, const std::string& var) {
  switch (e.kind()) {
    case ExprKind::Symbol:
      return e.name() == var;
    case ExprKind::Integral:
      // An indefinite integral over var is a function of var.
      return e.var() == var || depends_on(e.body(), var);
    default:
      break;
  }
  for (const auto& c : e.operands()) {
    if (depends_on(c, var)) return true;
  }
  return false;
}

std::vector<Expr> subexpressions(const Expr& e) {
  std::vector<Expr> out;
  std::unordered_set<Expr, ExprHash> seen;
  auto visit = [&](auto&& self, const Expr& x) -> void {
    if (!seen.insert(x).second) return;
    out.push_back(x);
    for (const auto& c : x.operands()) self(self, c);
  };
  visit(visit, e);
  return out;
}

double eval_numeric(const Expr& e, const std::map<std::string, double>& bindings) {
  auto finite = [](double v) {
    if (!std::isfinite(v)) throw DomainError("non-finite intermediate value");
    return v;
  };
  switch (e.kind()) {
    case ExprKind::Integer:
    case ExprKind::Rational:
      return e.value().convert_to<double>();
    case ExprKind::Symbol: {
      auto it = bindings.find(e.name());
      if (it == bindings.end()) throw UnboundSymbolError("unbound symbol: " + e.name());
      return it->second;
    }
    case ExprKind::Func: {
      const double a = eval_numeric(e.arg(), bindings);
      switch (e.func()) {
        case FuncKind::Sin: return std::sin(a);
        case FuncKind::Cos: return std::cos(a);
        case FuncKind::Exp: return finite(std::exp(a));
        case FuncKind::Log:
          if (a <= 0.0) throw DomainError("log of non-positive value");
          return std::log(a);
      }
      break;
    }
    case ExprKind::Pow:
      return finite(std::pow(eval_numeric(e.base(), bindings), eval_numeric(e.exponent(), bindings)));
    case ExprKind::Mul: {
      double acc = 1.0;
      for (const auto& f : e.operands()) acc *= eval_numeric(f, bindings);
      return finite(acc);
    }
    case ExprKind::Add: {
      double acc = 0.0;
      for (const auto& t : e.operands()) acc += eval_numeric(t, bindings);
      return finite(acc);
    }
    case ExprKind::Applied:
      throw UnboundSymbolError("cannot evaluate applied function " + e.name());
    case ExprKind::Derivative:
    case ExprKind::Integral:
      throw UnboundSymbolError("cannot evaluate unevaluated derivative or integral");
  }
  throw EvalError("unknown expression kind");
}

}  // namespace eqderiv
