#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace eqderiv {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

enum class ExprKind : std::uint8_t {
  Integer,
  Rational,
  Symbol,
  Func,
  Applied,
  Pow,
  Mul,
  Add,
  Derivative,
  Integral,
};

enum class FuncKind : std::uint8_t { Sin, Cos, Exp, Log };

std::string_view func_name(FuncKind kind);

class Expr;

namespace detail {
struct Node;
struct Builder;
}

/// Immutable, reference-counted expression tree.
///
/// Nodes are shared between trees and never mutated after construction, so an
/// Expr can be copied and sent across threads freely. The static `make_*`
/// constructors build nodes verbatim; the free functions in canonical.hpp
/// build canonical forms.
class Expr {
 public:
  Expr();  // Integer(0)

  static Expr number(BigRational value);
  static Expr integer(long long value);
  static Expr rational(long long num, long long den);
  static Expr symbol(std::string name);
  static Expr make_func(FuncKind kind, Expr arg);
  static Expr make_applied(std::string name, std::vector<Expr> args);
  static Expr make_pow(Expr base, Expr exponent);
  static Expr make_mul(std::vector<Expr> factors);
  static Expr make_add(std::vector<Expr> terms);
  static Expr make_derivative(Expr body, std::string var, int order = 1);
  static Expr make_integral(Expr body, std::string var);

  ExprKind kind() const;
  bool is_number() const;
  bool is_integer() const;
  bool is_zero() const;
  bool is_one() const;
  bool is_negative_number() const;
  bool is(ExprKind k) const { return kind() == k; }

  const BigRational& value() const;  // Integer/Rational
  const std::string& name() const;   // Symbol/Applied
  const std::string& var() const;    // Derivative/Integral
  FuncKind func() const;
  int order() const;

  std::span<const Expr> operands() const;  // Add/Mul terms, Applied args
  const Expr& base() const;
  const Expr& exponent() const;
  const Expr& arg() const;   // Func
  const Expr& body() const;  // Derivative/Integral

  std::size_t hash() const;
  std::size_t node_count() const;
  const void* identity() const { return node_.get(); }

 private:
  friend struct detail::Builder;
  explicit Expr(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const detail::Node> node_;
};

/// Total structural order. Numbers < symbols < applied functions < elementary
/// functions < powers < products < sums < derivatives < integrals; ties broken
/// recursively.
int compare(const Expr& a, const Expr& b);

bool operator==(const Expr& a, const Expr& b);
inline bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }
inline bool operator<(const Expr& a, const Expr& b) { return compare(a, b) < 0; }

struct ExprHash {
  std::size_t operator()(const Expr& e) const { return e.hash(); }
};

/// An ordered pair lhs = rhs. Order-sensitive: (a = b) != (b = a).
struct Equation {
  Expr lhs;
  Expr rhs;

  friend bool operator==(const Equation& a, const Equation& b) {
    return a.lhs == b.lhs && a.rhs == b.rhs;
  }
  friend bool operator!=(const Equation& a, const Equation& b) { return !(a == b); }
  std::size_t hash() const;
};

struct EquationHash {
  std::size_t operator()(const Equation& e) const { return e.hash(); }
};

/// Debug form, e.g. "Add(Symbol(x), Mul(2, Symbol(y)))". Not LaTeX.
std::string debug_string(const Expr& e);

}  // namespace eqderiv
