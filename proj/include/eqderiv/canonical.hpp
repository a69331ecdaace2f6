#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqderiv/expr.hpp"

namespace eqderiv {

// Canonicalizing constructors. Every result is in canonical form provided the
// inputs are: sums and products flattened and sorted, like terms and like
// bases merged, numbers folded, a lone numeric coefficient distributed over a
// sum, x^0 = 1, x^1 = x, (x^a)^n = x^(a n) for integer n, exp(a) exp(b) =
// exp(a + b), exp/log cancel. No trigonometric or algebraic identities beyond
// that.
Expr add(std::vector<Expr> terms);
Expr add(const Expr& a, const Expr& b);
Expr mul(std::vector<Expr> factors);
Expr mul(const Expr& a, const Expr& b);
Expr pow(const Expr& base, const Expr& exponent);
Expr neg(const Expr& e);
Expr sub(const Expr& a, const Expr& b);
Expr div(const Expr& a, const Expr& b);
Expr func(FuncKind kind, const Expr& arg);
Expr sin(const Expr& arg);
Expr cos(const Expr& arg);
Expr exp(const Expr& arg);
Expr log(const Expr& arg);
Expr applied(std::string name, std::vector<Expr> args);
Expr derivative(const Expr& body, const std::string& var, int order = 1);
Expr integral(const Expr& body, const std::string& var);

inline Expr sym(std::string name) { return Expr::symbol(std::move(name)); }
inline Expr num(long long v) { return Expr::integer(v); }

/// Rebuilds `e` bottom-up through the canonical constructors. Idempotent.
Expr canonicalize(const Expr& e);
Equation canonicalize(const Equation& eq);

/// Splits a canonical term into numeric coefficient and remainder:
/// 3 x y -> (3, x y); 5 -> (5, 1); x -> (1, x).
std::pair<BigRational, Expr> split_coefficient(const Expr& term);

/// Replaces every complete-subtree occurrence of `target`, then
/// canonicalizes. Derivative and integral variables are names, not subtrees,
/// and are never replaced.
Expr substitute(const Expr& e, const Expr& target, const Expr& replacement);
Equation substitute(const Equation& eq, const Expr& target, const Expr& replacement);

/// Renames symbols, function heads and derivative/integral variables by
/// `names`, then canonicalizes. Names missing from the map are kept.
Expr rename_symbols(const Expr& e, const std::map<std::string, std::string>& names);
Equation rename_symbols(const Equation& eq, const std::map<std::string, std::string>& names);

bool contains(const Expr& e, const Expr& target);
bool contains(const Equation& eq, const Expr& target);

/// All Symbol and AppliedFunction names in `e` (including derivative and
/// integral variables), sorted.
std::vector<std::string> free_symbols(const Expr& e);
std::vector<std::string> free_symbols(const Equation& eq);

/// Symbol names only (no function names), sorted.
std::vector<std::string> variables(const Expr& e);
std::vector<std::string> variables(const Equation& eq);

/// True when `e` varies with the symbol `var`: it occurs anywhere in `e`, or
/// `e` contains an (indefinite) integral over `var`.
bool depends_on(const Expr& e, const std::string& var);

/// Every distinct subtree of `e` (including `e`), in pre-order of first
/// appearance.
std::vector<Expr> subexpressions(const Expr& e);

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnboundSymbolError : public EvalError {
 public:
  using EvalError::EvalError;
};

class DomainError : public EvalError {
 public:
  using EvalError::EvalError;
};

/// IEEE double evaluation. Throws UnboundSymbolError for symbols missing from
/// `bindings`, AppliedFunction, Derivative and Integral nodes; DomainError for
/// log of a non-positive value or a non-finite result.
double eval_numeric(const Expr& e, const std::map<std::string, double>& bindings);

}  // namespace eqderiv
