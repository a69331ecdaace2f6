#pragma once

#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqderiv/expr.hpp"
#include "eqderiv/symbols.hpp"

namespace eqderiv {

class NoDerivativePresent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoIntegralPresent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// d/dv e. Unknown functions of v become Derivative nodes; d/dv of an
/// integral over v returns the integrand.
Expr differentiate(const Expr& e, const std::string& v);

/// One entry of the integration table, instantiated at a variable.
struct IntegralRule {
  std::string label;
  Expr integrand;
  Expr antiderivative;
};

/// Table-driven integration: constant multiples and sums of 1, v^n, 1/v,
/// e^v, sin v, cos v and log v. Constants of integration come from
/// `constant_pool` minus whatever is already in use.
class IntegralTable {
 public:
  IntegralTable();  // pool = builtin vocabulary
  explicit IntegralTable(std::vector<std::string> constant_pool);

  /// Antiderivative without a constant, or nullopt on a table miss.
  std::optional<Expr> antiderivative(const Expr& e, const std::string& v) const;

  /// Antiderivative plus a fresh constant, or nullopt on a table miss or an
  /// exhausted pool.
  std::optional<Expr> integrate(const Expr& e, const std::string& v,
                                const std::set<std::string>& used) const;

  std::optional<std::string> fresh_constant(const std::set<std::string>& used) const;
  const std::vector<std::string>& constant_pool() const { return pool_; }

  /// The rules instantiated at symbol `v`, for tests and documentation.
  static std::vector<IntegralRule> rules(const std::string& v);

  static const IntegralTable& standard();

 private:
  std::vector<std::string> pool_;
};

/// An integral whose body has no Applied, Derivative or Integral node.
bool is_evaluable_integral(const Expr& e);
std::size_t count_evaluable_integrals(const Expr& e);

/// Replaces every Derivative node by its evaluation, innermost first.
/// Throws NoDerivativePresent when that changes nothing.
Equation evaluate_derivatives(const Equation& eq);
Expr evaluate_derivatives(const Expr& e);

/// Evaluates every evaluable integral, each with its own constant taken from
/// `constants` in order. Returns nullopt on a table miss or when there are
/// fewer constants than integrals. Throws NoIntegralPresent when nothing is
/// evaluable.
std::optional<Equation> evaluate_integrals(const Equation& eq,
                                           const std::vector<std::string>& constants,
                                           const IntegralTable& table = IntegralTable::standard());

/// As above, drawing constants from the table pool minus `used` (plus the
/// symbols of `eq`).
std::optional<Equation> evaluate_integrals(const Equation& eq, const std::set<std::string>& used,
                                           const IntegralTable& table = IntegralTable::standard());

}  // namespace eqderiv
