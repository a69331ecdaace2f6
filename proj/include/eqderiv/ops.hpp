#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eqderiv/expr.hpp"
#include "eqderiv/rng.hpp"
#include "eqderiv/symbols.hpp"

namespace eqderiv {

enum class OpId : std::uint8_t {
  Premise,  // annotation for given equations; not an operation
  AddExpr,
  SubExpr,
  MulExpr,
  DivExpr,
  Diff,
  Int,
  EvalDiff,
  EvalInt,
  SubstLhs,
  SubstRhs,
  Rename,
  PowExpr,
  Negate,
  SwapSides,
  ExpBothSides,
  LogBothSides,
  AddEq,
  DefineFromExpr,
};

struct OpInfo {
  OpId id;
  std::string_view name;    // stable identifier used in files
  std::string_view symbol;  // short label used in chain tables
  int arity;
  bool takes_operand;
  bool extension;  // not one of the twelve named operations
  std::optional<OpId> inverse;
};

/// The 18 operations, in OpId order (Premise excluded).
std::span<const OpInfo> all_ops();
const OpInfo& op_info(OpId op);
std::string_view op_name(OpId op);
std::optional<OpId> op_from_name(std::string_view name);

enum class StepRole : std::uint8_t { Premise, Intermediate, Ordinary, Goal };

std::string_view role_name(StepRole role);
std::optional<StepRole> role_from_name(std::string_view name);

struct Step {
  Equation equation;
  OpId op{OpId::Premise};
  std::vector<std::size_t> parents;
  std::optional<Expr> operand;
  StepRole role{StepRole::Ordinary};
};

struct Derivation {
  std::vector<Step> steps;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  const Step& back() const { return steps.back(); }
};

class ArityMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InapplicableOp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pure application of `op` to parent equations. `fresh_name` is the head for
/// the new function introduced by Rename and DefineFromExpr. Throws
/// ArityMismatch or InapplicableOp.
Equation apply_op(OpId op, std::span<const Equation> parents, const std::optional<Expr>& operand,
                  const std::string& fresh_name = {});

/// Symbol names of `e` in pre-order of first appearance, with a derivative
/// or integral variable listed before its body. Used as the argument list of
/// newly named functions.
std::vector<std::string> ordered_variables(const Expr& e);

/// Every name (symbols and function heads) used anywhere in `d`.
std::set<std::string> used_names(const Derivation& d);
std::set<std::string> used_names(std::span<const Step> steps);

/// Operation set with per-op enable flags.
class OpRegistry {
 public:
  explicit OpRegistry(bool extensions = true);

  void set_enabled(OpId op, bool on);
  bool enabled(OpId op) const;
  std::vector<OpId> ops_of_arity(int arity) const;
  std::vector<OpId> enabled_ops() const;

 private:
  std::vector<bool> enabled_;
};

/// Applies `op` to steps of `d`, drawing a fresh function name from `vocab`
/// with `rng` when the op needs one. The returned step has role Ordinary
/// (Premise when it has no parents).
Step apply(OpId op, const Derivation& d, std::vector<std::size_t> parents,
           std::optional<Expr> operand, Rng& rng, const SymbolTable& vocab = SymbolTable::builtin());

/// Normalized recency weights: step i of n gets p_history^(-(n-1-i)/n).
std::vector<double> history_weights(std::size_t n, double p_history);
std::size_t sample_history_index(std::size_t n, Rng& rng, double p_history);

/// Sub-expressions of the equation at a recency-weighted step, drawn
/// uniformly (zero excluded).
std::vector<Expr> operand_candidates(const Equation& eq);
Expr sample_operand(const Derivation& d, Rng& rng, double p_history);

/// Premise for parentless steps, Goal for the last step, Intermediate for
/// other EvalDiff/EvalInt results, Ordinary otherwise.
void assign_roles(Derivation& d);

/// Every step other than the last reaches the last step through parent links.
bool is_dag_coherent(const Derivation& d);

struct ValidityReport {
  bool valid = true;
  std::optional<std::size_t> first_invalid;
  std::string reason;
};

/// Re-executes every step and checks structure (parent order, arity,
/// duplicates, roles, DAG coherence). Premise steps are accepted as given.
ValidityReport replay(const Derivation& d);

}  // namespace eqderiv
