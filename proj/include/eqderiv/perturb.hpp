#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "eqderiv/generator.hpp"
#include "eqderiv/ops.hpp"
#include "eqderiv/prompt.hpp"
#include "eqderiv/records.hpp"
#include "eqderiv/rng.hpp"

namespace eqderiv {

class TooManySymbols : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GoalExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every name in `d` (symbols, function heads, derivative and integral
/// variables, operands) in order of first appearance.
std::vector<std::string> names_in_order(const Derivation& d);

/// Applies a name map to every equation and operand.
Derivation rename_variables(const Derivation& d, const std::map<std::string, std::string>& names);

/// Maps each name of `d` to a distinct letter drawn from `pool`. Throws
/// TooManySymbols when `d` has more names than the pool.
std::map<std::string, std::string> sample_renaming(const Derivation& d, const std::vector<std::string>& pool,
                                                   Rng& rng);

/// Variable renaming (VR).
Derivation rename_variables(const Derivation& d, const std::vector<std::string>& pool, Rng& rng);

/// Whether `b` is `a` with names replaced by `names` (renaming `b` back by the
/// inverse map recovers `a` exactly). `names` must be injective.
bool isomorphic_under(const Derivation& a, const Derivation& b, const std::map<std::string, std::string>& names);

/// Expression exchange (EE): lhs and rhs of every equation swapped.
Derivation exchange_expressions(const Derivation& d);

/// Alternative goal (AG): the final step is replaced by a different op applied
/// to the penultimate equation. Steps that only fed the old goal become
/// second parents of the new one. Throws GoalExhausted after
/// cfg.retry_cap failed attempts.
Derivation alternative_goal(const Derivation& d, const Generator& gen, Rng& rng);

/// Step removal (SR): the prompt without its "then derive" clauses, or
/// nullopt when there are none.
std::optional<PromptRecord> remove_steps(const PromptRecord& p);

/// Applies a perturbation to a static derivation record. VR, EE and AG return
/// nullopt when the result fails the token budget or AG is exhausted; SR
/// returns the record unchanged (it acts on prompts only).
std::optional<DerivationRecord> perturb_record(const DerivationRecord& r, Perturbation kind, const Generator& gen,
                                               const std::vector<std::string>& pool = default_renaming_pool());

}  // namespace eqderiv
