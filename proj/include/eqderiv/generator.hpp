#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "eqderiv/ops.hpp"
#include "eqderiv/records.hpp"
#include "eqderiv/rng.hpp"
#include "eqderiv/symbols.hpp"

namespace eqderiv {

struct GenConfig {
  // Relative weights of the generation hyperparameters.
  double p_history = 10;
  double p_arity_0 = 5;
  double p_renaming = 1;
  double p_arity_1 = 50;
  double p_evaluate = 50;
  double p_arity_2 = 100;
  double p_int_or_diff = 1;
  double p_subs = 5;
  // Share of the 2 * p_int_or_diff calculus weight that goes to Diff.
  double diff_share = 2.0 / 3;
  // Weights inside their arity class for ops without a named hyperparameter.
  double p_basic = 0.5;       // + - x / X^O
  double p_extension = 0.1;   // Negate, SwapSides, ExpBothSides, LogBothSides
  double p_add_eq = 0.05;     // AddEq
  double p_new_premise = 4;   // arity 0: inject a fresh premise
  double p_define = 0.5;      // arity 0: DefineFromExpr

  double length_mean = 7;
  double length_sigma = 3;
  int length_min = 4;
  int length_max = 10;

  std::size_t max_latex_chars = 350;
  std::size_t max_prompt_tokens = 512;
  int retry_cap = 100;
  int iteration_cap = 1000;  // total step attempts per derivation
  int attempt_cap = 200;     // derivation attempts per dataset record

  bool extensions = true;
  std::string vocabulary_path;  // empty: builtin vocabulary
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// `name(args) = body` with a fresh head and 1-3 arguments. Arguments are
/// reused from `reuse` with probability one half, otherwise fresh.
Equation generate_premise(const SymbolTable& vocab, Rng& rng, const std::set<std::string>& used = {},
                          const std::vector<std::string>& reuse = {});

/// Keeps the steps that reach the last one through parent links, in order,
/// with parent indices remapped and roles reassigned.
Derivation extract_derivation(const std::vector<Step>& steps);

class Generator {
 public:
  explicit Generator(GenConfig cfg);
  Generator(GenConfig cfg, SymbolTable vocab);

  const GenConfig& config() const { return cfg_; }
  const SymbolTable& vocabulary() const { return vocab_; }
  OpRegistry& registry() { return registry_; }
  const OpRegistry& registry() const { return registry_; }

  /// Closed-form probability that draw_op returns each op (Premise stands for
  /// new-premise injection).
  std::vector<std::pair<OpId, double>> op_probabilities() const;
  OpId draw_op(Rng& rng) const;

  int sample_length(Rng& rng) const;
  std::optional<Step> step(const Derivation& d, Rng& rng) const;
  /// One attempt of `op` on fixed parents, with operands sampled as in step().
  std::optional<Step> step_from(OpId op, const Derivation& d, std::vector<std::size_t> parents, Rng& rng) const;
  std::optional<Derivation> generate_derivation(Rng& rng, const std::optional<Derivation>& prior = {}) const;

 private:
  std::vector<std::pair<OpId, double>> arity_ops(int arity) const;
  std::optional<Step> attempt(OpId op, const Derivation& d, Rng& rng) const;
  std::optional<Step> attempt_with(OpId op, const Derivation& d, std::vector<std::size_t> parents, Rng& rng) const;
  template <typename F>
  std::optional<Step> guarded(F&& make) const;
  bool acceptable(const Equation& eq) const;

  GenConfig cfg_;
  SymbolTable vocab_;
  OpRegistry registry_;
};

struct DatasetReport {
  std::size_t requested = 0;
  std::size_t produced = 0;
  std::size_t attempts = 0;
  std::size_t retry_exhausted = 0;
  std::size_t token_filtered = 0;
  std::size_t length_filtered = 0;
  std::size_t records_missing = 0;  // records whose attempt cap ran out
};

/// Record i uses streams derived from (cfg.seed, i); output is ordered by
/// index and identical for any thread count.
std::vector<DerivationRecord> generate_dataset(const Generator& gen, std::size_t n, DatasetReport* report = nullptr);

/// Regenerates the derivation stored under a record seed.
std::optional<Derivation> regenerate(const Generator& gen, std::uint64_t record_seed);

/// Whether the record passes the length and prompt-token filters.
bool within_budget(const Derivation& d, const GenConfig& cfg);

}  // namespace eqderiv
