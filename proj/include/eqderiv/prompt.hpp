#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "eqderiv/ops.hpp"
#include "eqderiv/rng.hpp"

namespace eqderiv {

inline constexpr std::string_view kFewshotHeader =
    "The following examples consist of a prompt (denoted by Prompt:) and a mathematical derivation "
    "(denoted by Derivation:). Each derivation contains LaTeX equations separated by \"and\".";
inline constexpr std::string_view kFewshotInstruction =
    "Now given the following prompt, generate the derivation. Ensure equations are split by the word \"and\".";

enum class Perturbation { VR, EE, AG, SR };

std::string_view perturbation_name(Perturbation p);
std::optional<Perturbation> perturbation_from_name(std::string_view name);

struct PromptRecord {
  std::string id;
  std::string static_id;
  std::optional<Perturbation> perturbation;
  std::string prompt;
  std::string target;
  std::vector<std::size_t> premises;
  std::vector<std::size_t> intermediates;
  std::size_t goal = 0;
};

class RoleMissing : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InsufficientPool : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// "Given $P1$ and $P2$, then derive $I$, then obtain $G$". Throws
/// RoleMissing when the last step is not annotated as the goal.
PromptRecord build_prompt(const Derivation& d, const std::string& id = {});

/// Bare LaTeX equations joined by " and ".
std::string build_target(const Derivation& d);

/// Splits a target back into its equation strings.
std::vector<std::string> split_target(const std::string& target);

/// Equation strings between "$" delimiters, in prompt order.
std::vector<std::string> prompt_equations(const std::string& prompt);

/// Whether a prompt has both a "then derive" clause and more than one premise.
bool is_qualifying_example(const PromptRecord& r);

/// Five examples from `pool` (at least two qualifying), then the evaluation
/// prompt. Records sharing p's static_id are never used as examples.
std::string build_fewshot(const PromptRecord& p, const std::vector<PromptRecord>& pool, Rng& rng);

/// Lexeme count used for the prompt+target budget: a backslash command,
/// a run of letters, a run of digits, or any other non-space character.
std::size_t estimate_tokens(std::string_view text);

}  // namespace eqderiv
