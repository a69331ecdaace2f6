#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "eqderiv/ops.hpp"
#include "eqderiv/records.hpp"

namespace eqderiv {

/// Ops of every step after the first, in order. Later premises appear as
/// Premise ("P"), so a derivation of length L has a chain of L - 1 entries.
std::vector<OpId> chain_of(const Derivation& d);

/// Chain label such as "∂ → ∂_E → S_L".
std::string chain_label(const std::vector<OpId>& chain);

/// Probability of a chain relative to the average over `distinct` chains.
inline double relative_frequency(double p_chain, std::size_t distinct) {
  return p_chain * static_cast<double>(distinct);
}

struct ChainRow {
  std::vector<OpId> chain;
  std::size_t count = 0;
  double p = 0;
  double relative = 0;
};

struct LengthChains {
  int length = 0;
  std::size_t derivations = 0;
  std::size_t distinct = 0;
  std::vector<ChainRow> rows;  // by count, descending; ties by label
};

struct StatsSummary {
  std::size_t derivations = 0;
  std::size_t derived_equations = 0;
  std::map<int, std::size_t> length_counts;
  std::map<int, double> p_length;
  std::vector<std::pair<OpId, double>> p_op;  // every op, in OpId order
  std::vector<LengthChains> chains;           // by length
  double multi_premise_fraction = 0;
};

StatsSummary compute_stats(const std::vector<Derivation>& derivations);

/// Summary as JSON; chain tables keep the `top` most frequent rows per length
/// (0 keeps all).
Json stats_json(const StatsSummary& s, std::size_t top = 10);

}  // namespace eqderiv
