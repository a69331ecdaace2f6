#include "doctest.h"
#include "eqderiv/generator.hpp"
#include "eqderiv/stats.hpp"
#include "support.hpp"

using namespace eqderiv;
using namespace eqderiv::testing;

namespace {

// Only ops and parents matter to the statistics.
Derivation shape(const std::vector<OpId>& ops) {
  Derivation d;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    Step s;
    s.op = ops[i];
    if (ops[i] != OpId::Premise) s.parents = {i - 1};
    d.steps.push_back(s);
  }
  return d;
}

}  // namespace

TEST_CASE("chain of the worked example") {
  const auto chain = chain_of(golden_derivation());
  CHECK(chain == std::vector<OpId>{OpId::Premise, OpId::SubstLhs, OpId::SubstLhs, OpId::EvalDiff, OpId::SubstRhs,
                                   OpId::ExpBothSides});
  CHECK(chain_label(chain) == "P → S_L → S_L → ∂_E → S_R → EXP");
  CHECK(chain_label({}) == "");
}

TEST_CASE("a length-L derivation has L - 1 chain entries") {
  const Derivation d = shape({OpId::Premise, OpId::Diff, OpId::EvalDiff, OpId::SubstLhs});
  CHECK(chain_label(chain_of(d)) == "∂ → ∂_E → S_L");
}

TEST_CASE("published chain table arithmetic") {
  CHECK(relative_frequency(0.0369, 842) == doctest::Approx(31.07).epsilon(1e-3));
  for (const auto& r : published_chain_table()) {
    INFO(r.length, " ", r.p_chain);
    CHECK(relative_consistent(r));
  }
  // Rounding P first can land a row one unit away; the interval check covers it.
  CHECK(std::lround(relative_frequency(0.0033, 3163)) == 10);
  CHECK_FALSE(relative_consistent({6, 3163, 0.0033, 12}));
}

TEST_CASE("compute_stats counts") {
  const std::vector<Derivation> ds{
      shape({OpId::Premise, OpId::Diff, OpId::EvalDiff, OpId::SubstLhs}),
      shape({OpId::Premise, OpId::Diff, OpId::EvalDiff, OpId::SubstLhs}),
      shape({OpId::Premise, OpId::Int, OpId::EvalInt, OpId::SubstLhs}),
      shape({OpId::Premise, OpId::Premise, OpId::AddExpr, OpId::Diff, OpId::EvalDiff}),
  };
  const StatsSummary s = compute_stats(ds);
  CHECK(s.derivations == 4);
  CHECK(s.derived_equations == 12);
  CHECK(s.length_counts == std::map<int, std::size_t>{{4, 3}, {5, 1}});
  CHECK(s.p_length.at(4) == doctest::Approx(0.75));
  CHECK(s.multi_premise_fraction == doctest::Approx(0.25));
  double total = 0;
  for (auto& [op, p] : s.p_op) {
    total += p;
    if (op == OpId::Diff) CHECK(p == doctest::Approx(3.0 / 12));
    if (op == OpId::Premise) CHECK(p == 0);
  }
  CHECK(total == doctest::Approx(1.0));
  CHECK(s.p_op.size() == all_ops().size());
  REQUIRE(s.chains.size() == 2);
  const LengthChains& four = s.chains[0];
  CHECK(four.length == 4);
  CHECK(four.derivations == 3);
  CHECK(four.distinct == 2);
  REQUIRE(four.rows.size() == 2);
  CHECK(chain_label(four.rows[0].chain) == "∂ → ∂_E → S_L");
  CHECK(four.rows[0].count == 2);
  CHECK(four.rows[0].p == doctest::Approx(2.0 / 3));
  CHECK(four.rows[0].relative == doctest::Approx(4.0 / 3));
  CHECK(chain_label(s.chains[1].rows[0].chain) == "P → + → ∂ → ∂_E");
}

TEST_CASE("relative frequencies average to one within a length") {
  GenConfig cfg;
  cfg.seed = 3;
  cfg.threads = 1;
  std::vector<Derivation> ds;
  for (const auto& r : generate_dataset(Generator(cfg), 150)) ds.push_back(r.derivation);
  const StatsSummary s = compute_stats(ds);
  std::size_t n = 0;
  for (const auto& lc : s.chains) {
    double mean = 0;
    std::size_t count = 0;
    for (const auto& r : lc.rows) {
      mean += r.relative;
      count += r.count;
    }
    CHECK(mean / static_cast<double>(lc.rows.size()) == doctest::Approx(1.0));
    CHECK(count == lc.derivations);
    for (std::size_t i = 1; i < lc.rows.size(); ++i) CHECK(lc.rows[i - 1].count >= lc.rows[i].count);
    n += lc.derivations;
  }
  CHECK(n == ds.size());
}

TEST_CASE("stats json") {
  const std::vector<Derivation> ds{shape({OpId::Premise, OpId::Diff, OpId::EvalDiff, OpId::SubstLhs}),
                                   shape({OpId::Premise, OpId::Int, OpId::EvalInt, OpId::SubstLhs})};
  const Json j = stats_json(compute_stats(ds), 1);
  CHECK(j.at("derivations") == 2);
  CHECK(j.at("p_length").at("4") == 1.0);
  CHECK(j.at("p_op").contains("∂"));
  REQUIRE(j.at("chains").size() == 1);
  CHECK(j.at("chains")[0].at("permutations") == 2);
  CHECK(j.at("chains")[0].at("chains").size() == 1);
  CHECK(stats_json(compute_stats(ds), 0).at("chains")[0].at("chains").size() == 2);
  CHECK(compute_stats({}).derivations == 0);
}
