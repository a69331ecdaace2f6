#include "eqderiv/stats.hpp"

#include <algorithm>

namespace eqderiv {

std::vector<OpId> chain_of(const Derivation& d) {
  std::vector<OpId> out;
  for (std::size_t i = 1; i < d.size(); ++i) out.push_back(d.steps[i].op);
  return out;
}

std::string chain_label(const std::vector<OpId>& chain) {
  std::string out;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    if (i) out += " → ";
    out += op_info(chain[i]).symbol;
  }
  return out;
}

StatsSummary compute_stats(const std::vector<Derivation>& derivations) {
  StatsSummary s;
  s.derivations = derivations.size();
  std::map<OpId, std::size_t> op_counts;
  std::map<int, std::map<std::vector<OpId>, std::size_t>> by_length;
  std::size_t multi = 0;
  for (const auto& d : derivations) {
    const int len = static_cast<int>(d.size());
    ++s.length_counts[len];
    std::size_t premises = 0;
    for (const auto& st : d.steps) {
      if (st.parents.empty()) {
        ++premises;
        continue;
      }
      ++op_counts[st.op];
      ++s.derived_equations;
    }
    if (premises > 1) ++multi;
    ++by_length[len][chain_of(d)];
  }
  if (s.derivations == 0) return s;
  const auto n = static_cast<double>(s.derivations);
  for (const auto& [len, c] : s.length_counts) s.p_length[len] = static_cast<double>(c) / n;
  for (const auto& info : all_ops()) {
    const auto it = op_counts.find(info.id);
    const double c = it == op_counts.end() ? 0.0 : static_cast<double>(it->second);
    s.p_op.emplace_back(info.id, s.derived_equations ? c / static_cast<double>(s.derived_equations) : 0.0);
  }
  for (const auto& [len, chains] : by_length) {
    LengthChains lc;
    lc.length = len;
    lc.derivations = s.length_counts[len];
    lc.distinct = chains.size();
    for (const auto& [chain, count] : chains) {
      ChainRow row;
      row.chain = chain;
      row.count = count;
      row.p = static_cast<double>(count) / static_cast<double>(lc.derivations);
      row.relative = relative_frequency(row.p, lc.distinct);
      lc.rows.push_back(std::move(row));
    }
    std::sort(lc.rows.begin(), lc.rows.end(), [](const ChainRow& a, const ChainRow& b) {
      if (a.count != b.count) return a.count > b.count;
      return chain_label(a.chain) < chain_label(b.chain);
    });
    s.chains.push_back(std::move(lc));
  }
  s.multi_premise_fraction = static_cast<double>(multi) / n;
  return s;
}

Json stats_json(const StatsSummary& s, std::size_t top) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["derivations"] = s.derivations;
  j["derived_equations"] = s.derived_equations;
  Json pl = Json::object();
  for (const auto& [len, p] : s.p_length) pl[std::to_string(len)] = p;
  j["p_length"] = std::move(pl);
  Json po = Json::object();
  for (const auto& [op, p] : s.p_op) po[std::string(op_info(op).symbol)] = p;
  j["p_op"] = std::move(po);
  Json chains = Json::array();
  for (const auto& lc : s.chains) {
    Json e;
    e["length"] = lc.length;
    e["derivations"] = lc.derivations;
    e["permutations"] = lc.distinct;
    Json rows = Json::array();
    for (std::size_t i = 0; i < lc.rows.size() && (top == 0 || i < top); ++i) {
      const auto& r = lc.rows[i];
      rows.push_back({{"chain", chain_label(r.chain)},
                      {"count", r.count},
                      {"p_chain", r.p},
                      {"relative_frequency", r.relative}});
    }
    e["chains"] = std::move(rows);
    chains.push_back(std::move(e));
  }
  j["chains"] = std::move(chains);
  j["multi_premise_fraction"] = s.multi_premise_fraction;
  return j;
}

}  // namespace eqderiv
