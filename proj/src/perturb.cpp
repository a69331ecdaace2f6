#include "eqderiv/perturb.hpp"

#include <algorithm>
#include <set>

#include "eqderiv/canonical.hpp"

namespace eqderiv {

namespace {

void collect_names(const Expr& e, std::vector<std::string>& out, std::set<std::string>& seen) {
  auto note = [&](const std::string& n) {
    if (seen.insert(n).second) out.push_back(n);
  };
  if (e.is(ExprKind::Symbol) || e.is(ExprKind::Applied)) note(e.name());
  if (e.is(ExprKind::Derivative) || e.is(ExprKind::Integral)) note(e.var());
  for (const auto& c : e.operands()) collect_names(c, out, seen);
}

std::string record_suffix(Perturbation p) { return "-" + std::string(perturbation_name(p)); }

}  // namespace

std::vector<std::string> names_in_order(const Derivation& d) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& s : d.steps) {
    collect_names(s.equation.lhs, out, seen);
    collect_names(s.equation.rhs, out, seen);
    if (s.operand) collect_names(*s.operand, out, seen);
  }
  return out;
}

Derivation rename_variables(const Derivation& d, const std::map<std::string, std::string>& names) {
  Derivation out = d;
  for (auto& s : out.steps) {
    s.equation = rename_symbols(s.equation, names);
    if (s.operand) s.operand = rename_symbols(*s.operand, names);
  }
  return out;
}

std::map<std::string, std::string> sample_renaming(const Derivation& d, const std::vector<std::string>& pool,
                                                   Rng& rng) {
  const auto names = names_in_order(d);
  if (names.size() > pool.size()) {
    throw TooManySymbols(std::to_string(names.size()) + " symbols but the renaming pool has " +
                         std::to_string(pool.size()));
  }
  std::vector<std::string> letters = pool;
  for (std::size_t i = letters.size(); i > 1; --i) std::swap(letters[i - 1], letters[rng.below(i)]);
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < names.size(); ++i) out[names[i]] = letters[i];
  return out;
}

Derivation rename_variables(const Derivation& d, const std::vector<std::string>& pool, Rng& rng) {
  return rename_variables(d, sample_renaming(d, pool, rng));
}

bool isomorphic_under(const Derivation& a, const Derivation& b, const std::map<std::string, std::string>& names) {
  if (a.size() != b.size()) return false;
  std::map<std::string, std::string> inverse;
  for (const auto& [from, to] : names) {
    if (!inverse.emplace(to, from).second) return false;
  }
  const Derivation back = rename_variables(b, inverse);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Step& x = a.steps[i];
    const Step& y = back.steps[i];
    if (x.equation != y.equation || x.op != y.op || x.parents != y.parents || x.role != y.role) return false;
    if (x.operand.has_value() != y.operand.has_value()) return false;
    if (x.operand && *x.operand != *y.operand) return false;
  }
  return true;
}

Derivation exchange_expressions(const Derivation& d) {
  Derivation out = d;
  for (auto& s : out.steps) std::swap(s.equation.lhs, s.equation.rhs);
  return out;
}

Derivation alternative_goal(const Derivation& d, const Generator& gen, Rng& rng) {
  if (d.size() < 2) throw std::invalid_argument("alternative goal needs at least two steps");
  Derivation prefix;
  prefix.steps.assign(d.steps.begin(), d.steps.end() - 1);
  const std::size_t pen = prefix.size() - 1;

  // Steps with no path to the penultimate one have to feed the new goal as
  // its second parent; that works only when one of them reaches the rest.
  auto reach_from = [&](std::vector<std::size_t> roots) {
    std::vector<bool> reaches(prefix.size(), false);
    for (auto r : roots) reaches[r] = true;
    for (std::size_t i = prefix.size(); i-- > 0;) {
      if (!reaches[i]) continue;
      for (auto p : prefix.steps[i].parents) reaches[p] = true;
    }
    return reaches;
  };
  std::optional<std::size_t> orphan;
  if (const auto reaches = reach_from({pen}); std::find(reaches.begin(), reaches.end(), false) != reaches.end()) {
    std::size_t last = 0;
    for (std::size_t i = 0; i < pen; ++i) {
      if (!reaches[i]) last = i;
    }
    const auto both = reach_from({pen, last});
    if (std::find(both.begin(), both.end(), false) != both.end()) {
      throw GoalExhausted("steps would be left without a path to the goal");
    }
    orphan = last;
  }
  const auto binary = gen.registry().ops_of_arity(2);
  if (orphan && binary.empty()) throw GoalExhausted("no binary operation to keep the derivation coherent");

  const Equation& old_goal = d.back().equation;
  const int cap = gen.config().retry_cap;
  for (int tries = 0; tries < cap;) {
    // With an orphan the op must be binary; those are drawn uniformly since
    // their weights are skewed toward substitution, which rarely applies.
    const OpId op = orphan ? rng.pick(binary) : gen.draw_op(rng);
    const int arity = op == OpId::Premise ? 0 : op_info(op).arity;
    if (arity == 0) continue;
    ++tries;
    std::vector<std::size_t> parents{pen};
    if (arity == 2) {
      std::size_t other;
      if (orphan) {
        other = *orphan;
      } else {
        if (pen == 0) continue;
        auto w = history_weights(prefix.size(), gen.config().p_history);
        w[pen] = 0.0;
        other = rng.weighted(w);
      }
      parents.push_back(other);
      if (rng.bernoulli(0.5)) std::swap(parents[0], parents[1]);
    }
    auto s = gen.step_from(op, prefix, std::move(parents), rng);
    if (!s || s->equation == old_goal) continue;
    const bool duplicate = std::any_of(prefix.steps.begin(), prefix.steps.end(),
                                       [&](const Step& t) { return t.equation == s->equation; });
    if (duplicate) continue;
    if (s->op == OpId::EvalInt) {
      const bool evaluated = std::any_of(prefix.steps.begin(), prefix.steps.end(), [&](const Step& t) {
        return t.op == OpId::EvalInt && t.parents == s->parents;
      });
      if (evaluated) continue;
    }
    Derivation out = prefix;
    s->role = StepRole::Goal;
    out.steps.push_back(std::move(*s));
    return out;
  }
  throw GoalExhausted("no differing goal after " + std::to_string(cap) + " attempts");
}

std::optional<PromptRecord> remove_steps(const PromptRecord& p) {
  static constexpr std::string_view clause = ", then derive $";
  if (p.prompt.find(clause) == std::string::npos) return std::nullopt;
  PromptRecord out = p;
  std::string text;
  std::size_t pos = 0;
  while (true) {
    const auto at = p.prompt.find(clause, pos);
    if (at == std::string::npos) break;
    text.append(p.prompt, pos, at - pos);
    const auto close = p.prompt.find('$', at + clause.size());
    pos = close == std::string::npos ? p.prompt.size() : close + 1;
  }
  text.append(p.prompt, pos, std::string::npos);
  out.prompt = std::move(text);
  out.intermediates.clear();
  out.perturbation = Perturbation::SR;
  if (!p.static_id.empty()) out.id = p.static_id + record_suffix(Perturbation::SR);
  return out;
}

std::optional<DerivationRecord> perturb_record(const DerivationRecord& r, Perturbation kind, const Generator& gen,
                                               const std::vector<std::string>& pool) {
  DerivationRecord out = r;
  out.static_id = r.static_id.empty() ? r.id : r.static_id;
  out.id = out.static_id + record_suffix(kind);
  out.perturbation = kind;
  // Each record gets its own stream so output does not depend on order.
  Rng rng(Rng::derive_seed(r.seed, static_cast<std::uint64_t>(kind) + 1));
  switch (kind) {
    case Perturbation::VR:
      try {
        out.derivation = rename_variables(r.derivation, pool, rng);
      } catch (const TooManySymbols&) {
        return std::nullopt;
      }
      if (!within_budget(out.derivation, gen.config())) return std::nullopt;
      break;
    case Perturbation::EE:
      out.derivation = exchange_expressions(r.derivation);
      if (r.perturbation == Perturbation::EE) {
        // Exchanging back restores the static record.
        out.id = out.static_id;
        out.static_id.clear();
        out.perturbation.reset();
      }
      break;
    case Perturbation::AG:
      try {
        out.derivation = alternative_goal(r.derivation, gen, rng);
      } catch (const GoalExhausted&) {
        return std::nullopt;
      }
      if (!within_budget(out.derivation, gen.config())) return std::nullopt;
      break;
    case Perturbation::SR:
      break;
  }
  return out;
}

}  // namespace eqderiv
