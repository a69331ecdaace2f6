#include "eqderiv/ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_set>

#include "eqderiv/calculus.hpp"
#include "eqderiv/canonical.hpp"

namespace eqderiv {

namespace {

constexpr std::array<OpInfo, 18> kOps = {{
    {OpId::AddExpr, "AddExpr", "+", 1, true, false, OpId::SubExpr},
    {OpId::SubExpr, "SubExpr", "-", 1, true, false, OpId::AddExpr},
    {OpId::MulExpr, "MulExpr", "×", 1, true, false, OpId::DivExpr},
    {OpId::DivExpr, "DivExpr", "÷", 1, true, false, OpId::MulExpr},
    {OpId::Diff, "Diff", "∂", 1, true, false, std::nullopt},
    {OpId::Int, "Int", "∫", 1, true, false, std::nullopt},
    {OpId::EvalDiff, "EvalDiff", "∂_E", 1, false, false, std::nullopt},
    {OpId::EvalInt, "EvalInt", "∫_E", 1, true, false, std::nullopt},
    {OpId::SubstLhs, "SubstLhs", "S_L", 2, false, false, std::nullopt},
    {OpId::SubstRhs, "SubstRhs", "S_R", 2, false, false, std::nullopt},
    {OpId::Rename, "Rename", "R", 1, false, false, std::nullopt},
    {OpId::PowExpr, "PowExpr", "X^O", 1, true, false, std::nullopt},
    {OpId::Negate, "Negate", "N", 1, false, true, std::nullopt},
    {OpId::SwapSides, "SwapSides", "SW", 1, false, true, std::nullopt},
    {OpId::ExpBothSides, "ExpBothSides", "EXP", 1, false, true, OpId::LogBothSides},
    {OpId::LogBothSides, "LogBothSides", "LOG", 1, false, true, OpId::ExpBothSides},
    {OpId::AddEq, "AddEq", "+=", 2, false, true, std::nullopt},
    {OpId::DefineFromExpr, "DefineFromExpr", "D", 0, true, true, std::nullopt},
}};

constexpr OpInfo kPremiseInfo{OpId::Premise, "Premise", "P", 0, false, false, std::nullopt};

[[noreturn]] void inapplicable(const std::string& why) { throw InapplicableOp(why); }

const Expr& require_operand(const std::optional<Expr>& operand, OpId op) {
  if (!operand) throw ArityMismatch(std::string(op_name(op)) + " requires an operand");
  return *operand;
}

const std::string& require_symbol(const std::optional<Expr>& operand, OpId op) {
  const Expr& o = require_operand(operand, op);
  if (!o.is(ExprKind::Symbol)) inapplicable(std::string(op_name(op)) + " operand must be a symbol");
  return o.name();
}

bool has_variable(const Equation& eq, const std::string& v) {
  const auto vars = variables(eq);
  return std::binary_search(vars.begin(), vars.end(), v);
}

bool non_positive_number(const Expr& e) { return e.is_number() && e.value() <= 0; }

}  // namespace

std::span<const OpInfo> all_ops() { return kOps; }

const OpInfo& op_info(OpId op) {
  if (op == OpId::Premise) return kPremiseInfo;
  return kOps[static_cast<std::size_t>(op) - 1];
}

std::string_view op_name(OpId op) { return op_info(op).name; }

std::optional<OpId> op_from_name(std::string_view name) {
  if (name == kPremiseInfo.name) return OpId::Premise;
  for (const auto& info : kOps) {
    if (info.name == name) return info.id;
  }
  return std::nullopt;
}

std::string_view role_name(StepRole role) {
  switch (role) {
    case StepRole::Premise: return "premise";
    case StepRole::Intermediate: return "intermediate";
    case StepRole::Ordinary: return "ordinary";
    case StepRole::Goal: return "goal";
  }
  return "ordinary";
}

std::optional<StepRole> role_from_name(std::string_view name) {
  for (auto r : {StepRole::Premise, StepRole::Intermediate, StepRole::Ordinary, StepRole::Goal}) {
    if (role_name(r) == name) return r;
  }
  return std::nullopt;
}

std::vector<std::string> ordered_variables(const Expr& e) {
  std::vector<std::string> out;
  auto visit = [&](auto&& self, const Expr& x) -> void {
    auto note = [&](const std::string& n) {
      if (std::find(out.begin(), out.end(), n) == out.end()) out.push_back(n);
    };
    if (x.is(ExprKind::Symbol)) {
      note(x.name());
      return;
    }
    if (x.is(ExprKind::Derivative) || x.is(ExprKind::Integral)) note(x.var());
    for (const auto& c : x.operands()) self(self, c);
  };
  visit(visit, e);
  return out;
}

Equation apply_op(OpId op, std::span<const Equation> parents, const std::optional<Expr>& operand,
                  const std::string& fresh_name) {
  if (op == OpId::Premise) inapplicable("premises are given, not derived");
  const OpInfo& info = op_info(op);
  if (static_cast<int>(parents.size()) != info.arity) {
    throw ArityMismatch(std::string(info.name) + " expects " + std::to_string(info.arity) +
                        " parent(s), got " + std::to_string(parents.size()));
  }
  if (info.takes_operand && !operand) throw ArityMismatch(std::string(info.name) + " requires an operand");
  if (!info.takes_operand && operand) throw ArityMismatch(std::string(info.name) + " takes no operand");

  switch (op) {
    case OpId::AddExpr: {
      const Expr& o = *operand;
      return {add(parents[0].lhs, o), add(parents[0].rhs, o)};
    }
    case OpId::SubExpr: {
      const Expr& o = *operand;
      return {sub(parents[0].lhs, o), sub(parents[0].rhs, o)};
    }
    case OpId::MulExpr: {
      const Expr& o = *operand;
      if (o.is_zero()) inapplicable("multiplication by zero");
      return {mul(o, parents[0].lhs), mul(o, parents[0].rhs)};
    }
    case OpId::DivExpr: {
      const Expr& o = *operand;
      if (o.is_zero()) inapplicable("division by zero");
      return {div(parents[0].lhs, o), div(parents[0].rhs, o)};
    }
    case OpId::PowExpr: {
      const Expr& o = *operand;
      if (o.is_zero()) inapplicable("zeroth power");
      return {pow(parents[0].lhs, o), pow(parents[0].rhs, o)};
    }
    case OpId::Diff: {
      const std::string& v = require_symbol(operand, op);
      if (!has_variable(parents[0], v)) inapplicable("variable not present");
      return {derivative(parents[0].lhs, v), derivative(parents[0].rhs, v)};
    }
    case OpId::Int: {
      const std::string& v = require_symbol(operand, op);
      if (!has_variable(parents[0], v)) inapplicable("variable not present");
      return {integral(parents[0].lhs, v), integral(parents[0].rhs, v)};
    }
    case OpId::EvalDiff:
      try {
        return evaluate_derivatives(parents[0]);
      } catch (const NoDerivativePresent&) {
        inapplicable("no derivative to evaluate");
      }
    case OpId::EvalInt: {
      const std::string& c = require_symbol(operand, op);
      const Equation& p = parents[0];
      if (count_evaluable_integrals(p.lhs) + count_evaluable_integrals(p.rhs) != 1) {
        inapplicable("needs exactly one evaluable integral");
      }
      if (has_variable(p, c)) inapplicable("integration constant already in use");
      auto r = evaluate_integrals(p, std::vector<std::string>{c});
      if (!r) inapplicable("integrand outside the table");
      return *r;
    }
    case OpId::SubstLhs:
    case OpId::SubstRhs: {
      const Equation& a = parents[0];
      const Equation& b = parents[1];
      const Expr& target = op == OpId::SubstLhs ? a.lhs : a.rhs;
      const Expr& replacement = op == OpId::SubstLhs ? a.rhs : a.lhs;
      if (target.is(ExprKind::Symbol) || target.is_number()) inapplicable("target is an atom");
      if (!contains(b, target)) inapplicable("target does not occur");
      return substitute(b, target, replacement);
    }
    case OpId::Rename: {
      const Expr& rhs = parents[0].rhs;
      auto vars = ordered_variables(rhs);
      if (vars.empty()) inapplicable("nothing to rename");
      if (fresh_name.empty()) inapplicable("no fresh function name");
      std::vector<Expr> args;
      for (auto& v : vars) args.push_back(Expr::symbol(v));
      return {applied(fresh_name, std::move(args)), rhs};
    }
    case OpId::Negate:
      return {neg(parents[0].lhs), neg(parents[0].rhs)};
    case OpId::SwapSides:
      return {parents[0].rhs, parents[0].lhs};
    case OpId::ExpBothSides:
      return {exp(parents[0].lhs), exp(parents[0].rhs)};
    case OpId::LogBothSides:
      if (non_positive_number(parents[0].lhs) || non_positive_number(parents[0].rhs)) {
        inapplicable("log of a non-positive number");
      }
      return {log(parents[0].lhs), log(parents[0].rhs)};
    case OpId::AddEq:
      return {add(parents[0].lhs, parents[1].lhs), add(parents[0].rhs, parents[1].rhs)};
    case OpId::DefineFromExpr: {
      const Expr& e = *operand;
      auto vars = ordered_variables(e);
      if (vars.empty()) inapplicable("expression has no variables");
      if (fresh_name.empty()) inapplicable("no fresh function name");
      std::vector<Expr> args;
      for (auto& v : vars) args.push_back(Expr::symbol(v));
      return {applied(fresh_name, std::move(args)), e};
    }
    case OpId::Premise:
      break;
  }
  inapplicable("unknown operation");
}

std::set<std::string> used_names(std::span<const Step> steps) {
  std::set<std::string> out;
  for (const auto& s : steps) {
    for (auto& n : free_symbols(s.equation)) out.insert(n);
    if (s.operand) {
      for (auto& n : free_symbols(*s.operand)) out.insert(n);
    }
  }
  return out;
}

std::set<std::string> used_names(const Derivation& d) { return used_names(std::span<const Step>(d.steps)); }

OpRegistry::OpRegistry(bool extensions) : enabled_(kOps.size() + 1, true) {
  enabled_[0] = false;
  if (!extensions) {
    for (const auto& info : kOps) {
      if (info.extension) set_enabled(info.id, false);
    }
  }
}

void OpRegistry::set_enabled(OpId op, bool on) {
  if (op == OpId::Premise) return;
  enabled_[static_cast<std::size_t>(op)] = on;
}

bool OpRegistry::enabled(OpId op) const { return enabled_[static_cast<std::size_t>(op)]; }

std::vector<OpId> OpRegistry::ops_of_arity(int arity) const {
  std::vector<OpId> out;
  for (const auto& info : kOps) {
    if (info.arity == arity && enabled(info.id)) out.push_back(info.id);
  }
  return out;
}

std::vector<OpId> OpRegistry::enabled_ops() const {
  std::vector<OpId> out;
  for (const auto& info : kOps) {
    if (enabled(info.id)) out.push_back(info.id);
  }
  return out;
}

namespace {

std::string draw_fresh_function(const std::set<std::string>& used, Rng& rng, const SymbolTable& vocab) {
  std::vector<std::string> pool;
  for (auto& n : vocab.pool(SymbolKind::FunctionName)) {
    if (!used.count(n)) pool.push_back(std::move(n));
  }
  if (pool.empty()) inapplicable("function names exhausted");
  return rng.pick(pool);
}

}  // namespace

Step apply(OpId op, const Derivation& d, std::vector<std::size_t> parents, std::optional<Expr> operand,
           Rng& rng, const SymbolTable& vocab) {
  std::vector<Equation> eqs;
  for (auto p : parents) {
    if (p >= d.size()) throw std::out_of_range("parent index out of range");
    eqs.push_back(d.steps[p].equation);
  }
  std::string fresh;
  if (op == OpId::Rename || op == OpId::DefineFromExpr) {
    fresh = draw_fresh_function(used_names(d), rng, vocab);
  }
  if (op == OpId::EvalInt && operand && operand->is(ExprKind::Symbol) && used_names(d).count(operand->name())) {
    inapplicable("integration constant already in use");
  }
  Step s;
  s.equation = apply_op(op, eqs, operand, fresh);
  s.op = op;
  s.parents = std::move(parents);
  s.operand = std::move(operand);
  s.role = s.parents.empty() ? StepRole::Premise : StepRole::Ordinary;
  return s;
}

std::vector<double> history_weights(std::size_t n, double p_history) {
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(n - 1 - i);
    w[i] = std::pow(p_history, -k / static_cast<double>(n));
    total += w[i];
  }
  for (auto& x : w) x /= total;
  return w;
}

std::size_t sample_history_index(std::size_t n, Rng& rng, double p_history) {
  const auto w = history_weights(n, p_history);
  return rng.weighted(w);
}

std::vector<Expr> operand_candidates(const Equation& eq) {
  std::vector<Expr> out;
  std::unordered_set<Expr, ExprHash> seen;
  for (const Expr* side : {&eq.lhs, &eq.rhs}) {
    for (auto& s : subexpressions(*side)) {
      if (s.is_zero()) continue;
      if (seen.insert(s).second) out.push_back(std::move(s));
    }
  }
  return out;
}

Expr sample_operand(const Derivation& d, Rng& rng, double p_history) {
  if (d.empty()) throw std::invalid_argument("sample_operand on an empty derivation");
  const std::size_t i = sample_history_index(d.size(), rng, p_history);
  auto candidates = operand_candidates(d.steps[i].equation);
  if (candidates.empty()) return Expr::integer(1);
  return rng.pick(candidates);
}

void assign_roles(Derivation& d) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    Step& s = d.steps[i];
    if (s.parents.empty()) {
      s.role = StepRole::Premise;
    } else if (i + 1 == d.size()) {
      s.role = StepRole::Goal;
    } else if (s.op == OpId::EvalDiff || s.op == OpId::EvalInt) {
      s.role = StepRole::Intermediate;
    } else {
      s.role = StepRole::Ordinary;
    }
  }
}

bool is_dag_coherent(const Derivation& d) {
  if (d.empty()) return true;
  std::vector<bool> reach(d.size(), false);
  reach.back() = true;
  for (std::size_t i = d.size(); i-- > 0;) {
    if (!reach[i]) return false;
    for (auto p : d.steps[i].parents) {
      if (p < i) reach[p] = true;
    }
  }
  return true;
}

ValidityReport replay(const Derivation& d) {
  ValidityReport report;
  auto fail = [&](std::size_t i, std::string why) {
    report.valid = false;
    report.first_invalid = i;
    report.reason = std::move(why);
    return report;
  };
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Step& s = d.steps[i];
    for (std::size_t j = 0; j < i; ++j) {
      if (d.steps[j].equation == s.equation) return fail(i, "duplicate equation");
    }
    for (auto p : s.parents) {
      if (p >= i) return fail(i, "parent does not precede step");
    }
    if (s.op == OpId::Premise) {
      if (!s.parents.empty()) return fail(i, "premise with parents");
      continue;
    }
    const OpInfo& info = op_info(s.op);
    if (static_cast<int>(s.parents.size()) != info.arity) return fail(i, "arity mismatch");
    if (info.takes_operand != s.operand.has_value()) return fail(i, "operand presence mismatch");

    const std::span<const Step> earlier(d.steps.data(), i);
    std::string fresh;
    if (s.op == OpId::Rename || s.op == OpId::DefineFromExpr) {
      if (!s.equation.lhs.is(ExprKind::Applied)) return fail(i, "defined function missing");
      fresh = s.equation.lhs.name();
      if (used_names(earlier).count(fresh)) return fail(i, "defined function name not fresh");
    }
    if (s.op == OpId::EvalInt && s.operand && s.operand->is(ExprKind::Symbol) &&
        used_names(earlier).count(s.operand->name())) {
      return fail(i, "integration constant not fresh");
    }
    std::vector<Equation> eqs;
    for (auto p : s.parents) eqs.push_back(d.steps[p].equation);
    try {
      const Equation expected = apply_op(s.op, eqs, s.operand, fresh);
      if (expected != s.equation) return fail(i, "equation does not match its operation");
    } catch (const std::exception& e) {
      return fail(i, std::string("operation failed: ") + e.what());
    }
  }
  if (!is_dag_coherent(d)) return fail(d.size() - 1, "steps not connected to the final equation");
  Derivation roles = d;
  assign_roles(roles);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (roles.steps[i].role != d.steps[i].role) return fail(i, "role annotation mismatch");
  }
  return report;
}

}  // namespace eqderiv
