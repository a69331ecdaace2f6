#pragma once

// Helpers shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eqderiv/calculus.hpp"
#include "eqderiv/canonical.hpp"
#include "eqderiv/latex.hpp"
#include "eqderiv/ops.hpp"
#include "eqderiv/rng.hpp"
#include "eqderiv/stats.hpp"

#ifndef EQDERIV_TEST_DATA
#define EQDERIV_TEST_DATA "tests/data"
#endif

namespace eqderiv::testing {

inline std::string data_path(const std::string& name) { return std::string(EQDERIV_TEST_DATA) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// The worked prompt example: two premises, one evaluated derivative, goal
// e^{G(a)} = 1.
inline Derivation golden_derivation() {
  Derivation d;
  auto premise = [&](const char* latex) {
    Step s;
    s.equation = parse_equation(latex);
    s.role = StepRole::Premise;
    d.steps.push_back(std::move(s));
  };
  auto derive = [&](OpId op, std::vector<std::size_t> parents) {
    std::vector<Equation> eqs;
    for (auto p : parents) eqs.push_back(d.steps[p].equation);
    Step s;
    s.equation = apply_op(op, eqs, std::nullopt);
    s.op = op;
    s.parents = std::move(parents);
    d.steps.push_back(std::move(s));
  };
  premise("q{(a)} = e^{a}");
  premise("G{(a)} = - e^{a} + \\frac{d}{d a} q{(a)}");
  derive(OpId::SubstLhs, {0, 1});
  derive(OpId::SubstLhs, {1, 2});
  derive(OpId::EvalDiff, {3});
  derive(OpId::SubstRhs, {1, 4});
  derive(OpId::ExpBothSides, {5});
  assign_roles(d);
  return d;
}

// Random expression over `vars` built from the elementary functions, sums,
// products and small integer powers. Every node kind the differentiator
// handles symbolically can appear.
inline Expr random_expr(Rng& rng, int depth, const std::vector<std::string>& vars) {
  if (depth <= 0 || rng.bernoulli(0.25)) {
    if (rng.bernoulli(0.3)) {
      const long long n = rng.range(-4, 5);
      return rng.bernoulli(0.3) ? Expr::rational(n == 0 ? 1 : n, rng.range(2, 5)) : Expr::integer(n);
    }
    return sym(rng.pick(vars));
  }
  switch (rng.below(7)) {
    case 0:
      return sin(random_expr(rng, depth - 1, vars));
    case 1:
      return cos(random_expr(rng, depth - 1, vars));
    case 2:
      return exp(random_expr(rng, depth - 2, vars));
    case 3:
      return log(random_expr(rng, depth - 1, vars));
    case 4:
      return add(random_expr(rng, depth - 1, vars), random_expr(rng, depth - 1, vars));
    case 5:
      return mul(random_expr(rng, depth - 1, vars), random_expr(rng, depth - 1, vars));
    default:
      return pow(random_expr(rng, depth - 1, vars), Expr::integer(rng.range(-2, 3)));
  }
}

// Ridders' extrapolation of central differences from starting step h0: h
// shrinks geometrically and the Neville-table entry with the smallest error
// estimate wins. Returns {estimate, error}.
inline std::pair<double, double> ridders(const std::function<double(double)>& cd, double h0) {
  constexpr int n = 10;
  constexpr double con = 1.4, con2 = con * con;
  double a[n][n];
  double h = h0;
  a[0][0] = cd(h);
  double best = a[0][0], err = HUGE_VAL;
  for (int i = 1; i < n; ++i) {
    h /= con;
    a[0][i] = cd(h);
    double fac = con2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1);
      fac *= con2;
      const double errt = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
      if (errt <= err) {
        err = errt;
        best = a[j][i];
      }
    }
    if (std::abs(a[i][i] - a[i - 1][i - 1]) >= 2 * err) break;
  }
  return {best, err};
}

// Numerical d/dvar. Ridders runs from several starting steps so that a pole
// or domain edge near the point does not poison the estimate; the run with
// the smallest error estimate is kept. Throws DomainError when every run
// leaves the domain.
inline double central_difference(const Expr& e, const std::string& var, std::map<std::string, double> at) {
  const double x0 = at[var];
  auto cd = [&](double h) {
    at[var] = x0 + h;
    const double up = eval_numeric(e, at);
    at[var] = x0 - h;
    const double down = eval_numeric(e, at);
    return (up - down) / (2 * h);
  };
  const double scale = std::max(1.0, std::abs(x0));
  std::optional<std::pair<double, double>> best;
  for (double h0 : {1e-2, 1e-3, 1e-4, 1e-5}) {
    try {
      const auto r = ridders(cd, h0 * scale);
      if (!best || r.second < best->second) best = r;
    } catch (const DomainError&) {
    }
  }
  if (!best) throw DomainError("no finite-difference step stays in the domain");
  return best->first;
}

// Symbolic derivative against the finite difference, relative to the larger
// magnitude (with the function value as the scale floor near zero).
inline bool derivative_matches(const Expr& e, const std::string& var, const std::map<std::string, double>& at,
                               double rtol, double* symbolic = nullptr, double* numeric = nullptr) {
  const double d = eval_numeric(differentiate(e, var), at);
  const double fd = central_difference(e, var, at);
  if (symbolic) *symbolic = d;
  if (numeric) *numeric = fd;
  const double scale = std::max({std::abs(d), std::abs(fd), 1e-3 * std::abs(eval_numeric(e, at)), 1e-3});
  return std::abs(d - fd) <= rtol * scale;
}

struct AppendixDerivation {
  int number = 0;
  std::vector<std::string> latex;
};

// "## n" headers followed by one equation per line; '#' lines are comments.
inline std::vector<AppendixDerivation> load_appendix(const std::string& path) {
  std::vector<AppendixDerivation> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("## ", 0) == 0) {
      out.push_back({std::stoi(line.substr(3)), {}});
    } else if (!line.empty() && line[0] != '#' && !out.empty()) {
      out.back().latex.push_back(line);
    }
  }
  return out;
}

// Every (op, parents, operand) that reproduces eqs[i] from earlier equations.
inline std::vector<Step> derivations_of(const std::vector<Equation>& eqs, std::size_t i) {
  const Equation& target = eqs[i];
  std::vector<Step> found;
  std::set<std::string> earlier;
  std::vector<Expr> subexprs;
  for (std::size_t j = 0; j < i; ++j) {
    for (auto& n : free_symbols(eqs[j])) earlier.insert(n);
    for (const auto& side : {eqs[j].lhs, eqs[j].rhs}) {
      for (auto& e : subexpressions(side)) {
        if (std::find(subexprs.begin(), subexprs.end(), e) == subexprs.end()) subexprs.push_back(e);
      }
    }
  }
  std::vector<std::string> fresh;
  for (auto& n : free_symbols(target)) {
    if (!earlier.count(n)) fresh.push_back(n);
  }
  std::string head;
  if (target.lhs.is(ExprKind::Applied)) head = target.lhs.name();
  auto attempt = [&](OpId op, std::vector<std::size_t> parents, std::optional<Expr> operand,
                     const std::string& name = {}) {
    std::vector<Equation> ps;
    for (auto p : parents) ps.push_back(eqs[p]);
    try {
      if (apply_op(op, ps, operand, name) == target) {
        Step s;
        s.equation = target;
        s.op = op;
        s.parents = std::move(parents);
        s.operand = std::move(operand);
        found.push_back(std::move(s));
      }
    } catch (const std::exception&) {
    }
  };

  for (const auto& info : all_ops()) {
    const OpId op = info.id;
    // A DefineFromExpr step looks exactly like a premise; read it as one.
    if (info.arity == 0) continue;
    for (std::size_t a = 0; a < i; ++a) {
      if (info.arity == 2) {
        for (std::size_t b = 0; b < i; ++b) {
          if (a != b) attempt(op, {a, b}, std::nullopt);
        }
        continue;
      }
      switch (op) {
        case OpId::Diff:
        case OpId::Int:
          for (auto& v : variables(eqs[a])) attempt(op, {a}, Expr::symbol(v));
          break;
        case OpId::EvalInt:
          for (auto& c : fresh) attempt(op, {a}, Expr::symbol(c));
          break;
        case OpId::Rename:
          if (!head.empty()) attempt(op, {a}, std::nullopt, head);
          break;
        case OpId::AddExpr:
        case OpId::SubExpr:
        case OpId::MulExpr:
        case OpId::DivExpr:
        case OpId::PowExpr:
          for (const auto& e : subexprs) attempt(op, {a}, e);
          // Operands that appear nowhere earlier, read off the target.
          try {
            const Expr& l = eqs[a].lhs;
            if (op == OpId::AddExpr) attempt(op, {a}, sub(target.lhs, l));
            if (op == OpId::SubExpr) attempt(op, {a}, sub(l, target.lhs));
            if (op == OpId::MulExpr) attempt(op, {a}, div(target.lhs, l));
            if (op == OpId::DivExpr) attempt(op, {a}, div(l, target.lhs));
          } catch (const std::exception&) {
          }
          break;
        default:
          attempt(op, {a}, std::nullopt);
      }
    }
  }
  return found;
}

// Annotates a bare equation list by searching the registry for an op,
// parents and operand that reproduce each equation, backtracking over the
// choices until the result replays. Equations nothing reproduces become
// premises. Returns the first annotation that replays, or the first-choice
// annotation when none does.
inline Derivation annotate_by_search(const std::vector<Equation>& eqs) {
  std::vector<std::vector<Step>> options(eqs.size());
  for (std::size_t i = 0; i < eqs.size(); ++i) {
    options[i] = derivations_of(eqs, i);
    Step premise;
    premise.equation = eqs[i];
    if (options[i].empty()) options[i].push_back(std::move(premise));
  }
  Derivation d;
  d.steps.resize(eqs.size());
  std::optional<Derivation> first;
  std::function<bool(std::size_t)> choose = [&](std::size_t i) {
    if (i == eqs.size()) {
      Derivation c = d;
      assign_roles(c);
      if (!first) first = c;
      if (!replay(c).valid) return false;
      d = std::move(c);
      return true;
    }
    for (const auto& s : options[i]) {
      d.steps[i] = s;
      if (choose(i + 1)) return true;
    }
    return false;
  };
  if (choose(0)) return d;
  return *first;
}

// ---------------------------------------------------------------------------
// Reference n-gram metrics, written from the definitions with plain lists so
// they share no code with src/metrics.cpp.

using Tokens = std::vector<std::string>;

inline std::vector<Tokens> list_ngrams(const Tokens& t, std::size_t n) {
  std::vector<Tokens> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) out.emplace_back(t.begin() + i, t.begin() + i + n);
  return out;
}

// Clipped matches: each candidate n-gram consumes one unused reference copy.
inline std::size_t clipped_matches(const Tokens& c, const Tokens& r, std::size_t n) {
  auto pool = list_ngrams(r, n);
  std::vector<bool> used(pool.size(), false);
  std::size_t m = 0;
  for (const auto& g : list_ngrams(c, n)) {
    for (std::size_t k = 0; k < pool.size(); ++k) {
      if (!used[k] && pool[k] == g) {
        used[k] = true;
        ++m;
        break;
      }
    }
  }
  return m;
}

inline double oracle_rouge_n(const Tokens& c, const Tokens& r, std::size_t n) {
  const double tc = static_cast<double>(list_ngrams(c, n).size());
  const double tr = static_cast<double>(list_ngrams(r, n).size());
  if (tc == 0 || tr == 0) return 0.0;
  const double m = static_cast<double>(clipped_matches(c, r, n));
  if (m == 0) return 0.0;
  const double p = m / tc, rec = m / tr;
  return 2 * p * rec / (p + rec);
}

inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  // Memoized recursion over suffixes.
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> std::size_t {
    if (i == a.size() || j == b.size()) return 0;
    auto key = std::make_pair(i, j);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    const std::size_t v = a[i] == b[j] ? 1 + go(i + 1, j + 1) : std::max(go(i + 1, j), go(i, j + 1));
    memo[key] = v;
    return v;
  };
  return go(0, 0);
}

inline double oracle_rouge_l(const Tokens& c, const Tokens& r) {
  if (c.empty() || r.empty()) return 0.0;
  const double l = static_cast<double>(lcs_length(c, r));
  if (l == 0) return 0.0;
  const double p = l / static_cast<double>(c.size()), rec = l / static_cast<double>(r.size());
  return 2 * p * rec / (p + rec);
}

inline double oracle_bleu(const Tokens& c, const Tokens& r, std::size_t max_n = 4) {
  if (c.empty() || r.empty()) return 0.0;
  double prod = 1;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const double m = static_cast<double>(clipped_matches(c, r, n));
    const double t = static_cast<double>(list_ngrams(c, n).size());
    if (n == 1 && m == 0) return 0.0;
    prod *= m == 0 ? 1.0 / (t + 1) : m / t;
  }
  const double bp = c.size() < r.size() ? std::exp(1.0 - static_cast<double>(r.size()) / c.size()) : 1.0;
  return bp * std::pow(prod, 1.0 / static_cast<double>(max_n));
}

inline double oracle_gleu(const Tokens& c, const Tokens& r, std::size_t max_n = 4) {
  double m = 0, tc = 0, tr = 0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    m += static_cast<double>(clipped_matches(c, r, n));
    tc += static_cast<double>(list_ngrams(c, n).size());
    tr += static_cast<double>(list_ngrams(r, n).size());
  }
  if (tc == 0 || tr == 0) return 0.0;
  return std::min(m / tc, m / tr);
}

// Every token sequence over `alphabet` of length 0..max_len.
inline std::vector<Tokens> all_sequences(const std::vector<std::string>& alphabet, std::size_t max_len) {
  std::vector<Tokens> out{{}};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& a : alphabet) {
        Tokens t = out[i];
        t.push_back(a);
        out.push_back(std::move(t));
      }
    }
    begin = end;
  }
  return out;
}

inline std::string join(const Tokens& t) {
  std::string s;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) s += ' ';
    s += t[i];
  }
  return s;
}

// Published chain table rows: distinct-chain count, P(chain) to 4 places and
// the relative frequency rounded to an integer.
struct ChainTableRow {
  int length;
  std::size_t distinct;
  double p_chain;
  int relative;
};

inline const std::vector<ChainTableRow>& published_chain_table() {
  static const std::vector<ChainTableRow> rows{
      {4, 842, 0.0369, 31}, {4, 842, 0.0186, 16}, {5, 2850, 0.0053, 15}, {5, 2850, 0.0048, 14},
      {6, 3163, 0.0033, 11}, {6, 3163, 0.0020, 6}, {7, 2081, 0.0009, 2},  {7, 2081, 0.0009, 2},
  };
  return rows;
}

// True when some P within the 4-place rounding interval gives a relative
// frequency that rounds to the printed integer.
inline bool relative_consistent(const ChainTableRow& r) {
  const double lo = relative_frequency(r.p_chain - 0.00005, r.distinct);
  const double hi = relative_frequency(r.p_chain + 0.00005, r.distinct);
  return hi >= r.relative - 0.5 && lo < r.relative + 0.5;
}

}  // namespace eqderiv::testing

#ifdef DOCTEST_VERSION_STR
namespace doctest {
template <>
struct StringMaker<eqderiv::Expr> {
  static String convert(const eqderiv::Expr& e) { return eqderiv::debug_string(e).c_str(); }
};
template <>
struct StringMaker<eqderiv::Equation> {
  static String convert(const eqderiv::Equation& e) {
    return (eqderiv::debug_string(e.lhs) + " = " + eqderiv::debug_string(e.rhs)).c_str();
  }
};
}  // namespace doctest
#endif
