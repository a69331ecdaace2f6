#include "eqderiv/generator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "eqderiv/calculus.hpp"
#include "eqderiv/canonical.hpp"
#include "eqderiv/latex.hpp"
#include "eqderiv/prompt.hpp"

namespace eqderiv {

void GenConfig::validate() const {
  for (double w : {p_history, p_arity_0, p_renaming, p_arity_1, p_evaluate, p_arity_2, p_int_or_diff, p_subs,
                   p_basic, p_extension, p_add_eq, p_new_premise, p_define}) {
    if (!(w >= 0) || !std::isfinite(w)) throw std::invalid_argument("weights must be finite and non-negative");
  }
  if (!(diff_share >= 0 && diff_share <= 1)) throw std::invalid_argument("diff_share must be in [0, 1]");
  if (p_history <= 0) throw std::invalid_argument("p_history must be positive");
  if (length_min < 4) throw std::invalid_argument("length_min must be at least 4");
  if (length_max < length_min) throw std::invalid_argument("length_max below length_min");
  if (!(length_sigma > 0)) throw std::invalid_argument("length_sigma must be positive");
  if (retry_cap < 1) throw std::invalid_argument("retry_cap must be at least 1");
  if (iteration_cap < retry_cap) throw std::invalid_argument("iteration_cap below retry_cap");
  if (attempt_cap < 1) throw std::invalid_argument("attempt_cap must be at least 1");
  if (max_latex_chars == 0 || max_prompt_tokens == 0) throw std::invalid_argument("filters must be positive");
}

// ---------------------------------------------------------------------------
// premises

namespace {

std::vector<std::string> unused(const std::vector<std::string>& pool, const std::set<std::string>& used) {
  std::vector<std::string> out;
  for (const auto& n : pool) {
    if (!used.count(n)) out.push_back(n);
  }
  return out;
}

// Body over argument symbols xs, chosen by template weight.
Expr premise_body(const std::vector<Expr>& xs, Rng& rng) {
  const Expr& x = xs[0];
  auto elementary = [&](const Expr& a) {
    switch (rng.below(4)) {
      case 0: return sin(a);
      case 1: return cos(a);
      case 2: return exp(a);
      default: return log(a);
    }
  };
  if (xs.size() == 1) {
    static constexpr double w[] = {12, 1, 1, 0.5, 1};
    switch (rng.weighted(w)) {
      case 0: return elementary(x);
      case 1: return x;
      case 2: return pow(x, Expr::integer(-1));
      case 3: return integral(rng.bernoulli(0.2) ? x : elementary(x), x.name());
      default: return derivative(elementary(x), x.name());
    }
  }
  const Expr& y = xs[1];
  if (xs.size() == 2) {
    static constexpr double w[] = {2, 2, 2, 2, 1, 1};
    switch (rng.weighted(w)) {
      case 0: return pow(x, y);
      case 1: return add(x, y);
      case 2: return mul(x, y);
      case 3: return div(x, y);
      case 4: return integral(add(x, y), x.name());
      default: return derivative(sub(x, y), x.name());
    }
  }
  const Expr& z = xs[2];
  return rng.bernoulli(0.5) ? add(x, div(y, z)) : div(mul(x, y), z);
}

}  // namespace

Equation generate_premise(const SymbolTable& vocab, Rng& rng, const std::set<std::string>& used,
                          const std::vector<std::string>& reuse) {
  static constexpr double arity_w[] = {16, 6, 2};
  const std::size_t nargs = rng.weighted(arity_w) + 1;
  std::set<std::string> taken = used;
  std::vector<std::string> reusable = reuse;
  std::vector<Expr> args;
  for (std::size_t i = 0; i < nargs; ++i) {
    std::string name;
    if (!reusable.empty() && rng.bernoulli(0.5)) {
      const std::size_t k = rng.below(reusable.size());
      name = reusable[k];
      reusable.erase(reusable.begin() + static_cast<std::ptrdiff_t>(k));
    } else {
      auto fresh = unused(vocab.pool(SymbolKind::Variable), taken);
      if (fresh.empty()) throw VocabularyError("vocabulary exhausted");
      name = rng.pick(fresh);
    }
    taken.insert(name);
    std::erase(reusable, name);
    args.push_back(Expr::symbol(name));
  }
  auto heads = unused(vocab.pool(SymbolKind::FunctionName), taken);
  if (heads.empty()) throw VocabularyError("vocabulary exhausted");
  std::string head = rng.pick(heads);
  Expr body = premise_body(args, rng);
  return {applied(std::move(head), args), std::move(body)};
}

// ---------------------------------------------------------------------------
// extraction

Derivation extract_derivation(const std::vector<Step>& steps) {
  Derivation out;
  if (steps.empty()) return out;
  std::vector<bool> keep(steps.size(), false);
  keep.back() = true;
  for (std::size_t i = steps.size(); i-- > 0;) {
    if (!keep[i]) continue;
    for (auto p : steps[i].parents) keep[p] = true;
  }
  std::vector<std::size_t> remap(steps.size(), 0);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!keep[i]) continue;
    remap[i] = out.steps.size();
    Step s = steps[i];
    for (auto& p : s.parents) p = remap[p];
    out.steps.push_back(std::move(s));
  }
  assign_roles(out);
  return out;
}

// ---------------------------------------------------------------------------
// generator

Generator::Generator(GenConfig cfg)
    : Generator(cfg, cfg.vocabulary_path.empty() ? SymbolTable::builtin() : SymbolTable::load(cfg.vocabulary_path)) {}

Generator::Generator(GenConfig cfg, SymbolTable vocab)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)), registry_(cfg_.extensions) {
  cfg_.validate();
}

std::vector<std::pair<OpId, double>> Generator::arity_ops(int arity) const {
  std::vector<std::pair<OpId, double>> out;
  if (arity == 0) out.emplace_back(OpId::Premise, cfg_.p_new_premise);
  for (OpId op : registry_.ops_of_arity(arity)) {
    double w = cfg_.p_basic;
    switch (op) {
      case OpId::Diff: w = 2 * cfg_.p_int_or_diff * cfg_.diff_share; break;
      case OpId::Int: w = 2 * cfg_.p_int_or_diff * (1 - cfg_.diff_share); break;
      case OpId::EvalDiff:
      case OpId::EvalInt: w = cfg_.p_evaluate; break;
      case OpId::Rename: w = cfg_.p_renaming; break;
      case OpId::SubstLhs:
      case OpId::SubstRhs: w = cfg_.p_subs; break;
      case OpId::AddEq: w = cfg_.p_add_eq; break;
      case OpId::Negate:
      case OpId::SwapSides:
      case OpId::ExpBothSides:
      case OpId::LogBothSides: w = cfg_.p_extension; break;
      case OpId::DefineFromExpr: w = cfg_.p_define; break;
      default: break;
    }
    out.emplace_back(op, w);
  }
  return out;
}

std::vector<std::pair<OpId, double>> Generator::op_probabilities() const {
  const double class_w[3] = {cfg_.p_arity_0, cfg_.p_arity_1, cfg_.p_arity_2};
  double sums[3] = {0, 0, 0};
  double total = 0;
  for (int a = 0; a < 3; ++a) {
    for (auto& [op, w] : arity_ops(a)) sums[a] += w;
    if (sums[a] > 0) total += class_w[a];
  }
  std::vector<std::pair<OpId, double>> out;
  for (int a = 0; a < 3; ++a) {
    for (auto& [op, w] : arity_ops(a)) {
      const double p = (sums[a] > 0 && total > 0) ? class_w[a] / total * w / sums[a] : 0.0;
      out.emplace_back(op, p);
    }
  }
  return out;
}

OpId Generator::draw_op(Rng& rng) const {
  std::vector<std::pair<OpId, double>> classes[3] = {arity_ops(0), arity_ops(1), arity_ops(2)};
  double class_w[3] = {cfg_.p_arity_0, cfg_.p_arity_1, cfg_.p_arity_2};
  for (int a = 0; a < 3; ++a) {
    double s = 0;
    for (auto& [op, w] : classes[a]) s += w;
    if (s <= 0) class_w[a] = 0;
  }
  const auto& cls = classes[rng.weighted(class_w)];
  std::vector<double> w;
  for (auto& [op, x] : cls) w.push_back(x);
  return cls[rng.weighted(w)].first;
}

int Generator::sample_length(Rng& rng) const {
  while (true) {
    const long v = std::lround(rng.normal(cfg_.length_mean, cfg_.length_sigma));
    if (v >= cfg_.length_min && v <= cfg_.length_max) return static_cast<int>(v);
  }
}

bool Generator::acceptable(const Equation& eq) const {
  if (eq.lhs == eq.rhs) return false;
  if (eq.lhs.is_number() && eq.rhs.is_number()) return false;
  return to_latex(eq).size() <= cfg_.max_latex_chars;
}

namespace {

std::vector<std::string> all_variables(const Derivation& d) {
  std::vector<std::string> out;
  for (const auto& s : d.steps) {
    for (auto& v : variables(s.equation)) {
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  }
  return out;
}

// Expression for DefineFromExpr: a sampled sub-expression, optionally
// differentiated, then combined with a second one or negated or raised.
Expr define_operand(const Derivation& d, Rng& rng, double p_history) {
  Expr s = sample_operand(d, rng, p_history);
  if (rng.bernoulli(1.0 / 3)) {
    const auto vars = variables(s);
    if (!vars.empty()) s = derivative(s, rng.pick(vars));
  }
  const Expr t = sample_operand(d, rng, p_history);
  switch (rng.below(5)) {
    case 0: return add(s, t);
    case 1: return sub(s, t);
    case 2: return mul(s, t);
    case 3: return neg(s);
    default: return pow(s, Expr::integer(rng.range(2, 3)));
  }
}

}  // namespace

std::optional<Step> Generator::attempt(OpId op, const Derivation& d, Rng& rng) const {
  if (op == OpId::Premise) {
    Step s;
    s.equation = generate_premise(vocab_, rng, used_names(d), all_variables(d));
    s.op = OpId::Premise;
    s.role = StepRole::Premise;
    return s;
  }
  const OpInfo& info = op_info(op);
  std::vector<std::size_t> parents;
  if (info.arity >= 1) parents.push_back(sample_history_index(d.size(), rng, cfg_.p_history));
  if (info.arity == 2) {
    if (d.size() < 2) return std::nullopt;
    auto w = history_weights(d.size(), cfg_.p_history);
    w[parents[0]] = 0.0;
    parents.push_back(rng.weighted(w));
  }
  return attempt_with(op, d, std::move(parents), rng);
}

std::optional<Step> Generator::attempt_with(OpId op, const Derivation& d, std::vector<std::size_t> parents,
                                            Rng& rng) const {
  if (parents.empty()) return std::nullopt;
  std::optional<Expr> operand;
  switch (op) {
    case OpId::AddExpr:
    case OpId::SubExpr:
    case OpId::MulExpr:
    case OpId::DivExpr:
    case OpId::PowExpr:
      operand = sample_operand(d, rng, cfg_.p_history);
      break;
    case OpId::Diff:
    case OpId::Int: {
      const auto vars = variables(d.steps[parents[0]].equation);
      if (vars.empty()) return std::nullopt;
      operand = Expr::symbol(rng.pick(vars));
      break;
    }
    case OpId::EvalInt: {
      const auto pool = unused(vocab_.pool(SymbolKind::Variable), used_names(d));
      if (pool.empty()) return std::nullopt;
      operand = Expr::symbol(rng.pick(pool));
      break;
    }
    case OpId::DefineFromExpr:
      operand = define_operand(d, rng, cfg_.p_history);
      break;
    default:
      break;
  }
  return apply(op, d, std::move(parents), std::move(operand), rng, vocab_);
}

std::optional<Step> Generator::step(const Derivation& d, Rng& rng) const {
  if (d.empty()) throw std::invalid_argument("step on an empty derivation");
  const OpId op = draw_op(rng);
  return guarded([&] { return attempt(op, d, rng); });
}

std::optional<Step> Generator::step_from(OpId op, const Derivation& d, std::vector<std::size_t> parents,
                                         Rng& rng) const {
  if (d.empty()) throw std::invalid_argument("step on an empty derivation");
  if (parents.size() != static_cast<std::size_t>(op_info(op).arity)) return std::nullopt;
  return guarded([&] { return attempt_with(op, d, std::move(parents), rng); });
}

template <typename F>
std::optional<Step> Generator::guarded(F&& make) const {
  try {
    auto s = make();
    if (!s || !acceptable(s->equation)) return std::nullopt;
    return s;
  } catch (const InapplicableOp&) {
    return std::nullopt;
  } catch (const ArityMismatch&) {
    return std::nullopt;
  } catch (const VocabularyError&) {
    return std::nullopt;
  }
}

std::optional<Derivation> Generator::generate_derivation(Rng& rng, const std::optional<Derivation>& prior) const {
  Derivation d;
  if (prior && !prior->empty()) {
    d = *prior;
  } else {
    Step premise;
    premise.equation = generate_premise(vocab_, rng);
    premise.role = StepRole::Premise;
    d.steps.push_back(std::move(premise));
  }
  const int length = sample_length(rng);
  int count = 0;
  for (int iter = 0; iter < cfg_.iteration_cap; ++iter) {
    auto s = step(d, rng);
    if (!s) {
      if (++count >= cfg_.retry_cap) return std::nullopt;
      continue;
    }
    const bool duplicate = std::any_of(d.steps.begin(), d.steps.end(),
                                       [&](const Step& t) { return t.equation == s->equation; });
    if (duplicate) continue;
    if (s->op == OpId::EvalInt) {
      const bool evaluated = std::any_of(d.steps.begin(), d.steps.end(), [&](const Step& t) {
        return t.op == OpId::EvalInt && t.parents == s->parents;
      });
      if (evaluated) continue;
    }
    d.steps.push_back(std::move(*s));
    Derivation actual = extract_derivation(d.steps);
    if (static_cast<int>(actual.size()) >= length) return actual;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// dataset

bool within_budget(const Derivation& d, const GenConfig& cfg) {
  const auto n = static_cast<int>(d.size());
  if (n < cfg.length_min || n > cfg.length_max) return false;
  const PromptRecord p = build_prompt(d);
  return estimate_tokens(p.prompt) + estimate_tokens(p.target) <= cfg.max_prompt_tokens;
}

std::optional<Derivation> regenerate(const Generator& gen, std::uint64_t record_seed) {
  Rng rng(record_seed);
  return gen.generate_derivation(rng);
}

std::vector<DerivationRecord> generate_dataset(const Generator& gen, std::size_t n, DatasetReport* report) {
  if (n == 0) throw std::invalid_argument("dataset size must be at least 1");
  const GenConfig& cfg = gen.config();

  struct Slot {
    std::optional<DerivationRecord> record;
    DatasetReport stats;
  };
  std::vector<Slot> slots(n);

  auto work = [&](std::size_t i) {
    Slot& slot = slots[i];
    const std::uint64_t base = Rng::derive_seed(cfg.seed, i);
    for (int a = 0; a < cfg.attempt_cap; ++a) {
      const std::uint64_t seed = Rng::derive_seed(base, static_cast<std::uint64_t>(a));
      ++slot.stats.attempts;
      auto d = regenerate(gen, seed);
      if (!d) {
        ++slot.stats.retry_exhausted;
        continue;
      }
      const auto len = static_cast<int>(d->size());
      if (len < cfg.length_min || len > cfg.length_max) {
        ++slot.stats.length_filtered;
        continue;
      }
      if (!within_budget(*d, cfg)) {
        ++slot.stats.token_filtered;
        continue;
      }
      slot.record = DerivationRecord{std::to_string(i), seed, std::move(*d), std::nullopt, {}};
      return;
    }
  };

  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) work(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<DerivationRecord> out;
  DatasetReport total;
  total.requested = n;
  for (auto& slot : slots) {
    total.attempts += slot.stats.attempts;
    total.retry_exhausted += slot.stats.retry_exhausted;
    total.length_filtered += slot.stats.length_filtered;
    total.token_filtered += slot.stats.token_filtered;
    if (slot.record) {
      out.push_back(std::move(*slot.record));
    } else {
      ++total.records_missing;
    }
  }
  total.produced = out.size();
  if (report) *report = total;
  return out;
}

}  // namespace eqderiv
