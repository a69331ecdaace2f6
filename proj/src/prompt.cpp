#include "eqderiv/prompt.hpp"

#include <algorithm>
#include <cctype>

#include "eqderiv/latex.hpp"

namespace eqderiv {

std::string_view perturbation_name(Perturbation p) {
  switch (p) {
    case Perturbation::VR: return "VR";
    case Perturbation::EE: return "EE";
    case Perturbation::AG: return "AG";
    case Perturbation::SR: return "SR";
  }
  return "VR";
}

std::optional<Perturbation> perturbation_from_name(std::string_view name) {
  std::string up(name);
  for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (auto p : {Perturbation::VR, Perturbation::EE, Perturbation::AG, Perturbation::SR}) {
    if (perturbation_name(p) == up) return p;
  }
  return std::nullopt;
}

PromptRecord build_prompt(const Derivation& d, const std::string& id) {
  if (d.empty() || d.back().role != StepRole::Goal) throw RoleMissing("derivation has no goal step");
  PromptRecord r;
  r.id = id;
  r.static_id = id;
  r.goal = d.size() - 1;
  for (std::size_t i = 0; i + 1 < d.size(); ++i) {
    if (d.steps[i].role == StepRole::Premise) r.premises.push_back(i);
    if (d.steps[i].role == StepRole::Intermediate) r.intermediates.push_back(i);
  }
  if (r.premises.empty()) throw RoleMissing("derivation has no premise");
  auto eq = [&](std::size_t i) { return "$" + to_latex(d.steps[i].equation) + "$"; };
  std::string out = "Given " + eq(r.premises[0]);
  for (std::size_t k = 1; k < r.premises.size(); ++k) out += " and " + eq(r.premises[k]);
  for (auto i : r.intermediates) out += ", then derive " + eq(i);
  out += ", then obtain " + eq(r.goal);
  r.prompt = std::move(out);
  r.target = build_target(d);
  return r;
}

std::string build_target(const Derivation& d) {
  std::string out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i) out += " and ";
    out += to_latex(d.steps[i].equation);
  }
  return out;
}

std::vector<std::string> split_target(const std::string& target) {
  std::vector<std::string> out;
  static constexpr std::string_view sep = " and ";
  std::size_t start = 0;
  while (true) {
    const auto pos = target.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(target.substr(start));
      return out;
    }
    out.push_back(target.substr(start, pos - start));
    start = pos + sep.size();
  }
}

std::vector<std::string> prompt_equations(const std::string& prompt) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto open = prompt.find('$', pos);
    if (open == std::string::npos) break;
    const auto close = prompt.find('$', open + 1);
    if (close == std::string::npos) break;
    out.push_back(prompt.substr(open + 1, close - open - 1));
    pos = close + 1;
  }
  return out;
}

bool is_qualifying_example(const PromptRecord& r) {
  return r.prompt.find("then derive") != std::string::npos && r.prompt.find(" and ") != std::string::npos;
}

std::string build_fewshot(const PromptRecord& p, const std::vector<PromptRecord>& pool, Rng& rng) {
  std::vector<std::size_t> qualifying, other;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& r = pool[i];
    if (r.static_id == p.static_id || r.id == p.id) continue;
    (is_qualifying_example(r) ? qualifying : other).push_back(i);
  }
  if (qualifying.size() < 2 || qualifying.size() + other.size() < 5) {
    throw InsufficientPool("few-shot pool needs 5 records with at least 2 qualifying");
  }
  auto take = [&](std::vector<std::size_t>& from) {
    const std::size_t k = rng.below(from.size());
    const std::size_t v = from[k];
    from.erase(from.begin() + static_cast<std::ptrdiff_t>(k));
    return v;
  };
  std::vector<std::size_t> chosen{take(qualifying), take(qualifying)};
  std::vector<std::size_t> rest = qualifying;
  rest.insert(rest.end(), other.begin(), other.end());
  std::sort(rest.begin(), rest.end());
  while (chosen.size() < 5) chosen.push_back(take(rest));
  for (std::size_t i = chosen.size() - 1; i > 0; --i) std::swap(chosen[i], chosen[rng.below(i + 1)]);

  std::string out(kFewshotHeader);
  out += "\n\n";
  for (auto i : chosen) {
    out += "Prompt: " + pool[i].prompt + "\n";
    out += "Derivation: " + pool[i].target + "\n\n";
  }
  out += kFewshotInstruction;
  out += "\n\nPrompt: " + p.prompt + "\n";
  return out;
}

std::size_t estimate_tokens(std::string_view text) {
  std::size_t n = 0;
  std::size_t i = 0;
  auto alpha = [&](std::size_t k) { return k < text.size() && std::isalpha(static_cast<unsigned char>(text[k])); };
  auto digit = [&](std::size_t k) { return k < text.size() && std::isdigit(static_cast<unsigned char>(text[k])); };
  while (i < text.size()) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    ++n;
    if (c == '\\') {
      ++i;
      if (alpha(i)) {
        while (alpha(i)) ++i;
      } else if (i < text.size()) {
        ++i;
      }
    } else if (alpha(i)) {
      while (alpha(i)) ++i;
    } else if (digit(i)) {
      while (digit(i)) ++i;
    } else {
      ++i;
    }
  }
  return n;
}

}  // namespace eqderiv
