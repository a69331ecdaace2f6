#include "doctest.h"
#include "eqderiv/generator.hpp"
#include "eqderiv/prompt.hpp"
#include "support.hpp"

using namespace eqderiv;
using namespace eqderiv::testing;

namespace {

std::string first_line(const std::string& path) {
  std::string s = read_text(path);
  if (!s.empty() && s.back() == '\n') s.pop_back();
  return s;
}

std::vector<PromptRecord> prompt_pool(std::uint64_t seed, std::size_t n) {
  GenConfig cfg;
  cfg.seed = seed;
  cfg.threads = 1;
  std::vector<PromptRecord> out;
  for (const auto& r : generate_dataset(Generator(cfg), n)) {
    PromptRecord p = build_prompt(r.derivation, r.id);
    p.static_id = r.id;
    out.push_back(std::move(p));
  }
  return out;
}

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("golden prompt and target") {
  const PromptRecord p = build_prompt(golden_derivation(), "golden");
  CHECK(p.prompt == first_line(data_path("golden_prompt.txt")));
  CHECK(p.target == first_line(data_path("golden_target.txt")));
  CHECK(p.id == "golden");
  CHECK(p.premises == std::vector<std::size_t>{0, 1});
  CHECK(p.intermediates == std::vector<std::size_t>{4});
  CHECK(p.goal == 6);
}

TEST_CASE("prompt equations and target split back") {
  const Derivation d = golden_derivation();
  const PromptRecord p = build_prompt(d);
  const auto eqs = prompt_equations(p.prompt);
  REQUIRE(eqs.size() == 4);
  CHECK(eqs[0] == "q{(a)} = e^{a}");
  CHECK(eqs[3] == "e^{G{(a)}} = 1");
  const auto parts = split_target(p.target);
  REQUIRE(parts.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) CHECK(parse_equation(parts[i]) == d.steps[i].equation);
}

TEST_CASE("a derivation without a goal has no prompt") {
  Derivation d = golden_derivation();
  d.steps.back().role = StepRole::Ordinary;
  CHECK_THROWS_AS(build_prompt(d), RoleMissing);
}

TEST_CASE("qualifying examples") {
  PromptRecord p = build_prompt(golden_derivation());
  CHECK(is_qualifying_example(p));
  p.prompt = "Given $a = b$, then derive $c = d$, then obtain $e = f$";
  CHECK_FALSE(is_qualifying_example(p));
  p.prompt = "Given $a = b$ and $c = d$, then obtain $e = f$";
  CHECK_FALSE(is_qualifying_example(p));
}

TEST_CASE("few-shot prompt layout") {
  const auto pool = prompt_pool(41, 40);
  const PromptRecord& target = pool[3];
  Rng rng(1);
  const std::string s = build_fewshot(target, pool, rng);
  CHECK(s.rfind(std::string(kFewshotHeader) + "\n\n", 0) == 0);
  CHECK(count(s, "Prompt: ") == 6);
  CHECK(count(s, "Derivation: ") == 5);
  const std::string tail = std::string(kFewshotInstruction) + "\n\nPrompt: " + target.prompt + "\n";
  CHECK(s.size() >= tail.size());
  CHECK(s.compare(s.size() - tail.size(), tail.size(), tail) == 0);
  // The evaluated record never appears as an example.
  CHECK(count(s, target.prompt) == 1);
}

TEST_CASE("few-shot examples always include two qualifying ones") {
  const auto pool = prompt_pool(43, 60);
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const PromptRecord& p = pool[rng.below(pool.size())];
    const std::string s = build_fewshot(p, pool, rng);
    std::size_t qualifying = 0;
    for (const auto& r : pool) {
      if (r.static_id != p.static_id && is_qualifying_example(r) && s.find("Prompt: " + r.prompt + "\n") != std::string::npos) {
        ++qualifying;
      }
    }
    CHECK(qualifying >= 2);
  }
}

TEST_CASE("few-shot needs a large enough pool") {
  auto pool = prompt_pool(41, 6);
  Rng rng(1);
  CHECK_THROWS_AS(build_fewshot(pool[0], {pool[0], pool[1]}, rng), InsufficientPool);
}

TEST_CASE("token estimate") {
  CHECK(estimate_tokens("") == 0);
  CHECK(estimate_tokens("x") == 1);
  CHECK(estimate_tokens("\\frac{d}{d x}") == 8);  // \frac { d } { d x }
  CHECK(estimate_tokens("x_{12} + ab") == 7);      // x _ { 12 } + ab
  CHECK(estimate_tokens("Given $q{(a)} = e^{a}$") == 15);
}

TEST_CASE("perturbation names") {
  for (auto p : {Perturbation::VR, Perturbation::EE, Perturbation::AG, Perturbation::SR}) {
    CHECK(perturbation_from_name(perturbation_name(p)) == p);
  }
  CHECK(perturbation_from_name("vr") == Perturbation::VR);
  CHECK_FALSE(perturbation_from_name("XX"));
}
