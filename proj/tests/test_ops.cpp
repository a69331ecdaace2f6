#include "doctest.h"
#include "support.hpp"

using namespace eqderiv;
using namespace eqderiv::testing;

namespace {

const Expr x = sym("x");
const Expr y = sym("y");
const Expr f = applied("f", {x});

Equation apply1(OpId op, const Equation& p, std::optional<Expr> operand = std::nullopt,
                const std::string& fresh = {}) {
  return apply_op(op, std::vector<Equation>{p}, operand, fresh);
}

Equation apply2(OpId op, const Equation& a, const Equation& b) {
  return apply_op(op, std::vector<Equation>{a, b}, std::nullopt);
}

}  // namespace

TEST_CASE("registry lists 18 operations with unique names and symbols") {
  REQUIRE(all_ops().size() == 18);
  std::set<std::string_view> names, symbols;
  int named = 0;
  for (const auto& info : all_ops()) {
    names.insert(info.name);
    symbols.insert(info.symbol);
    CHECK(op_from_name(info.name) == info.id);
    CHECK(op_info(info.id).id == info.id);
    if (!info.extension) ++named;
    if (info.inverse) CHECK(op_info(*info.inverse).inverse == info.id);
  }
  CHECK(names.size() == 18);
  CHECK(symbols.size() == 18);
  CHECK(named == 12);
  CHECK_FALSE(op_from_name("Bogus"));
  CHECK(op_from_name("Premise") == OpId::Premise);
}

TEST_CASE("registry enable flags") {
  OpRegistry all;
  CHECK(all.enabled_ops().size() == 18);
  OpRegistry core(false);
  CHECK(core.enabled_ops().size() == 12);
  CHECK(core.ops_of_arity(2) == std::vector<OpId>{OpId::SubstLhs, OpId::SubstRhs});
  core.set_enabled(OpId::AddEq, true);
  CHECK(core.ops_of_arity(2).size() == 3);
  CHECK(all.ops_of_arity(0) == std::vector<OpId>{OpId::DefineFromExpr});
}

TEST_CASE("arithmetic on both sides") {
  const Equation p{f, sin(x)};
  CHECK(apply1(OpId::AddExpr, p, y) == Equation{add(f, y), add(sin(x), y)});
  CHECK(apply1(OpId::SubExpr, p, y) == Equation{sub(f, y), sub(sin(x), y)});
  CHECK(apply1(OpId::MulExpr, p, y) == Equation{mul(y, f), mul(y, sin(x))});
  CHECK(apply1(OpId::DivExpr, p, y) == Equation{div(f, y), div(sin(x), y)});
  CHECK(apply1(OpId::PowExpr, p, num(2)) == Equation{pow(f, num(2)), pow(sin(x), num(2))});
  CHECK_THROWS_AS(apply1(OpId::DivExpr, p, num(0)), InapplicableOp);
  CHECK_THROWS_AS(apply1(OpId::MulExpr, p, num(0)), InapplicableOp);
}

TEST_CASE("inverse pairs undo each other") {
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const Equation p{random_expr(rng, 3, {"x", "y"}), random_expr(rng, 3, {"x", "y"})};
    const Expr o = random_expr(rng, 2, {"x", "y"});
    CHECK(apply1(OpId::SubExpr, apply1(OpId::AddExpr, p, o), o) == p);
    // A number times a lone sum distributes, which division does not undo.
    const bool distributes =
        o.is_number() || (o.is(ExprKind::Add) && (p.lhs.is_number() || p.rhs.is_number()));
    if (!o.is_zero() && !distributes) CHECK(apply1(OpId::DivExpr, apply1(OpId::MulExpr, p, o), o) == p);
    CHECK(apply1(OpId::SwapSides, apply1(OpId::SwapSides, p)) == p);
    CHECK(apply1(OpId::Negate, apply1(OpId::Negate, p)) == p);
  }
}

TEST_CASE("calculus ops") {
  const Equation p{f, pow(x, num(2))};
  const Equation dp = apply1(OpId::Diff, p, x);
  CHECK(dp == Equation{derivative(f, "x"), derivative(pow(x, num(2)), "x")});
  CHECK(apply1(OpId::EvalDiff, dp) == Equation{derivative(f, "x"), mul(num(2), x)});
  CHECK_THROWS_AS(apply1(OpId::Diff, p, y), InapplicableOp);
  CHECK_THROWS_AS(apply1(OpId::Diff, p, sin(x)), InapplicableOp);
  CHECK_THROWS_AS(apply1(OpId::EvalDiff, p), InapplicableOp);

  const Equation ip = apply1(OpId::Int, p, x);
  CHECK(ip == Equation{integral(f, "x"), integral(pow(x, num(2)), "x")});
  CHECK(apply1(OpId::EvalInt, ip, sym("C")) ==
        Equation{integral(f, "x"), add(mul(Expr::rational(1, 3), pow(x, num(3))), sym("C"))});
  CHECK_THROWS_AS(apply1(OpId::EvalInt, ip, x), InapplicableOp);  // constant in use
  CHECK_THROWS_AS(apply1(OpId::EvalInt, p, sym("C")), InapplicableOp);
  const Equation two{integral(x, "x"), integral(cos(x), "x")};
  CHECK_THROWS_AS(apply1(OpId::EvalInt, two, sym("C")), InapplicableOp);
}

TEST_CASE("substitution ops") {
  const Equation a{f, sin(x)};
  const Equation b{applied("g", {x}), add(f, num(1))};
  CHECK(apply2(OpId::SubstLhs, a, b) == Equation{applied("g", {x}), add(sin(x), num(1))});
  const Equation c{y, add(sin(x), num(2))};
  CHECK(apply2(OpId::SubstRhs, a, c) == Equation{y, add(f, num(2))});
  CHECK_THROWS_AS(apply2(OpId::SubstLhs, a, c), InapplicableOp);  // f absent
  CHECK_THROWS_AS(apply2(OpId::SubstLhs, Equation{x, y}, c), InapplicableOp);  // atom target
  CHECK(apply2(OpId::AddEq, a, c) == Equation{add(f, y), add({sin(x), sin(x), num(2)})});
}

TEST_CASE("naming ops need a fresh head") {
  const Equation p{f, add(mul(y, x), sym("z"))};
  CHECK(apply1(OpId::Rename, p, std::nullopt, "h") == Equation{applied("h", {sym("z"), x, y}), p.rhs});
  CHECK_THROWS_AS(apply1(OpId::Rename, p), InapplicableOp);
  CHECK_THROWS_AS(apply1(OpId::Rename, Equation{f, num(3)}, std::nullopt, "h"), InapplicableOp);
  const Expr e = sin(y);
  CHECK(apply_op(OpId::DefineFromExpr, {}, e, "h") == Equation{applied("h", {y}), e});
}

TEST_CASE("exp and log of both sides") {
  const Equation p{f, y};
  CHECK(apply1(OpId::ExpBothSides, p) == Equation{exp(f), exp(y)});
  CHECK(apply1(OpId::LogBothSides, apply1(OpId::ExpBothSides, p)) == p);
  CHECK_THROWS_AS(apply1(OpId::LogBothSides, Equation{f, num(0)}), InapplicableOp);
  CHECK_THROWS_AS(apply1(OpId::LogBothSides, Equation{f, num(-2)}), InapplicableOp);
}

TEST_CASE("arity and operand presence are enforced") {
  const Equation p{f, y};
  CHECK_THROWS_AS(apply_op(OpId::AddExpr, std::vector<Equation>{p, p}, y), ArityMismatch);
  CHECK_THROWS_AS(apply1(OpId::AddExpr, p), ArityMismatch);
  CHECK_THROWS_AS(apply1(OpId::Negate, p, y), ArityMismatch);
  CHECK_THROWS_AS(apply1(OpId::SubstLhs, p), ArityMismatch);
  CHECK_THROWS_AS(apply1(OpId::Premise, p), InapplicableOp);
}

TEST_CASE("the worked example replays") {
  const Derivation d = golden_derivation();
  REQUIRE(d.size() == 7);
  CHECK(to_latex(d.steps[2].equation) == "G{(a)} = - e^{a} + \\frac{d}{d a} e^{a}");
  CHECK(to_latex(d.steps[4].equation) == "- e^{a} + \\frac{d}{d a} q{(a)} = 0");
  CHECK(to_latex(d.steps[5].equation) == "G{(a)} = 0");
  CHECK(to_latex(d.back().equation) == "e^{G{(a)}} = 1");
  CHECK(d.steps[0].role == StepRole::Premise);
  CHECK(d.steps[4].role == StepRole::Intermediate);
  CHECK(d.steps[5].role == StepRole::Ordinary);
  CHECK(d.back().role == StepRole::Goal);
  const auto r = replay(d);
  CHECK(r.valid);
  CHECK(is_dag_coherent(d));
}

TEST_CASE("replay rejects tampering") {
  const Derivation good = golden_derivation();
  SUBCASE("wrong equation") {
    Derivation d = good;
    d.steps[5].equation.rhs = num(1);
    auto r = replay(d);
    CHECK_FALSE(r.valid);
    CHECK(r.first_invalid == 5);
  }
  SUBCASE("forward parent") {
    Derivation d = good;
    d.steps[3].parents = {1, 4};
    CHECK(replay(d).first_invalid == 3);
  }
  SUBCASE("wrong role") {
    Derivation d = good;
    d.steps[5].role = StepRole::Intermediate;
    CHECK_FALSE(replay(d).valid);
  }
  SUBCASE("duplicate") {
    Derivation d = good;
    d.steps.insert(d.steps.begin() + 2, d.steps[1]);
    CHECK_FALSE(replay(d).valid);
  }
  SUBCASE("disconnected step") {
    Derivation d = good;
    Step extra;
    extra.equation = Equation{sym("w"), num(3)};
    d.steps.insert(d.steps.begin() + 2, extra);
    for (std::size_t i = 3; i < d.size(); ++i) {
      for (auto& p : d.steps[i].parents) p += p >= 2 ? 1 : 0;
    }
    assign_roles(d);
    CHECK_FALSE(is_dag_coherent(d));
    CHECK(replay(d).reason == "steps not connected to the final equation");
  }
  SUBCASE("unexpected operand") {
    Derivation d = good;
    d.steps[4].operand = x;
    CHECK(replay(d).reason == "operand presence mismatch");
  }
}

TEST_CASE("appendix derivations replay after annotation by search") {
  const std::map<int, std::vector<std::size_t>> premises{
      {13, {0}}, {14, {0}}, {15, {0}}, {16, {0}}, {17, {0}}, {18, {0}}, {19, {0}},
      {20, {0}}, {21, {0}}, {22, {0, 3}}, {23, {0, 2}}, {24, {0}}, {25, {0}}};
  const auto all = load_appendix(data_path("appendix_derivations.txt"));
  REQUIRE(all.size() == 13);
  for (const auto& a : all) {
    INFO("derivation ", a.number);
    std::vector<Equation> eqs;
    for (const auto& l : a.latex) eqs.push_back(parse_equation(l));
    const Derivation d = annotate_by_search(eqs);
    const auto r = replay(d);
    INFO(r.reason);
    CHECK(r.valid);
    std::vector<std::size_t> given;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.steps[i].op == OpId::Premise) given.push_back(i);
    }
    std::string got;
    for (auto g : given) got += std::to_string(g) + " ";
    std::string want;
    for (auto g : premises.at(a.number)) want += std::to_string(g) + " ";
    CHECK(got == want);
  }
}

TEST_CASE("recency weights") {
  const auto w = history_weights(6, 10);
  REQUIRE(w.size() == 6);
  double sum = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sum += w[i];
    if (i) CHECK(w[i] > w[i - 1]);
  }
  CHECK(sum == doctest::Approx(1.0));
  CHECK(w.back() / w.front() == doctest::Approx(std::pow(10.0, 5.0 / 6)));
  const auto flat = history_weights(4, 1);
  for (double v : flat) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("apply draws fresh names for naming ops") {
  Derivation d;
  Step p;
  p.equation = Equation{f, mul(x, y)};
  d.steps.push_back(p);
  Rng rng(4);
  const Step s = apply(OpId::Rename, d, {0}, std::nullopt, rng);
  REQUIRE(s.equation.lhs.is(ExprKind::Applied));
  CHECK_FALSE(used_names(d).count(s.equation.lhs.name()));
  CHECK(s.parents == std::vector<std::size_t>{0});
  d.steps.push_back(s);
  assign_roles(d);
  CHECK(replay(d).valid);
}
