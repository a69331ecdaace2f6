#include "eqderiv/latex.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "eqderiv/canonical.hpp"

namespace eqderiv {

// ---------------------------------------------------------------------------
// Rendering

namespace {

bool is_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool negative_exponent(const Expr& f) {
  return f.is(ExprKind::Pow) && f.exponent().is_negative_number();
}

class Renderer {
 public:
  explicit Renderer(const SymbolTable* table) : table_(table) {}

  std::string expr(const Expr& e) {
    switch (e.kind()) {
      case ExprKind::Integer:
        return e.value().str();
      case ExprKind::Rational: {
        auto [neg, body] = signed_term(e);
        return neg ? "- " + body : body;
      }
      case ExprKind::Symbol:
        return name(e.name());
      case ExprKind::Func:
        return func(e);
      case ExprKind::Applied:
        return applied(e);
      case ExprKind::Pow:
        return power(e);
      case ExprKind::Mul: {
        auto [neg, body] = signed_term(e);
        return neg ? "- " + body : body;
      }
      case ExprKind::Add:
        return sum(e);
      case ExprKind::Derivative:
        return derivative(e);
      case ExprKind::Integral:
        return integral(e);
    }
    return {};
  }

 private:
  const std::string& name(const std::string& n) {
    if (table_ && !table_->contains(n)) throw RenderError("unresolved symbol: " + n);
    return n;
  }

  // Magnitude rendering of a term plus its sign, for use inside sums.
  std::pair<bool, std::string> signed_term(const Expr& e) {
    if (e.is_number()) {
      const BigRational v = e.value();
      const bool neg = v < 0;
      const BigRational a = neg ? BigRational(-v) : v;
      if (denominator(a) == 1) return {neg, numerator(a).str()};
      return {neg, "\\frac{" + numerator(a).str() + "}{" + denominator(a).str() + "}"};
    }
    if (e.is(ExprKind::Mul)) return product(e);
    return {false, expr(e)};
  }

  std::pair<bool, std::string> product(const Expr& e) {
    auto [c, rest] = split_coefficient(e);
    const bool neg = c < 0;
    if (neg) c = -c;
    std::vector<Expr> num;
    std::vector<Expr> den;
    const auto push = [&](const Expr& f) {
      if (negative_exponent(f)) {
        den.push_back(pow(f.base(), neg_number(f.exponent())));
      } else {
        num.push_back(f);
      }
    };
    if (rest.is(ExprKind::Mul)) {
      for (const auto& f : rest.operands()) push(f);
    } else {
      push(rest);
    }
    const std::string cnum = numerator(c) == 1 ? "" : numerator(c).str();
    const std::string cden = denominator(c) == 1 ? "" : denominator(c).str();
    if (den.empty() && cden.empty()) return {neg, factor_list(cnum, num)};
    std::string top = num.size() == 1 && cnum.empty() ? expr(num.front()) : factor_list(cnum, num);
    std::string bottom = den.size() == 1 && cden.empty() ? expr(den.front()) : factor_list(cden, den);
    if (top.empty()) top = "1";
    return {neg, "\\frac{" + top + "}{" + bottom + "}"};
  }

  static Expr neg_number(const Expr& n) { return Expr::number(-n.value()); }

  std::string factor_list(const std::string& coefficient, const std::vector<Expr>& factors) {
    std::string out = coefficient;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      const Expr& f = factors[i];
      const bool last = i + 1 == factors.size();
      const bool wrap = f.is(ExprKind::Add) ||
                        (!last && (f.is(ExprKind::Derivative) || f.is(ExprKind::Integral)));
      if (!out.empty()) out += ' ';
      out += wrap ? "(" + expr(f) + ")" : expr(f);
    }
    return out;
  }

  std::string sum(const Expr& e) {
    std::string out;
    bool first = true;
    for (const auto& t : e.operands()) {
      auto [neg, body] = signed_term(t);
      if (first) {
        out = neg ? "- " + body : body;
        first = false;
      } else {
        out += neg ? " - " : " + ";
        out += body;
      }
    }
    return out;
  }

  std::string func(const Expr& e) {
    switch (e.func()) {
      case FuncKind::Exp:
        if (e.arg().is_one()) return "e";
        return "e^{" + expr(e.arg()) + "}";
      case FuncKind::Sin: return "\\sin{(" + expr(e.arg()) + ")}";
      case FuncKind::Cos: return "\\cos{(" + expr(e.arg()) + ")}";
      case FuncKind::Log: return "\\log{(" + expr(e.arg()) + ")}";
    }
    return {};
  }

  std::string applied(const Expr& e) {
    std::string out = function_latex(name(e.name())) + "{(";
    bool first = true;
    for (const auto& a : e.operands()) {
      if (!first) out += ',';
      out += expr(a);
      first = false;
    }
    return out + ")}";
  }

  std::string power(const Expr& e) {
    const Expr& b = e.base();
    const Expr& x = e.exponent();
    if (x.is_negative_number()) {
      return "\\frac{1}{" + expr(pow(b, neg_number(x))) + "}";
    }
    const std::string ex = "^{" + expr(x) + "}";
    if (b.is(ExprKind::Func) && b.func() != FuncKind::Exp) {
      const std::string head = b.func() == FuncKind::Sin ? "\\sin" : b.func() == FuncKind::Cos ? "\\cos" : "\\log";
      return head + ex + "{(" + expr(b.arg()) + ")}";
    }
    const bool wrap = b.is(ExprKind::Add) || b.is(ExprKind::Mul) || b.is(ExprKind::Pow) ||
                      b.is(ExprKind::Derivative) || b.is(ExprKind::Integral) ||
                      b.is(ExprKind::Rational) || b.is_negative_number() ||
                      (b.is(ExprKind::Func) && b.func() == FuncKind::Exp);
    if (wrap) return "(" + expr(b) + ")" + ex;
    if (b.is(ExprKind::Symbol) && b.name().find('^') != std::string::npos) {
      return "{" + name(b.name()) + "}" + ex;
    }
    return expr(b) + ex;
  }

  std::string variable_power(const std::string& v, int order) {
    if (order == 1) return v;
    const std::string base = v.find('^') != std::string::npos ? "{" + v + "}" : v;
    return base + "^{" + std::to_string(order) + "}";
  }

  std::string operand_body(const Expr& body) {
    bool wrap = body.is(ExprKind::Add) || body.is_negative_number();
    if (body.is(ExprKind::Mul) && split_coefficient(body).first < 0) wrap = true;
    return wrap ? "(" + expr(body) + ")" : expr(body);
  }

  std::string derivative(const Expr& e) {
    const std::string& v = name(e.var());
    std::set<std::string> vars;
    for (auto& s : variables(e.body())) vars.insert(s);
    vars.insert(v);
    const bool partial = vars.size() > 1;
    const std::string d = partial ? "\\partial" : "d";
    std::string head;
    if (e.order() == 1) {
      head = "\\frac{" + d + "}{" + d + " " + v + "}";
    } else {
      const std::string n = std::to_string(e.order());
      head = "\\frac{" + d + "^{" + n + "}}{" + d + " " + variable_power(v, e.order()) + "}";
    }
    return head + " " + operand_body(e.body());
  }

  std::string integral(const Expr& e) {
    return "\\int " + operand_body(e.body()) + " d" + name(e.var());
  }

  const SymbolTable* table_;
};

}  // namespace

std::string to_latex(const Expr& e) { return Renderer(nullptr).expr(e); }
std::string to_latex(const Expr& e, const SymbolTable& table) { return Renderer(&table).expr(e); }

std::string to_latex(const Equation& eq) {
  Renderer r(nullptr);
  return r.expr(eq.lhs) + " = " + r.expr(eq.rhs);
}

std::string to_latex(const Equation& eq, const SymbolTable& table) {
  Renderer r(&table);
  return r.expr(eq.lhs) + " = " + r.expr(eq.rhs);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Parser {
 public:
  Parser(std::string_view s, const SymbolTable& table) : s_(s) {
    for (const auto& entry : table.entries()) names_.push_back(entry.name);
    std::sort(names_.begin(), names_.end(), [](const std::string& a, const std::string& b) {
      return a.size() != b.size() ? a.size() > b.size() : a < b;
    });
  }

  Expr whole_expr() {
    Expr e = sum();
    skip_ws();
    if (!at_end()) fail("unexpected trailing input");
    return e;
  }

  Equation whole_equation() {
    Expr lhs = sum();
    skip_ws();
    if (!consume("=")) fail("expected '='");
    Expr rhs = sum();
    skip_ws();
    if (!at_end()) fail("unexpected trailing input");
    return {std::move(lhs), std::move(rhs)};
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(message, pos_); }

  bool at_end() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }
  bool looking_at(std::string_view t) const { return s_.substr(pos_, t.size()) == t; }

  // Matches a command exactly, not as a prefix of a longer command name.
  bool looking_at_command(std::string_view cmd) const {
    return looking_at(cmd) && !is_letter(pos_ + cmd.size() < s_.size() ? s_[pos_ + cmd.size()] : '\0');
  }

  void skip_ws() {
    for (;;) {
      while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r')) ++pos_;
      if (looking_at("\\,") || looking_at("\\;") || looking_at("\\!")) {
        pos_ += 2;
        continue;
      }
      break;
    }
  }

  bool consume(std::string_view t) {
    skip_ws();
    if (!looking_at(t)) return false;
    pos_ += t.size();
    return true;
  }

  void expect(std::string_view t) {
    if (!consume(t)) fail("expected '" + std::string(t) + "'");
  }

  bool open_paren() {
    skip_ws();
    if (looking_at_command("\\left")) {
      const std::size_t save = pos_;
      pos_ += 5;
      if (consume("(")) return true;
      pos_ = save;
      return false;
    }
    return consume("(");
  }

  void close_paren() {
    skip_ws();
    if (looking_at_command("\\right")) {
      pos_ += 6;
    }
    expect(")");
  }

  bool at_product_end() {
    skip_ws();
    if (at_end()) return true;
    const char c = peek();
    if (c == '+' || c == '-' || c == '=' || c == ')' || c == '}' || c == ',' || c == ']') return true;
    if (looking_at_command("\\right")) return true;
    if (integral_depth_ > 0 && c == 'd') return true;
    return false;
  }

  Expr sum() {
    std::vector<Expr> terms;
    skip_ws();
    bool negate = false;
    if (consume("-")) {
      negate = true;
    } else {
      consume("+");
    }
    Expr t = product();
    terms.push_back(negate ? neg(t) : t);
    for (;;) {
      skip_ws();
      if (consume("+")) {
        terms.push_back(product());
      } else if (consume("-")) {
        terms.push_back(neg(product()));
      } else {
        break;
      }
    }
    return add(std::move(terms));
  }

  Expr product() {
    std::vector<Expr> factors;
    while (!at_product_end()) {
      if (looking_at_command("\\cdot") || looking_at_command("\\times")) {
        pos_ += looking_at_command("\\cdot") ? 5 : 6;
        continue;
      }
      factors.push_back(factor());
    }
    if (factors.empty()) fail("expected an expression");
    return mul(std::move(factors));
  }

  Expr factor() {
    Expr p = primary();
    for (;;) {
      skip_ws();
      if (peek() != '^') break;
      ++pos_;
      p = pow(p, script());
    }
    return p;
  }

  // Superscript argument: a braced expression or a single token.
  Expr script() {
    skip_ws();
    if (consume("{")) {
      Expr e = sum();
      expect("}");
      return e;
    }
    if (is_digit(peek())) {
      Expr d = Expr::integer(peek() - '0');
      ++pos_;
      return d;
    }
    return primary();
  }

  Expr braced() {
    expect("{");
    const int depth = integral_depth_;
    integral_depth_ = 0;
    Expr e = sum();
    integral_depth_ = depth;
    expect("}");
    return e;
  }

  Expr number() {
    const std::size_t start = pos_;
    while (is_digit(peek())) ++pos_;
    BigRational v(BigInt(std::string(s_.substr(start, pos_ - start))));
    if (peek() == '.' && is_digit(peek(1))) {
      ++pos_;
      const std::size_t fs = pos_;
      while (is_digit(peek())) ++pos_;
      const std::string frac(s_.substr(fs, pos_ - fs));
      BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
      v += BigRational(BigInt(frac), scale);
    }
    return Expr::number(v);
  }

  // Longest symbol-table match at the cursor, respecting command boundaries.
  std::optional<std::string> table_symbol() {
    for (const auto& n : names_) {
      if (!looking_at(n)) continue;
      const std::size_t slash = n.rfind('\\');
      if (slash != std::string::npos && is_letter(n.back())) {
        bool command_tail = true;
        for (std::size_t i = slash + 1; i < n.size(); ++i) command_tail = command_tail && is_letter(n[i]);
        if (command_tail && is_letter(peek(n.size()))) continue;
      }
      pos_ += n.size();
      return n;
    }
    return std::nullopt;
  }

  std::string command_at_cursor() const {
    std::size_t end = pos_ + 1;
    while (end < s_.size() && is_letter(s_[end])) ++end;
    return std::string(s_.substr(pos_, end - pos_));
  }

  std::string symbol_name() {
    skip_ws();
    if (peek() == '{') {
      ++pos_;
      std::string n = symbol_name();
      expect("}");
      return n;
    }
    if (auto n = table_symbol()) return *n;
    if (peek() == '\\') throw UnknownCommand(command_at_cursor(), pos_);
    if (is_letter(peek()) && peek() != 'e' && peek() != 'd') {
      return std::string(1, s_[pos_++]);
    }
    fail("expected a symbol");
  }

  std::vector<Expr> applied_args() {
    std::vector<Expr> args;
    args.push_back(sum());
    while (consume(",")) args.push_back(sum());
    return args;
  }

  // After a function head: "{(args)}" or "(args)".
  std::optional<std::vector<Expr>> maybe_call() {
    const std::size_t save = pos_;
    skip_ws();
    if (peek() == '{') {
      ++pos_;
      if (open_paren()) {
        auto args = applied_args();
        close_paren();
        expect("}");
        return args;
      }
    }
    pos_ = save;
    return std::nullopt;
  }

  Expr elementary(FuncKind kind) {
    std::optional<Expr> power;
    skip_ws();
    if (peek() == '^') {
      ++pos_;
      power = script();
    }
    skip_ws();
    Expr arg;
    if (peek() == '{') {
      ++pos_;
      if (open_paren()) {
        arg = sum();
        close_paren();
      } else {
        arg = sum();
      }
      expect("}");
    } else if (open_paren()) {
      arg = sum();
      close_paren();
    } else {
      arg = factor();
    }
    Expr f = func(kind, arg);
    return power ? pow(f, *power) : f;
  }

  struct DiffHeader {
    std::string var;
    int order;
  };

  std::optional<int> order_script() {
    skip_ws();
    if (peek() != '^') return 1;
    ++pos_;
    Expr n = script();
    if (!n.is_integer() || n.value() < 1 || n.value() > 64) return std::nullopt;
    return static_cast<int>(numerator(n.value()));
  }

  // "\frac{d}{d x}", "\frac{d^{2}}{d x^{2}}" and the \partial forms.
  std::optional<DiffHeader> diff_header() {
    const std::size_t save = pos_;
    auto reset = [&]() -> std::optional<DiffHeader> {
      pos_ = save;
      return std::nullopt;
    };
    if (!consume("{")) return reset();
    skip_ws();
    bool partial = false;
    if (looking_at_command("\\partial")) {
      partial = true;
      pos_ += 8;
    } else if (peek() == 'd' && !is_letter(peek(1))) {
      ++pos_;
    } else {
      return reset();
    }
    auto top = order_script();
    if (!top || !consume("}") || !consume("{")) return reset();
    skip_ws();
    if (partial ? !looking_at_command("\\partial") : !(peek() == 'd')) return reset();
    pos_ += partial ? 8 : 1;
    std::string var;
    try {
      var = symbol_name();
    } catch (const ParseError&) {
      return reset();
    }
    auto bottom = order_script();
    if (!bottom || *bottom != *top || !consume("}")) return reset();
    return DiffHeader{var, *top};
  }

  Expr primary() {
    skip_ws();
    if (at_end()) fail("unexpected end of input");
    const char c = peek();
    if (is_digit(c)) return number();
    if (open_paren()) {
      const int depth = integral_depth_;
      integral_depth_ = 0;
      Expr e = sum();
      integral_depth_ = depth;
      close_paren();
      return e;
    }
    if (c == '{') {
      ++pos_;
      const int depth = integral_depth_;
      integral_depth_ = 0;
      Expr e = sum();
      integral_depth_ = depth;
      expect("}");
      return e;
    }
    if (c == '\\') return command();
    if (c == 'e' && !is_letter(peek(1))) {
      ++pos_;
      skip_ws();
      if (peek() == '^') {
        ++pos_;
        return exp(script());
      }
      return exp(Expr::integer(1));
    }
    return symbol_or_call();
  }

  Expr symbol_or_call() {
    const std::size_t start = pos_;
    std::string n;
    if (auto t = table_symbol()) {
      n = *t;
    } else if (is_letter(peek()) && peek() != 'd') {
      n = std::string(1, s_[pos_++]);
    } else {
      pos_ = start;
      fail(std::string("unexpected character '") + peek() + "'");
    }
    if (auto args = maybe_call()) return applied(n, std::move(*args));
    return Expr::symbol(n);
  }

  Expr command() {
    const std::size_t start = pos_;
    if (looking_at_command("\\frac")) {
      pos_ += 5;
      if (auto h = diff_header()) {
        skip_ws();
        bool negate = false;
        if (consume("-")) negate = true;
        Expr body = product();
        return derivative(negate ? neg(body) : body, h->var, h->order);
      }
      Expr num = braced();
      Expr den = braced();
      return div(num, den);
    }
    if (looking_at_command("\\int")) {
      pos_ += 4;
      ++integral_depth_;
      Expr body = sum();
      --integral_depth_;
      skip_ws();
      if (peek() != 'd') fail("expected differential");
      ++pos_;
      std::string var = symbol_name();
      return integral(body, var);
    }
    static constexpr std::pair<std::string_view, FuncKind> kElementary[] = {
        {"\\sin", FuncKind::Sin}, {"\\cos", FuncKind::Cos}, {"\\log", FuncKind::Log},
        {"\\ln", FuncKind::Log},  {"\\exp", FuncKind::Exp}};
    for (const auto& [cmd, kind] : kElementary) {
      if (looking_at_command(cmd)) {
        pos_ += cmd.size();
        return elementary(kind);
      }
    }
    if (looking_at_command("\\sqrt")) {
      pos_ += 5;
      return pow(braced(), Expr::rational(1, 2));
    }
    if (looking_at_command("\\operatorname")) {
      pos_ += 13;
      expect("{");
      const std::size_t name_start = pos_;
      int depth = 1;
      while (!at_end() && depth > 0) {
        if (peek() == '{') ++depth;
        if (peek() == '}') --depth;
        if (depth > 0) ++pos_;
      }
      if (at_end()) fail("unterminated \\operatorname");
      std::string n(s_.substr(name_start, pos_ - name_start));
      ++pos_;
      auto args = maybe_call();
      if (!args) fail("expected function arguments");
      return applied(n, std::move(*args));
    }
    if (auto t = table_symbol()) {
      if (auto args = maybe_call()) return applied(*t, std::move(*args));
      return Expr::symbol(*t);
    }
    throw UnknownCommand(command_at_cursor(), start);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  int integral_depth_ = 0;
  std::vector<std::string> names_;
};

}  // namespace

Expr parse_latex(std::string_view s, const SymbolTable& table) {
  return Parser(s, table).whole_expr();
}

Equation parse_equation(std::string_view s, const SymbolTable& table) {
  return Parser(s, table).whole_equation();
}

}  // namespace eqderiv
