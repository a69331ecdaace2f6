#include "eqderiv/expr.hpp"

#include <functional>
#include <sstream>
#include <stdexcept>

namespace eqderiv {

namespace detail {

struct Node {
  ExprKind kind{ExprKind::Integer};
  FuncKind func{FuncKind::Sin};
  int order{0};
  BigRational value;
  std::string name;  // symbol / applied name, or derivative/integral variable
  std::vector<Expr> children;
  std::size_t hash{0};
  std::size_t size{1};
};

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

}  // namespace

struct Builder {
  static std::shared_ptr<Node> node(ExprKind kind) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    return n;
  }

  static Expr finish(std::shared_ptr<Node> n) {
    std::size_t h = mix(0x51ed270b27e1ULL, static_cast<std::size_t>(n->kind));
    switch (n->kind) {
      case ExprKind::Integer:
      case ExprKind::Rational:
        h = mix(h, std::hash<std::string>{}(n->value.str()));
        break;
      case ExprKind::Symbol:
      case ExprKind::Applied:
      case ExprKind::Integral:
        h = mix(h, std::hash<std::string>{}(n->name));
        break;
      case ExprKind::Derivative:
        h = mix(h, std::hash<std::string>{}(n->name));
        h = mix(h, static_cast<std::size_t>(n->order));
        break;
      case ExprKind::Func:
        h = mix(h, static_cast<std::size_t>(n->func));
        break;
      default:
        break;
    }
    std::size_t size = 1;
    for (const auto& c : n->children) {
      h = mix(h, c.hash());
      size += c.node_count();
    }
    n->hash = h;
    n->size = size;
    return Expr(std::shared_ptr<const Node>(std::move(n)));
  }
};

}  // namespace detail

using detail::Builder;

std::string_view func_name(FuncKind kind) {
  switch (kind) {
    case FuncKind::Sin: return "sin";
    case FuncKind::Cos: return "cos";
    case FuncKind::Exp: return "exp";
    case FuncKind::Log: return "log";
  }
  return "?";
}

Expr::Expr() : Expr(number(0)) {}

Expr Expr::number(BigRational value) {
  auto n = Builder::node(denominator(value) == 1 ? ExprKind::Integer : ExprKind::Rational);
  n->value = std::move(value);
  return Builder::finish(std::move(n));
}

Expr Expr::integer(long long value) { return number(BigRational(value)); }

Expr Expr::rational(long long num, long long den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  if (den < 0) return number(BigRational(-BigInt(num), -BigInt(den)));
  return number(BigRational(num, den));
}

Expr Expr::symbol(std::string name) {
  auto n = Builder::node(ExprKind::Symbol);
  n->name = std::move(name);
  return Builder::finish(std::move(n));
}

Expr Expr::make_func(FuncKind kind, Expr arg) {
  auto n = Builder::node(ExprKind::Func);
  n->func = kind;
  n->children.push_back(std::move(arg));
  return Builder::finish(std::move(n));
}

Expr Expr::make_applied(std::string name, std::vector<Expr> args) {
  auto n = Builder::node(ExprKind::Applied);
  n->name = std::move(name);
  n->children = std::move(args);
  return Builder::finish(std::move(n));
}

Expr Expr::make_pow(Expr base, Expr exponent) {
  auto n = Builder::node(ExprKind::Pow);
  n->children = {std::move(base), std::move(exponent)};
  return Builder::finish(std::move(n));
}

Expr Expr::make_mul(std::vector<Expr> factors) {
  auto n = Builder::node(ExprKind::Mul);
  n->children = std::move(factors);
  return Builder::finish(std::move(n));
}

Expr Expr::make_add(std::vector<Expr> terms) {
  auto n = Builder::node(ExprKind::Add);
  n->children = std::move(terms);
  return Builder::finish(std::move(n));
}

Expr Expr::make_derivative(Expr body, std::string var, int order) {
  if (order < 1) throw std::invalid_argument("derivative order must be positive");
  auto n = Builder::node(ExprKind::Derivative);
  n->name = std::move(var);
  n->order = order;
  n->children.push_back(std::move(body));
  return Builder::finish(std::move(n));
}

Expr Expr::make_integral(Expr body, std::string var) {
  auto n = Builder::node(ExprKind::Integral);
  n->name = std::move(var);
  n->children.push_back(std::move(body));
  return Builder::finish(std::move(n));
}

ExprKind Expr::kind() const { return node_->kind; }
bool Expr::is_number() const {
  return node_->kind == ExprKind::Integer || node_->kind == ExprKind::Rational;
}
bool Expr::is_integer() const { return node_->kind == ExprKind::Integer; }
bool Expr::is_zero() const { return is_integer() && node_->value == 0; }
bool Expr::is_one() const { return is_integer() && node_->value == 1; }
bool Expr::is_negative_number() const { return is_number() && node_->value < 0; }

const BigRational& Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
const std::string& Expr::var() const { return node_->name; }
FuncKind Expr::func() const { return node_->func; }
int Expr::order() const { return node_->order; }

std::span<const Expr> Expr::operands() const { return node_->children; }
const Expr& Expr::base() const { return node_->children[0]; }
const Expr& Expr::exponent() const { return node_->children[1]; }
const Expr& Expr::arg() const { return node_->children[0]; }
const Expr& Expr::body() const { return node_->children[0]; }

std::size_t Expr::hash() const { return node_->hash; }
std::size_t Expr::node_count() const { return node_->size; }

namespace {

int rank(ExprKind k) {
  switch (k) {
    case ExprKind::Integer:
    case ExprKind::Rational: return 0;
    case ExprKind::Symbol: return 1;
    case ExprKind::Applied: return 2;
    case ExprKind::Func: return 3;
    case ExprKind::Pow: return 4;
    case ExprKind::Mul: return 5;
    case ExprKind::Add: return 6;
    case ExprKind::Derivative: return 7;
    case ExprKind::Integral: return 8;
  }
  return 9;
}

int cmp_str(const std::string& a, const std::string& b) {
  int c = a.compare(b);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

int cmp_seq(std::span<const Expr> a, std::span<const Expr> b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (int c = compare(a[i], b[i]); c != 0) return c;
  }
  if (a.size() == b.size()) return 0;
  return a.size() < b.size() ? -1 : 1;
}

}  // namespace

int compare(const Expr& a, const Expr& b) {
  if (a.identity() == b.identity()) return 0;
  const int ra = rank(a.kind());
  const int rb = rank(b.kind());
  if (ra != rb) return ra < rb ? -1 : 1;
  switch (a.kind()) {
    case ExprKind::Integer:
    case ExprKind::Rational:
      if (a.value() == b.value()) return 0;
      return a.value() < b.value() ? -1 : 1;
    case ExprKind::Symbol:
      return cmp_str(a.name(), b.name());
    case ExprKind::Func:
      if (a.func() != b.func()) return a.func() < b.func() ? -1 : 1;
      return compare(a.arg(), b.arg());
    case ExprKind::Applied:
      if (int c = cmp_str(a.name(), b.name()); c != 0) return c;
      return cmp_seq(a.operands(), b.operands());
    case ExprKind::Pow:
      if (int c = compare(a.base(), b.base()); c != 0) return c;
      return compare(a.exponent(), b.exponent());
    case ExprKind::Mul:
    case ExprKind::Add:
      return cmp_seq(a.operands(), b.operands());
    case ExprKind::Derivative:
      if (int c = cmp_str(a.var(), b.var()); c != 0) return c;
      if (a.order() != b.order()) return a.order() < b.order() ? -1 : 1;
      return compare(a.body(), b.body());
    case ExprKind::Integral:
      if (int c = cmp_str(a.var(), b.var()); c != 0) return c;
      return compare(a.body(), b.body());
  }
  return 0;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.identity() == b.identity()) return true;
  if (a.hash() != b.hash() || a.node_count() != b.node_count()) return false;
  return compare(a, b) == 0;
}

std::size_t Equation::hash() const { return detail::mix(lhs.hash(), rhs.hash() * 31U); }

std::string debug_string(const Expr& e) {
  std::ostringstream os;
  auto seq = [&](std::string_view head, std::span<const Expr> xs) {
    os << head << '(';
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) os << ", ";
      os << debug_string(xs[i]);
    }
    os << ')';
  };
  switch (e.kind()) {
    case ExprKind::Integer:
    case ExprKind::Rational: os << e.value().str(); break;
    case ExprKind::Symbol: os << "Symbol(" << e.name() << ')'; break;
    case ExprKind::Func: os << func_name(e.func()) << '(' << debug_string(e.arg()) << ')'; break;
    case ExprKind::Applied: seq("Applied:" + e.name(), e.operands()); break;
    case ExprKind::Pow:
      os << "Pow(" << debug_string(e.base()) << ", " << debug_string(e.exponent()) << ')';
      break;
    case ExprKind::Mul: seq("Mul", e.operands()); break;
    case ExprKind::Add: seq("Add", e.operands()); break;
    case ExprKind::Derivative:
      os << "Derivative(" << debug_string(e.body()) << ", " << e.var() << ", " << e.order() << ')';
      break;
    case ExprKind::Integral:
      os << "Integral(" << debug_string(e.body()) << ", " << e.var() << ')';
      break;
  }
  return os.str();
}

}  // namespace eqderiv
