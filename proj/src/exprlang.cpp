#include "riccati_lab/exprlang.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <optional>

#include "riccati_lab/errors.hpp"

namespace riccati_lab::expr {

struct Expr::Node {
  Op op = Op::Number;
  double value = 0.0;
  std::string name;
  Fn fn = Fn::Exp;
  std::vector<Expr> args;
};

namespace {

struct FnInfo {
  Fn fn;
  std::string_view name;
  std::size_t arity;
};

constexpr std::array<FnInfo, 11> kFunctions{{
    {Fn::Exp, "exp", 1},
    {Fn::Log, "log", 1},
    {Fn::Sin, "sin", 1},
    {Fn::Cos, "cos", 1},
    {Fn::Tan, "tan", 1},
    {Fn::Tanh, "tanh", 1},
    {Fn::Sinh, "sinh", 1},
    {Fn::Cosh, "cosh", 1},
    {Fn::Sqrt, "sqrt", 1},
    {Fn::Abs, "abs", 1},
    {Fn::Pow, "pow", 2},
}};

std::optional<FnInfo> lookup_function(std::string_view name) {
  for (const auto& info : kFunctions)
    if (info.name == name) return info;
  return std::nullopt;
}

}  // namespace

std::string_view function_name(Fn fn) {
  for (const auto& info : kFunctions)
    if (info.fn == fn) return info.name;
  return "?";
}

// ---------------------------------------------------------------------------
// Node construction and access

Expr::Expr() : Expr(number(0.0)) {}

Expr Expr::number(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Number;
  n->value = v;
  return Expr(std::move(n));
}

Expr Expr::variable() {
  static const Expr x = [] {
    auto n = std::make_shared<Node>();
    n->op = Op::Variable;
    return Expr(std::move(n));
  }();
  return x;
}

Expr Expr::constant(std::string_view name) {
  auto n = std::make_shared<Node>();
  n->op = Op::Constant;
  n->name = std::string(name);
  if (name == "pi")
    n->value = std::numbers::pi;
  else if (name == "e")
    n->value = std::numbers::e;
  else
    throw UnknownIdentifier(std::string(name), 0);
  return Expr(std::move(n));
}

Expr Expr::binary(Op op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = {std::move(lhs), std::move(rhs)};
  return Expr(std::move(n));
}

Expr Expr::negate(Expr operand) {
  auto n = std::make_shared<Node>();
  n->op = Op::Neg;
  n->args = {std::move(operand)};
  return Expr(std::move(n));
}

Expr Expr::call(Fn fn, std::vector<Expr> args) {
  auto n = std::make_shared<Node>();
  n->op = Op::Call;
  n->fn = fn;
  n->args = std::move(args);
  return Expr(std::move(n));
}

Op Expr::op() const noexcept { return node_->op; }
double Expr::value() const noexcept { return node_->value; }
const std::string& Expr::name() const noexcept { return node_->name; }
Fn Expr::fn() const noexcept { return node_->fn; }
std::span<const Expr> Expr::args() const noexcept { return node_->args; }

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op()) return false;
  switch (a.op()) {
    case Op::Number:
      return a.value() == b.value();
    case Op::Variable:
      return true;
    case Op::Constant:
      return a.name() == b.name();
    case Op::Call:
      if (a.fn() != b.fn()) return false;
      break;
    default:
      break;
  }
  auto aa = a.args();
  auto ba = b.args();
  if (aa.size() != ba.size()) return false;
  for (std::size_t i = 0; i < aa.size(); ++i)
    if (!(aa[i] == ba[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string_view text;
  double number = 0.0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= src_.size()) return {Tok::End, start, {}};
    const char ch = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') return lex_number();
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                                    src_[pos_] == '_'))
        ++pos_;
      return {Tok::Ident, start, src_.substr(start, pos_ - start)};
    }
    ++pos_;
    switch (ch) {
      case '+': return {Tok::Plus, start, src_.substr(start, 1)};
      case '-': return {Tok::Minus, start, src_.substr(start, 1)};
      case '*': return {Tok::Star, start, src_.substr(start, 1)};
      case '/': return {Tok::Slash, start, src_.substr(start, 1)};
      case '^': return {Tok::Caret, start, src_.substr(start, 1)};
      case '(': return {Tok::LParen, start, src_.substr(start, 1)};
      case ')': return {Tok::RParen, start, src_.substr(start, 1)};
      case ',': return {Tok::Comma, start, src_.substr(start, 1)};
      default:
        throw SyntaxError(start, "unexpected character");
    }
  }

 private:
  Token lex_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++n;
      }
      return n;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw SyntaxError(start, "malformed number", {"digit"});
    // An exponent is only consumed when digits follow; "2e" stays "2" then "e".
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        digits();
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    const double v = std::strtod(text.c_str(), nullptr);
    if (!std::isfinite(v)) throw SyntaxError(start, "number out of range");
    Token t{Tok::Number, start, src_.substr(start, pos_ - start)};
    t.number = v;
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

const std::vector<std::string> kOperand = {"number", "x", "pi", "e", "function", "(", "-"};
const std::vector<std::string> kOperator = {"+", "-", "*", "/", "^", "end of input"};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { advance(); }

  Expr parse_all() {
    if (tok_.kind == Tok::End) throw SyntaxError(0, "empty expression", kOperand);
    Expr e = parse_expr();
    if (tok_.kind != Tok::End) {
      if (tok_.kind == Tok::Number || tok_.kind == Tok::Ident || tok_.kind == Tok::LParen)
        throw SyntaxError(tok_.offset, "implicit multiplication is not supported", kOperator);
      throw SyntaxError(tok_.offset, "unexpected '" + std::string(tok_.text) + "'", kOperator);
    }
    return e;
  }

 private:
  void advance() { tok_ = lexer_.next(); }

  void expect(Tok kind, const char* what) {
    if (tok_.kind != kind)
      throw SyntaxError(tok_.offset,
                        tok_.kind == Tok::End ? "unexpected end of input"
                                              : "unexpected '" + std::string(tok_.text) + "'",
                        {what});
    advance();
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    while (tok_.kind == Tok::Plus || tok_.kind == Tok::Minus) {
      const Op op = tok_.kind == Tok::Plus ? Op::Add : Op::Sub;
      advance();
      lhs = Expr::binary(op, lhs, parse_term());
    }
    return lhs;
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    while (tok_.kind == Tok::Star || tok_.kind == Tok::Slash) {
      const Op op = tok_.kind == Tok::Star ? Op::Mul : Op::Div;
      advance();
      lhs = Expr::binary(op, lhs, parse_unary());
    }
    return lhs;
  }

  Expr parse_unary() {
    if (tok_.kind == Tok::Minus) {
      advance();
      return Expr::negate(parse_unary());
    }
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    if (tok_.kind == Tok::Caret) {
      advance();
      return Expr::binary(Op::Pow, base, parse_unary());
    }
    return base;
  }

  Expr parse_primary() {
    const Token t = tok_;
    switch (t.kind) {
      case Tok::Number:
        advance();
        return Expr::number(t.number);
      case Tok::LParen: {
        advance();
        Expr inner = parse_expr();
        expect(Tok::RParen, ")");
        return inner;
      }
      case Tok::Ident:
        return parse_identifier();
      case Tok::End:
        throw SyntaxError(t.offset, "unexpected end of input", kOperand);
      default:
        throw SyntaxError(t.offset, "unexpected '" + std::string(t.text) + "'", kOperand);
    }
  }

  Expr parse_identifier() {
    const Token t = tok_;
    advance();
    if (t.text == "x") return Expr::variable();
    if (t.text == "pi" || t.text == "e") return Expr::constant(t.text);
    auto info = lookup_function(t.text);
    if (!info) throw UnknownIdentifier(std::string(t.text), t.offset);
    expect(Tok::LParen, "(");
    std::vector<Expr> args;
    args.push_back(parse_expr());
    while (tok_.kind == Tok::Comma) {
      advance();
      args.push_back(parse_expr());
    }
    if (tok_.kind != Tok::RParen)
      throw SyntaxError(tok_.offset, "unterminated argument list",
                        args.size() < info->arity ? std::vector<std::string>{",", ")"}
                                                  : std::vector<std::string>{")"});
    if (args.size() != info->arity)
      throw SyntaxError(t.offset, std::string(info->name) + " takes " +
                                      std::to_string(info->arity) + " argument(s), got " +
                                      std::to_string(args.size()));
    advance();
    return Expr::call(info->fn, std::move(args));
  }

  Lexer lexer_;
  Token tok_{Tok::End, 0, {}};
};

}  // namespace

Expr parse(std::string_view source) { return Parser(source).parse_all(); }

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_number(double v) {
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

// Binding strength of the printed form; atoms bind tightest. Negative
// literals print with their own parentheses.
int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    default:
      return 6;
  }
}

void print_to(const Expr& e, std::string& out);

void print_at(const Expr& e, int min_prec, std::string& out) {
  if (precedence(e) < min_prec) {
    out += '(';
    print_to(e, out);
    out += ')';
  } else {
    print_to(e, out);
  }
}

void print_to(const Expr& e, std::string& out) {
  auto args = e.args();
  switch (e.op()) {
    case Op::Number:
      if (std::signbit(e.value()))
        out += "(-" + format_number(-e.value()) + ")";
      else
        out += format_number(e.value());
      return;
    case Op::Variable:
      out += 'x';
      return;
    case Op::Constant:
      out += e.name();
      return;
    case Op::Add:
    case Op::Sub:
      print_at(args[0], 1, out);
      out += e.op() == Op::Add ? "+" : "-";
      print_at(args[1], 2, out);
      return;
    case Op::Mul:
    case Op::Div:
      print_at(args[0], 2, out);
      out += e.op() == Op::Mul ? "*" : "/";
      print_at(args[1], 3, out);
      return;
    case Op::Neg:
      out += '-';
      print_at(args[0], 3, out);
      return;
    case Op::Pow:
      print_at(args[0], 5, out);
      out += '^';
      print_at(args[1], 3, out);
      return;
    case Op::Call:
      out += function_name(e.fn());
      out += '(';
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (i) out += ',';
        print_to(args[i], out);
      }
      out += ')';
      return;
  }
}

}  // namespace

std::string print(const Expr& e) {
  std::string out;
  print_to(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

[[noreturn]] void domain_fail(const Expr& e, double x, const char* reason) {
  throw DomainError(print(e), x, reason);
}

double checked(const Expr& e, double x, double v) {
  if (!std::isfinite(v)) domain_fail(e, x, "non-finite result");
  return v;
}

double power(const Expr& e, double x, double base, double exponent) {
  if (base == 0.0 && exponent < 0.0) domain_fail(e, x, "division by zero");
  return checked(e, x, std::pow(base, exponent));
}

double apply_fn(const Expr& e, double x, Fn fn, double u, double v) {
  switch (fn) {
    case Fn::Exp: return checked(e, x, std::exp(u));
    case Fn::Log:
      if (!(u > 0.0)) domain_fail(e, x, "log of non-positive");
      return std::log(u);
    case Fn::Sin: return std::sin(u);
    case Fn::Cos: return std::cos(u);
    case Fn::Tan: return checked(e, x, std::tan(u));
    case Fn::Tanh: return std::tanh(u);
    case Fn::Sinh: return checked(e, x, std::sinh(u));
    case Fn::Cosh: return checked(e, x, std::cosh(u));
    case Fn::Sqrt:
      if (u < 0.0) domain_fail(e, x, "sqrt of negative");
      return std::sqrt(u);
    case Fn::Abs: return std::fabs(u);
    case Fn::Pow: return power(e, x, u, v);
  }
  return 0.0;
}

double eval_node(const Expr& e, double x) {
  auto args = e.args();
  switch (e.op()) {
    case Op::Number:
    case Op::Constant:
      return e.value();
    case Op::Variable:
      return x;
    case Op::Add:
      return checked(e, x, eval_node(args[0], x) + eval_node(args[1], x));
    case Op::Sub:
      return checked(e, x, eval_node(args[0], x) - eval_node(args[1], x));
    case Op::Mul:
      return checked(e, x, eval_node(args[0], x) * eval_node(args[1], x));
    case Op::Div: {
      const double num = eval_node(args[0], x);
      const double den = eval_node(args[1], x);
      if (den == 0.0) domain_fail(e, x, "division by zero");
      return checked(e, x, num / den);
    }
    case Op::Pow:
      return power(e, x, eval_node(args[0], x), eval_node(args[1], x));
    case Op::Neg:
      return -eval_node(args[0], x);
    case Op::Call: {
      const double u = eval_node(args[0], x);
      const double v = args.size() > 1 ? eval_node(args[1], x) : 0.0;
      return apply_fn(e, x, e.fn(), u, v);
    }
  }
  return 0.0;
}

}  // namespace

double eval(const Expr& e, double x) {
  if (!std::isfinite(x)) throw DomainError(print(e), x, "non-finite argument");
  return eval_node(e, x);
}

// ---------------------------------------------------------------------------
// Folding builders

namespace {

std::optional<double> literal(const Expr& e) {
  if (e.is_number()) return e.value();
  return std::nullopt;
}

Expr folded_or(double v, Expr fallback) {
  return std::isfinite(v) ? Expr::number(v) : std::move(fallback);
}

}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
  auto la = literal(a), lb = literal(b);
  if (la && lb) return folded_or(*la + *lb, Expr::binary(Op::Add, a, b));
  if (la && *la == 0.0) return b;
  if (lb && *lb == 0.0) return a;
  return Expr::binary(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  auto la = literal(a), lb = literal(b);
  if (la && lb) return folded_or(*la - *lb, Expr::binary(Op::Sub, a, b));
  if (lb && *lb == 0.0) return a;
  if (la && *la == 0.0) return -b;
  return Expr::binary(Op::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  auto la = literal(a), lb = literal(b);
  if (la && lb) return folded_or(*la * *lb, Expr::binary(Op::Mul, a, b));
  if ((la && *la == 0.0) || (lb && *lb == 0.0)) return Expr::number(0.0);
  if (la && *la == 1.0) return b;
  if (lb && *lb == 1.0) return a;
  return Expr::binary(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  auto la = literal(a), lb = literal(b);
  if (la && lb && *lb != 0.0) return folded_or(*la / *lb, Expr::binary(Op::Div, a, b));
  if (lb && *lb == 1.0) return a;
  if (la && *la == 0.0 && lb && *lb != 0.0) return Expr::number(0.0);
  return Expr::binary(Op::Div, a, b);
}

Expr operator-(const Expr& a) {
  if (auto la = literal(a)) return Expr::number(-*la);
  if (a.op() == Op::Neg) return a.args()[0];
  return Expr::negate(a);
}

Expr pow(const Expr& base, const Expr& exponent) {
  auto lb = literal(base), le = literal(exponent);
  if (le && *le == 1.0) return base;
  if (le && *le == 0.0) return Expr::number(1.0);
  if (lb && le && !(*lb == 0.0 && *le < 0.0))
    return folded_or(std::pow(*lb, *le), Expr::binary(Op::Pow, base, exponent));
  return Expr::binary(Op::Pow, base, exponent);
}

Expr apply(Fn fn, const Expr& arg) {
  Expr call = Expr::call(fn, {arg});
  if (arg.is_number()) {
    try {
      return folded_or(eval(call, 0.0), call);
    } catch (const DomainError&) {
      return call;
    }
  }
  return call;
}

Expr fold(const Expr& e) {
  auto args = e.args();
  switch (e.op()) {
    case Op::Number:
    case Op::Variable:
    case Op::Constant:
      return e;
    case Op::Add: return fold(args[0]) + fold(args[1]);
    case Op::Sub: return fold(args[0]) - fold(args[1]);
    case Op::Mul: return fold(args[0]) * fold(args[1]);
    case Op::Div: return fold(args[0]) / fold(args[1]);
    case Op::Pow: return pow(fold(args[0]), fold(args[1]));
    case Op::Neg: return -fold(args[0]);
    case Op::Call:
      if (e.fn() == Fn::Pow) {
        Expr u = fold(args[0]), v = fold(args[1]);
        if (u.is_number() && v.is_number()) {
          Expr folded = pow(u, v);
          if (folded.is_number()) return folded;
        }
        return Expr::call(Fn::Pow, {u, v});
      }
      return apply(e.fn(), fold(args[0]));
  }
  return e;
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

Expr d_power(const Expr& u, const Expr& v, const Expr& self) {
  const Expr du = derive(u);
  const Expr dv = derive(v);
  if (dv.is_number(0.0)) {
    // v constant in x: v * u^(v-1) * u'
    return v * pow(u, v - Expr::number(1.0)) * du;
  }
  if (du.is_number(0.0)) {
    // u constant in x: u^v * log(u) * v'
    return self * apply(Fn::Log, u) * dv;
  }
  return self * (dv * apply(Fn::Log, u) + v * du / u);
}

}  // namespace

Expr derive(const Expr& e) {
  auto args = e.args();
  const Expr one = Expr::number(1.0);
  const Expr two = Expr::number(2.0);
  switch (e.op()) {
    case Op::Number:
    case Op::Constant:
      return Expr::number(0.0);
    case Op::Variable:
      return one;
    case Op::Add:
      return derive(args[0]) + derive(args[1]);
    case Op::Sub:
      return derive(args[0]) - derive(args[1]);
    case Op::Mul:
      return derive(args[0]) * args[1] + args[0] * derive(args[1]);
    case Op::Div: {
      const Expr& u = args[0];
      const Expr& v = args[1];
      const Expr dv = derive(v);
      if (dv.is_number(0.0)) return derive(u) / v;
      return (derive(u) * v - u * dv) / pow(v, two);
    }
    case Op::Pow:
      return d_power(args[0], args[1], e);
    case Op::Neg:
      return -derive(args[0]);
    case Op::Call: {
      const Expr& u = args[0];
      if (e.fn() == Fn::Pow) return d_power(u, args[1], e);
      const Expr du = derive(u);
      if (du.is_number(0.0)) return Expr::number(0.0);
      switch (e.fn()) {
        case Fn::Exp: return e * du;
        case Fn::Log: return du / u;
        case Fn::Sin: return apply(Fn::Cos, u) * du;
        case Fn::Cos: return -(apply(Fn::Sin, u) * du);
        case Fn::Tan: return du / pow(apply(Fn::Cos, u), two);
        case Fn::Tanh: return (one - pow(e, two)) * du;
        case Fn::Sinh: return apply(Fn::Cosh, u) * du;
        case Fn::Cosh: return apply(Fn::Sinh, u) * du;
        case Fn::Sqrt: return du / (two * e);
        case Fn::Abs: return u / e * du;
        case Fn::Pow: break;
      }
      break;
    }
  }
  return Expr::number(0.0);
}

bool is_polynomial(const Expr& e) {
  auto args = e.args();
  switch (e.op()) {
    case Op::Number:
    case Op::Constant:
    case Op::Variable:
      return true;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
      return is_polynomial(args[0]) && is_polynomial(args[1]);
    case Op::Neg:
      return is_polynomial(args[0]);
    case Op::Div:
      return is_polynomial(args[0]) && fold(args[1]).is_number() &&
             fold(args[1]).value() != 0.0;
    case Op::Pow: {
      const Expr n = fold(args[1]);
      return is_polynomial(args[0]) && n.is_number() && n.value() >= 0.0 &&
             std::floor(n.value()) == n.value();
    }
    case Op::Call:
      return false;
  }
  return false;
}

}  // namespace riccati_lab::expr
