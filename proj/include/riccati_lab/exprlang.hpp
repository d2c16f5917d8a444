#pragma once

// Scalar expressions of one variable `x`.
//
// Grammar (see docs/expression_grammar.md):
//
//   expr    := term  { ("+" | "-") term }
//   term    := unary { ("*" | "/") unary }
//   unary   := "-" unary | power
//   power   := primary [ "^" unary ]          (right associative)
//   primary := number | "x" | "pi" | "e" | func "(" args ")" | "(" expr ")"
//
// Precedence: ^ > unary minus > * / > + -, so "-x^2" is -(x^2) and
// "2^-x" is 2^(-x). There is no implicit multiplication.

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace riccati_lab::expr {

enum class Op { Number, Variable, Constant, Add, Sub, Mul, Div, Pow, Neg, Call };

enum class Fn { Exp, Log, Sin, Cos, Tan, Tanh, Sinh, Cosh, Sqrt, Abs, Pow };

/// Immutable expression tree. Copies share structure; evaluation is pure.
class Expr {
 public:
  Expr();  // the literal 0

  static Expr number(double v);
  static Expr variable();
  static Expr constant(std::string_view name);  // "pi" or "e"
  static Expr binary(Op op, Expr lhs, Expr rhs);
  static Expr negate(Expr operand);
  static Expr call(Fn fn, std::vector<Expr> args);

  Op op() const noexcept;
  /// Literal value for Number, the constant's value for Constant.
  double value() const noexcept;
  /// Constant name ("pi"/"e"); empty otherwise.
  const std::string& name() const noexcept;
  Fn fn() const noexcept;
  std::span<const Expr> args() const noexcept;

  bool is_number() const noexcept { return op() == Op::Number; }
  bool is_number(double v) const noexcept { return is_number() && value() == v; }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr parse(std::string_view source);

/// Evaluates at x. Throws DomainError for log of non-positive, sqrt of
/// negative, division by zero or any non-finite intermediate result.
double eval(const Expr& e, double x);

/// Symbolic derivative with respect to x. The result is constant-folded.
/// d|u|/dx is emitted as u/abs(u)*u', undefined (DomainError) where u = 0.
Expr derive(const Expr& e);

/// Bottom-up constant folding; never folds into a non-finite literal.
Expr fold(const Expr& e);

/// Shortest text that parses back to the same tree (modulo folding of
/// negative literals, which print as "(-v)").
std::string print(const Expr& e);

/// True when e is a polynomial in x: numbers, constants, x, + - * and
/// powers with non-negative integer literal exponents.
bool is_polynomial(const Expr& e);

std::string_view function_name(Fn fn);

// Folding builders.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);
Expr apply(Fn fn, const Expr& arg);

}  // namespace riccati_lab::expr
