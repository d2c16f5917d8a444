#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "riccati_lab/exprlang.hpp"

namespace riccati_lab {

inline constexpr double kDefaultQuadratureTolerance = 1e-10;

struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static Interval all() { return {}; }
  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool bounded() const { return lo > -std::numeric_limits<double>::infinity() &&
                                hi < std::numeric_limits<double>::infinity(); }
};

/// A real function of one real variable on an interval, optionally carrying
/// its exact derivative. Cheap to copy.
class ScalarFunction {
 public:
  using Fn = std::function<double(double)>;

  ScalarFunction();  // the zero function on the whole line
  ScalarFunction(Fn f, Interval domain, std::string label = {});
  ScalarFunction(Fn f, Fn df, Interval domain, std::string label = {});

  static ScalarFunction from_expr(const expr::Expr& e, Interval domain = Interval::all(),
                                  std::string label = {});
  static ScalarFunction constant(double value, Interval domain = Interval::all());

  /// Throws OutOfDomain outside the domain.
  double operator()(double x) const;
  bool has_derivative() const { return static_cast<bool>(df_); }
  /// Exact derivative; only valid when has_derivative().
  double derivative(double x) const;

  const Interval& domain() const { return domain_; }
  const std::string& label() const { return label_; }
  /// The source expression when built from one.
  const std::optional<expr::Expr>& expression() const { return expr_; }

  ScalarFunction with_domain(Interval domain) const;
  ScalarFunction without_derivative() const;

 private:
  void check(double x) const;

  Fn f_;
  Fn df_;
  Interval domain_;
  std::string label_;
  std::optional<expr::Expr> expr_;
};

/// Exact derivative when available; otherwise Richardson-extrapolated
/// finite differences (Ridders' scheme) seeded with h = eps^(1/5)(1+|x|).
/// Central differences in the interior, one-sided within h of an endpoint.
double differentiate(const ScalarFunction& f, double x);

/// F(x) = integral of g from x0 to x, held as a chain of Chebyshev panels.
///
/// Each panel interpolates g at 17 Chebyshev-Lobatto points; F is the exact
/// integral of that interpolant, so it is smooth inside a panel and continuous
/// across panels. Panels are bisected until the Chebyshev tail is below
/// tol times the panel's own magnitude (with a round-off floor).
class CumulativeIntegral {
 public:
  static constexpr int kDegree = 16;

  struct Node {
    double x;
    double value;
  };

  double operator()(double x) const;
  /// Interpolated integrand, the exact derivative of operator().
  double slope(double x) const;

  const ScalarFunction& integrand() const;
  double base_point() const;
  const Interval& interval() const;
  /// Panel breakpoints with F at each.
  std::vector<Node> nodes() const;
  int interpolation_order() const { return kDegree; }
  /// Sum of the per-panel error estimates.
  double achieved_tolerance() const;
  std::size_t panel_count() const;

  /// F as a ScalarFunction whose exact derivative is the integrand.
  ScalarFunction as_function(std::string label = {}) const;

 struct Impl;  // opaque

 private:
  friend CumulativeIntegral antiderivative(const ScalarFunction&, double, Interval, double);
  explicit CumulativeIntegral(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// Throws NonFiniteIntegrand or ToleranceNotMet.
CumulativeIntegral antiderivative(const ScalarFunction& g, double x0, Interval interval,
                                  double tol = kDefaultQuadratureTolerance);

/// Throws OutOfDomain outside the integral's interval.
double eval_integral(const CumulativeIntegral& F, double x);

/// Uniform grid of n points covering [lo, hi] inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Root of f in [lo, hi] by bisection given a sign change (or a zero at an end).
double bisect(const std::function<double(double)>& f, double lo, double hi, double xtol = 1e-12);

}  // namespace riccati_lab
