#include "riccati_lab/calculus.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "riccati_lab/errors.hpp"

using namespace riccati_lab;

namespace {

ScalarFunction fx(const char* src, Interval dom = Interval::all()) {
  return ScalarFunction::from_expr(expr::parse(src), dom);
}

// Composite Simpson on 2^k panels: the brute-force quadrature oracle.
double simpson(const std::function<double(double)>& g, double a, double b, int log2_panels) {
  const long n = 1L << log2_panels;
  const double h = (b - a) / n;
  double s = g(a) + g(b);
  for (long i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(a + i * h);
  return s * h / 3.0;
}

}  // namespace

TEST(Differentiate, ExactWhenAvailable) {
  EXPECT_DOUBLE_EQ(differentiate(fx("x^2"), 1.0), 2.0);
  EXPECT_DOUBLE_EQ(differentiate(fx("exp(x)"), 0.0), 1.0);
  EXPECT_NEAR(differentiate(fx("sin(x)"), std::numbers::pi / 2), 0.0, 1e-15);
}

TEST(Differentiate, FiniteDifferenceFallback) {
  const Interval dom{-1.0, 3.0};
  EXPECT_NEAR(differentiate(fx("x^2", dom).without_derivative(), 1.0), 2.0, 1e-10);
  EXPECT_NEAR(differentiate(fx("exp(x)", dom).without_derivative(), 0.0), 1.0, 1e-10);
  EXPECT_NEAR(differentiate(fx("sin(x)", dom).without_derivative(), std::numbers::pi / 2), 0.0,
              1e-10);
  // Endpoints fall back to one-sided differences.
  EXPECT_NEAR(differentiate(fx("exp(x)", dom).without_derivative(), -1.0), std::exp(-1.0), 1e-8);
  EXPECT_NEAR(differentiate(fx("exp(x)", dom).without_derivative(), 3.0), std::exp(3.0), 1e-6);
  // Close to a pole the step shrinks.
  const auto pole = fx("1/(1-x)", {0.0, 0.99}).without_derivative();
  EXPECT_NEAR(differentiate(pole, 0.98) / 2500.0, 1.0, 1e-8);
}

TEST(Differentiate, OutOfDomain) {
  EXPECT_THROW(differentiate(fx("x", {0.0, 1.0}).without_derivative(), 1.5), OutOfDomain);
}

TEST(Antiderivative, Polynomial) {
  const auto F = antiderivative(fx("2*x"), 0.0, {0.0, 4.0});
  EXPECT_NEAR(F(3.0), 9.0, 1e-12);
  EXPECT_EQ(F(0.0), 0.0);
}

TEST(Antiderivative, Exponential) {
  const auto F = antiderivative(fx("exp(x)"), 0.0, {0.0, 1.0});
  EXPECT_NEAR(eval_integral(F, 1.0), std::numbers::e - 1.0, 1e-13);
}

TEST(Antiderivative, GaussianGrowthAgainstSimpsonOracle) {
  // Oracle: composite Simpson with 2^20 panels, computed independently.
  const double oracle = simpson([](double t) { return std::exp(t * t); }, 0.0, 1.0, 20);
  EXPECT_NEAR(oracle, 1.4626517459071816, 1e-13);
  const auto F = antiderivative(fx("exp(x^2)"), 0.0, {0.0, 1.0});
  EXPECT_NEAR(F(1.0), oracle, 1e-10 * (1.0 + oracle));
}

TEST(Antiderivative, TrivialIntegrands) {
  const auto zero = antiderivative(fx("0"), 0.0, {-2.0, 7.0});
  for (double x : {-2.0, -0.5, 3.0, 7.0}) EXPECT_EQ(zero(x), 0.0);
  const auto one = antiderivative(fx("1"), 0.0, {0.0, 5.0});
  EXPECT_NEAR(one(5.0), 5.0, 1e-14);
  const auto mid = antiderivative(fx("cos(x)"), 1.0, {0.0, 3.0});
  EXPECT_EQ(mid(1.0), 0.0);
  EXPECT_NEAR(mid(0.0), -std::sin(1.0), 1e-13);
  EXPECT_NEAR(mid(3.0), std::sin(3.0) - std::sin(1.0), 1e-13);
}

TEST(Antiderivative, Errors) {
  EXPECT_THROW(antiderivative(fx("1/x"), 0.5, {0.0, 1.0}), NonFiniteIntegrand);
  EXPECT_THROW(antiderivative(fx("x"), 2.0, {0.0, 1.0}), OutOfDomain);
  const auto F = antiderivative(fx("x"), 0.0, {0.0, 1.0});
  EXPECT_THROW(F(1.5), OutOfDomain);
  // A jump never converges to the requested tolerance.
  const ScalarFunction step([](double x) { return x < 1.0 / 3.0 ? 0.0 : 1.0; }, Interval::all());
  EXPECT_THROW(antiderivative(step, 0.0, {0.0, 1.0}, 1e-14), ToleranceNotMet);
}

TEST(Antiderivative, MonotoneForOneSignedIntegrand) {
  const auto F = antiderivative(fx("1 + sin(5*x)^2"), 0.0, {0.0, 2.0});
  double prev = F(0.0);
  for (double x : linspace(0.0, 2.0, 401)) {
    const double v = F(x);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(Antiderivative, NodesMatchReferenceQuadrature) {
  const auto g = fx("exp(-x)*cos(3*x) + x^3");
  const auto F = antiderivative(g, 0.0, {0.0, 2.0});
  for (const auto& node : F.nodes()) {
    const double ref = simpson([&](double t) { return g(t); }, 0.0, node.x, 14);
    EXPECT_NEAR(node.value, ref, 1e-10 * (1.0 + std::fabs(ref))) << node.x;
  }
  EXPECT_LE(F.achieved_tolerance(), 1e-9);
  EXPECT_GE(F.interpolation_order(), 3);
}

// --- invariants ------------------------------------------------------------

TEST(Property, FundamentalTheorem) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const char* src : {"exp(x^2)", "sin(7*x)/(1+x^2)", "sqrt(1+x)*log(2+x)", "x^3-2*x"}) {
    const auto g = fx(src);
    const auto F = antiderivative(g, 0.0, {0.0, 1.0}).as_function().without_derivative();
    for (int i = 0; i < 64; ++i) {
      const double x = 0.01 + 0.98 * U(rng);
      const double gx = g(x);
      EXPECT_NEAR(differentiate(F, x), gx, 1e-6 * (1.0 + std::fabs(gx))) << src << " x=" << x;
    }
  }
}

TEST(Property, Additivity) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> U(-1.0, 2.0);
  const auto g = fx("cosh(x)*sin(3*x) + 2");
  const Interval I{-1.0, 2.0};
  const auto F = antiderivative(g, -1.0, I);
  for (int i = 0; i < 20; ++i) {
    const double x1 = U(rng), x2 = U(rng);
    const auto G = antiderivative(g, x1, I);
    const double lhs = F(x2) - F(x1);
    EXPECT_NEAR(lhs, G(x2), 1e-9 + 1e-9 * std::fabs(lhs));
  }
}

TEST(Property, Linearity) {
  const Interval I{0.0, 1.5};
  const auto g = fx("exp(x)*cos(x)");
  const auto h = fx("1/(1+x^2)");
  const double alpha = 2.5, beta = -0.75;
  const ScalarFunction combo([&](double x) { return alpha * g(x) + beta * h(x); }, I);
  const auto Fg = antiderivative(g, 0.0, I);
  const auto Fh = antiderivative(h, 0.0, I);
  const auto Fc = antiderivative(combo, 0.0, I);
  for (double x : linspace(0.0, 1.5, 31)) {
    const double expect = alpha * Fg(x) + beta * Fh(x);
    EXPECT_NEAR(Fc(x), expect, 1e-10 * (1.0 + std::fabs(expect)));
  }
}

TEST(Property, NestedIntegralsStayAccurate) {
  // integral of exp(integral of 2t) = integral of exp(x^2)
  const Interval I{0.0, 1.0};
  const auto inner = antiderivative(fx("2*x"), 0.0, I);
  const ScalarFunction g([inner](double x) { return std::exp(inner(x)); }, I);
  const auto outer = antiderivative(g, 0.0, I);
  EXPECT_NEAR(outer(1.0), 1.4626517459071816, 1e-11);
}

TEST(Bisect, FindsRoot) {
  EXPECT_NEAR(bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0), std::sqrt(2.0), 1e-11);
  EXPECT_EQ(bisect([](double x) { return x; }, 0.0, 1.0), 0.0);
}
