#include "riccati_lab/astro.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "riccati_lab/errors.hpp"

namespace riccati_lab {

StellarModel make_model(const std::string& eta, const std::string& delta, double A0, double R) {
  StellarModel m;
  m.eta = ScalarFunction::from_expr(expr::parse(eta), Interval::all(), "eta");
  m.delta = ScalarFunction::from_expr(expr::parse(delta), Interval::all(), "delta");
  m.A0 = A0;
  m.R = R;
  return m;
}

namespace {

double slope(const ScalarFunction& f, double x) {
  return f.has_derivative() ? f.derivative(x) : differentiate(f, x);
}

// Delta / x must stay bounded as x -> 0: compare the decades next to x_eps
// with the outer ones.
void check_centre_regularity(const StellarModel& m) {
  const double R2 = m.R * m.R;
  auto ratio = [&](int k) {
    const double x = R2 * std::pow(10.0, -k);
    return m.delta.domain().contains(x) ? std::fabs(m.delta(x) / x) : 0.0;
  };
  double outer = 0.0, inner = 0.0;
  for (int k = 1; k <= 2; ++k) outer = std::max(outer, ratio(k));
  for (int k = 5; k <= 6; ++k) inner = std::max(inner, ratio(k));
  if (!std::isfinite(inner) || inner > 10.0 * (1.0 + outer))
    throw SpecError("anisotropy Delta(x)/x is not bounded near the centre");
}

}  // namespace

void validate_model(const StellarModel& m) {
  if (!(m.R > 0.0) || !std::isfinite(m.R)) throw SpecError("radius R must be positive");
  if (!(m.A0 > 0.0) || !std::isfinite(m.A0)) throw SpecError("A0 must be positive");
  const Interval I = m.domain();
  auto V = [&](double x) { return 1.0 - 2.0 * x * m.eta(x); };
  const auto xs = linspace(I.lo, I.hi, 1025);
  if (!(V(xs[0]) > 0.0)) throw MetricSignatureViolation(xs[0]);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double v = V(xs[i]);
    if (!std::isfinite(v)) throw MetricSignatureViolation(xs[i]);
    if (!(v > 0.0)) throw MetricSignatureViolation(bisect(V, xs[i - 1], xs[i]));
  }
  for (double x : xs)
    if (!std::isfinite(m.delta(x))) throw SpecError("anisotropy is not finite at x=" + std::to_string(x));
  check_centre_regularity(m);
}

RiccatiProblem riccati_from_physics(const StellarModel& m) {
  validate_model(m);
  const Interval I = m.domain();
  if (m.eta.expression() && m.delta.expression()) {
    using expr::Expr;
    const Expr x = Expr::variable();
    const Expr eta = *m.eta.expression(), delta = *m.delta.expression();
    const Expr deta = expr::derive(eta);
    const Expr V = Expr::number(1) - Expr::number(2) * x * eta;
    const Expr a = (Expr::number(0.5) * deta + delta / (Expr::number(4) * x)) / V;
    const Expr b = (x * deta + eta) / V;
    return RiccatiProblem(ScalarFunction::from_expr(a, I, "a"), ScalarFunction::from_expr(b, I, "b"),
                          ScalarFunction::from_expr(Expr::number(-1), I, "c"), I);
  }
  const ScalarFunction eta = m.eta, delta = m.delta;
  auto a = [eta, delta](double x) {
    return (0.5 * slope(eta, x) + delta(x) / (4.0 * x)) / (1.0 - 2.0 * x * eta(x));
  };
  auto b = [eta](double x) {
    return (x * slope(eta, x) + eta(x)) / (1.0 - 2.0 * x * eta(x));
  };
  return RiccatiProblem(ScalarFunction(a, I, "a"), ScalarFunction(b, I, "b"),
                        ScalarFunction::constant(-1.0, I), I);
}

ScalarFunction metric_A(const ScalarFunction& u, double A0, double x0, Interval interval) {
  const auto U = antiderivative(u, x0, interval);
  return ScalarFunction([U, A0](double x) { return A0 * std::exp(U(x)); },
                        [U, A0](double x) { return A0 * std::exp(U(x)) * U.slope(x); }, interval,
                        "A");
}

MappedRiccati model_from_riccati(const RiccatiProblem& p, const SolutionFamily& family, double A0,
                                 const Tolerances& tol) {
  const Interval I = p.interval();
  const double R = std::sqrt(I.hi);
  if (!(I.lo >= 0.0 && I.lo <= 1e-6 * I.hi))
    throw SpecError("interval must start at or below 1e-6 R^2");
  const ScalarFunction a = p.a(), b = p.b(), c = p.c();
  const double c_lo = c(I.lo);
  for (double x : linspace(I.lo, I.hi, 1025)) {
    const double cx = c(x);
    if (!(std::fabs(cx) > tol.div && (cx > 0.0) == (c_lo > 0.0)))
      throw GuardViolation("c nonvanishing", x);
  }
  // u = -c y turns the problem into u' = -c a + (b + c'/c) u - u^2.
  auto A = [a, c](double x) { return -c(x) * a(x); };
  auto B = [b, c](double x) { return b(x) + slope(c, x) / c(x); };
  // int B = int b + log|c(x)/c(lo)|, so c' never enters a quadrature.
  const auto Wb = antiderivative(b, I.lo, I, tol.quad);
  auto W = [Wb, c, c_lo](double x) { return Wb(x) + std::log(c(x) / c_lo); };
  // V = 1 - 2 x eta = exp(-2 int B) keeps the metric signature automatically.
  auto w = [W](double x) { return -0.5 * std::expm1(-2.0 * W(x)); };
  auto dw = [W, B](double x) { return B(x) * std::exp(-2.0 * W(x)); };
  auto eta = [w](double x) { return w(x) / x; };
  auto deta = [w, dw](double x) { return (dw(x) * x - w(x)) / (x * x); };
  auto delta = [A, W, deta](double x) {
    return 4.0 * x * (A(x) * std::exp(-2.0 * W(x)) - 0.5 * deta(x));
  };

  StellarModel model;
  model.eta = ScalarFunction(eta, deta, I, "eta");
  model.delta = ScalarFunction(delta, I, "delta");
  model.A0 = A0;
  model.R = R;
  const ScalarFunction yp = family.particular(), N = family.numerator();
  return {model, SolutionFamily(family.form(),
                                ScalarFunction([yp, c](double x) { return -c(x) * yp(x); }, I),
                                ScalarFunction([N, c](double x) { return -c(x) * N(x); }, I),
                                family.quadrature(), I, family.constant_name())};
}

StellarProfile profile(const StellarModel& model, const ScalarFunction& u, const Tolerances& tol,
                       std::size_t grid) {
  const RiccatiProblem problem = riccati_from_physics(model);
  const Interval I = model.domain();
  {
    double worst = 0.0, at = I.lo;
    for (double x : linspace(I.lo, I.hi, 257)) {
      const double r = std::fabs(residual(problem, u.with_domain(I), x)) / (1.0 + std::fabs(u(x)));
      if (!(r <= worst)) {
        worst = r;
        at = x;
      }
    }
    if (!(worst <= tol.res)) throw NotASolution(worst, at);
  }

  const ScalarFunction eta = model.eta, delta = model.delta, uu = u;
  auto V = [eta](double x) { return 1.0 - 2.0 * x * eta(x); };
  auto dV = [eta](double x) { return -2.0 * eta(x) - 2.0 * x * slope(eta, x); };
  auto rho = [V, dV](double x) { return (1.0 - V(x)) / x - 2.0 * dV(x); };
  auto p_r = [V, uu](double x) { return 4.0 * V(x) * uu(x) + (V(x) - 1.0) / x; };
  auto p_perp = [p_r, delta](double x) { return p_r(x) + delta(x); };

  StellarProfile out;
  out.model = model;
  out.rho_fn = ScalarFunction(rho, I, "rho");
  out.p_r_fn = ScalarFunction(p_r, I, "p_r");
  out.p_perp_fn = ScalarFunction(p_perp, I, "p_perp");

  const ScalarFunction A = metric_A(u, model.A0, I.lo, I);
  // 2 m(r) = int_0^r xi^2 rho(xi^2) d xi, continued to the centre.
  const double x_min = eta.domain().lo;
  auto mass_integrand = [rho, x_min, I](double xi) {
    if (xi == 0.0) return 0.0;
    const double x = xi * xi;
    return x * rho(x > x_min ? x : std::max(x_min, I.lo));
  };
  const auto twice_m = antiderivative(ScalarFunction(mass_integrand, {0.0, model.R}), 0.0,
                                      {0.0, model.R}, tol.quad);

  out.x = linspace(I.lo, I.hi, grid);
  for (double x : out.x) {
    const double r = std::sqrt(x);
    out.r.push_back(r);
    out.V.push_back(V(x));
    out.A.push_back(A(x));
    out.u.push_back(u(x));
    out.rho.push_back(rho(x));
    out.p_r.push_back(p_r(x));
    out.p_perp.push_back(out.p_r.back() + delta(x));
    out.m.push_back(0.5 * twice_m(r));
    const double e = eta(x);
    out.mass_eta_error =
        std::max(out.mass_eta_error, std::fabs(out.m.back() / (r * r * r) - e) / (1.0 + std::fabs(e)));
  }
  return out;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::NonStrict: return "NONSTRICT";
    case Verdict::Fail: return "FAIL";
    case Verdict::Indeterminate: return "INDETERMINATE";
  }
  return "?";
}

namespace {

int severity(Verdict v) {
  switch (v) {
    case Verdict::Pass: return 0;
    case Verdict::NonStrict: return 1;
    case Verdict::Indeterminate: return 2;
    case Verdict::Fail: return 3;
  }
  return 3;
}

// Keeps the more severe verdict; ties keep the smaller radius.
void merge(ConditionVerdict& into, const ConditionVerdict& v) {
  const int a = severity(into.verdict), b = severity(v.verdict);
  if (b > a || (b == a && b > 0 && v.r && (!into.r || *v.r < *into.r))) into = v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double sup_abs(const std::vector<double>& v) {
  double s = 0.0;
  for (double t : v) s = std::max(s, std::fabs(t));
  return s;
}

// Second-order differences on a nonuniform grid.
std::vector<double> gradient(const std::vector<double>& r, const std::vector<double>& f) {
  const std::size_t n = r.size();
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t j = i == 0 ? 1 : (i == n - 1 ? n - 2 : i);
    const double h0 = r[j] - r[j - 1], h1 = r[j + 1] - r[j];
    const double fm = f[j - 1], f0 = f[j], fp = f[j + 1];
    if (i == 0)
      g[i] = -(2 * h0 + h1) / (h0 * (h0 + h1)) * fm + (h0 + h1) / (h0 * h1) * f0 -
             h0 / (h1 * (h0 + h1)) * fp;
    else if (i == n - 1)
      g[i] = h1 / (h0 * (h0 + h1)) * fm - (h0 + h1) / (h0 * h1) * f0 +
             (2 * h1 + h0) / (h1 * (h0 + h1)) * fp;
    else
      g[i] = -h1 / (h0 * (h0 + h1)) * fm + (h1 - h0) / (h0 * h1) * f0 + h0 / (h1 * (h0 + h1)) * fp;
  }
  return g;
}

ConditionVerdict positivity(const std::string& name, const std::vector<double>& xs,
                            const std::vector<double>& v, const ScalarFunction& fn) {
  const double tol = 1e-9 * (1.0 + sup_abs(v));
  ConditionVerdict out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < -tol) {
      double x = xs[i];
      if (i > 0 && v[i - 1] >= 0.0) x = bisect([&](double t) { return fn(t); }, xs[i - 1], xs[i]);
      return {Verdict::Fail, std::sqrt(x), name + " negative"};
    }
    if (v[i] <= tol && out.verdict == Verdict::Pass)
      out = {Verdict::NonStrict, std::sqrt(xs[i]), name + " vanishes"};
  }
  return out;
}

ConditionVerdict decreasing(const std::string& name, const std::vector<double>& r,
                            const std::vector<double>& g) {
  const double eps = 1e-9 * (1.0 + sup_abs(g));
  ConditionVerdict out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] > eps) return {Verdict::Fail, r[i], "d" + name + "/dr positive"};
    if (g[i] >= -eps && out.verdict == Verdict::Pass)
      out = {Verdict::NonStrict, r[i], "d" + name + "/dr vanishes"};
  }
  return out;
}

ConditionVerdict causal(const std::string& name, const std::vector<double>& r,
                        const std::vector<double>& dp, const std::vector<double>& drho) {
  const double eps = 1e-9 * (1.0 + sup_abs(drho));
  constexpr double band = 1e-9;
  ConditionVerdict out;
  for (std::size_t i = 0; i < dp.size(); ++i) {
    if (std::fabs(drho[i]) <= eps) {
      if (severity(out.verdict) < severity(Verdict::Indeterminate))
        out = {Verdict::Indeterminate, r[i], "drho/dr vanishes, d" + name + "/drho undefined"};
      continue;
    }
    const double s = dp[i] / drho[i];
    if (s < -band || s > 1.0 + band)
      return {Verdict::Fail, r[i], "d" + name + "/drho = " + fmt(s) + " outside [0,1]"};
    if ((std::fabs(s) <= band || std::fabs(s - 1.0) <= band) && out.verdict == Verdict::Pass)
      out = {Verdict::NonStrict, r[i], "d" + name + "/drho on the bound"};
  }
  return out;
}

}  // namespace

PhysicalityReport physicality_report(const StellarProfile& p) {
  PhysicalityReport rep;
  auto& c = rep.conditions;

  merge(c[0], positivity("rho", p.x, p.rho, p.rho_fn));
  merge(c[0], positivity("p_r", p.x, p.p_r, p.p_r_fn));
  merge(c[0], positivity("p_perp", p.x, p.p_perp, p.p_perp_fn));

  const auto drho = gradient(p.r, p.rho);
  const auto dpr = gradient(p.r, p.p_r);
  const auto dpt = gradient(p.r, p.p_perp);
  merge(c[1], decreasing("rho", p.r, drho));
  merge(c[1], decreasing("p_r", p.r, dpr));
  merge(c[1], decreasing("p_perp", p.r, dpt));

  merge(c[2], causal("p_r", p.r, dpr, drho));
  merge(c[2], causal("p_perp", p.r, dpt, drho));

  const double R = p.r.back();
  rep.boundary_mass = p.m.back();
  const double target = 1.0 - 2.0 * rep.boundary_mass / R;
  const double A_R = p.A.back();
  rep.required_A0 = target > 0.0 ? p.model.A0 * std::sqrt(target) / A_R : 0.0;
  constexpr double tol_match = 1e-6;
  const double a_gap = std::fabs(A_R * A_R - target);
  const double v_gap = std::fabs(p.V.back() - target);
  c[3].detail = "A^2(R)-(1-2m/R)=" + fmt(A_R * A_R - target) + " V(R)-(1-2m/R)=" +
                fmt(p.V.back() - target) + " required_A0=" + fmt(rep.required_A0) +
                " (Schwarzschild matching read as A^2=V=1-2m/R)";
  if (a_gap > tol_match || v_gap > tol_match) {
    c[3].verdict = Verdict::Fail;
    c[3].r = R;
  }

  const double boundary = 1e-6 * std::max(1.0, sup_abs(p.p_r));
  c[4].detail = "p_r(R)=" + fmt(p.p_r.back());
  if (std::fabs(p.p_r.back()) > boundary) {
    c[4].verdict = Verdict::Fail;
    c[4].r = R;
  }
  return rep;
}

std::string format_report(const PhysicalityReport& report) {
  static const char* names[5] = {"(i) positivity", "(ii) decreasing gradients",
                                 "(iii) causality", "(iv) exterior matching",
                                 "(v) boundary pressure"};
  std::ostringstream out;
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& c = report.conditions[i];
    out << names[i] << ": " << to_string(c.verdict);
    if (c.r) out << " at r=" << fmt(*c.r);
    if (!c.detail.empty()) out << " " << c.detail;
    out << "\n";
  }
  out << "m(R)=" << fmt(report.boundary_mass) << "\n";
  out << "required_A0=" << fmt(report.required_A0) << "\n";
  return out.str();
}

void write_profile_csv(std::ostream& out, const StellarProfile& p) {
  out << "r,x,V,A,u,rho,p_r,p_perp,m\n";
  for (std::size_t i = 0; i < p.x.size(); ++i) {
    out << fmt(p.r[i]) << ',' << fmt(p.x[i]) << ',' << fmt(p.V[i]) << ',' << fmt(p.A[i]) << ','
        << fmt(p.u[i]) << ',' << fmt(p.rho[i]) << ',' << fmt(p.p_r[i]) << ',' << fmt(p.p_perp[i])
        << ',' << fmt(p.m[i]) << '\n';
  }
}

}  // namespace riccati_lab
