#include "riccati_lab/cases.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "riccati_lab/errors.hpp"

namespace riccati_lab {

char to_char(Coefficient k) {
  switch (k) {
    case Coefficient::A: return 'a';
    case Coefficient::B: return 'b';
    case Coefficient::C: return 'c';
  }
  return '?';
}

const std::vector<CaseInfo>& case_table() {
  using K = Coefficient;
  static const std::vector<CaseInfo> table = {
      {1, K::A, {K::B, K::C}, "f1", {"C1"}, false, false, "C0"},
      {2, K::A, {K::B, K::C}, "f2", {}, true, true, "C2"},
      {3, K::B, {K::A, K::C}, "f2", {"C3"}, true, false, "C4"},
      {4, K::C, {K::A, K::B}, "f2", {"C5"}, true, false, "C6"},
      {5, K::A, {K::B, K::C}, "f3", {"C7"}, false, false, "C8"},
      {6, K::B, {K::A, K::C}, "f3", {"C7"}, false, false, "C9"},
      {7, K::A, {K::B, K::C}, "f4", {}, false, true, "C10"},
      {8, K::B, {K::A, K::C}, "f4", {}, false, true, "C11"},
      {9, K::C, {K::A, K::B}, "f4", {"C12"}, false, false, "C13"},
      {10, K::A, {K::B, K::C}, "f5", {}, true, true, "C14"},
  };
  return table;
}

const CaseInfo& case_info(int id) {
  if (id < 1 || id > 10) throw SpecError("case id must be in 1..10, got " + std::to_string(id));
  return case_table()[id - 1];
}

double CaseSpec::constant(const std::string& name) const {
  auto it = constants.find(name);
  return it == constants.end() ? 0.0 : it->second;
}

CaseSpec make_spec(int id, const std::map<std::string, std::string>& functions,
                   const std::map<std::string, double>& constants, std::optional<int> branch,
                   Interval interval, double x0) {
  case_info(id);
  CaseSpec s;
  s.id = id;
  for (const auto& [key, text] : functions) {
    ScalarFunction f = ScalarFunction::from_expr(expr::parse(text));
    if (key == "a") s.a = f;
    else if (key == "b") s.b = f;
    else if (key == "c") s.c = f;
    else if (key == "f") s.f = f;
    else throw SpecError("unknown input function '" + key + "'");
  }
  s.constants = constants;
  s.branch = branch;
  s.interval = interval;
  s.x0 = x0;
  return s;
}

void validate_schema(const CaseSpec& s) {
  const CaseInfo& info = case_info(s.id);
  const std::string tag = "case " + std::to_string(s.id) + ": ";
  if (!(s.interval.bounded() && s.interval.hi > s.interval.lo))
    throw SpecError(tag + "interval must be bounded with lo < hi");
  if (!s.interval.contains(s.base_point())) throw SpecError(tag + "base point outside interval");
  const std::optional<ScalarFunction>* slots[] = {&s.a, &s.b, &s.c};
  for (Coefficient k : {Coefficient::A, Coefficient::B, Coefficient::C}) {
    const bool wanted = std::find(info.free.begin(), info.free.end(), k) != info.free.end();
    const bool present = slots[static_cast<int>(k)]->has_value();
    if (wanted && !present) throw SpecError(tag + "missing coefficient " + to_char(k));
    if (!wanted && present)
      throw SpecError(tag + "coefficient " + to_char(k) + " is determined by the condition");
  }
  if (!s.f) throw SpecError(tag + "missing generating function " + info.generating);
  for (const auto& [name, value] : s.constants) {
    if (std::find(info.constants.begin(), info.constants.end(), name) == info.constants.end())
      throw SpecError(tag + "unexpected constant " + name);
    if (!std::isfinite(value)) throw SpecError(tag + "constant " + name + " is not finite");
  }
  if (info.branch && !s.branch) throw SpecError(tag + "branch sign required");
  if (!info.branch && s.branch) throw SpecError(tag + "takes no branch sign");
  if (s.branch && *s.branch != 1 && *s.branch != -1)
    throw SpecError(tag + "branch sign must be +1 or -1");
}

std::string describe(const CaseSpec& s) {
  auto text = [](const ScalarFunction& f) {
    return f.expression() ? expr::print(*f.expression()) : f.label();
  };
  char buf[128];
  std::string out = "case=" + std::to_string(s.id);
  if (s.a) out += " a=" + text(*s.a);
  if (s.b) out += " b=" + text(*s.b);
  if (s.c) out += " c=" + text(*s.c);
  if (s.f) out += " f=" + text(*s.f);
  for (const auto& [name, value] : s.constants) {
    std::snprintf(buf, sizeof buf, " %s=%.17g", name.c_str(), value);
    out += buf;
  }
  if (s.branch) out += std::string(" branch=") + (*s.branch > 0 ? "+1" : "-1");
  std::snprintf(buf, sizeof buf, " I=[%.17g,%.17g] x0=%.17g", s.interval.lo, s.interval.hi,
                s.base_point());
  return out + buf;
}

// ---------------------------------------------------------------------------
// Building blocks

namespace {

using Fn = std::function<double(double)>;

Fn slope_of(const ScalarFunction& f) {
  if (f.has_derivative()) return [f](double x) { return f.derivative(x); };
  return [f](double x) { return differentiate(f, x); };
}

CumulativeIntegral integral(Fn g, double x0, Interval I, double tol) {
  return antiderivative(ScalarFunction(std::move(g), I), x0, I, tol);
}

enum class Need { NonZero, Positive, Negative };

void guard(const std::string& name, const Fn& q, Need need, const Interval& I,
           const ConstructOptions& o) {
  const auto xs = linspace(I.lo, I.hi, o.guard_grid);
  std::vector<double> v(xs.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    v[i] = q(xs[i]);
    if (!std::isfinite(v[i])) throw GuardViolation(name, xs[i]);
    sup = std::max(sup, std::fabs(v[i]));
  }
  const double thr = o.guard_margin * (1.0 + sup);
  auto ok = [&](double t) {
    switch (need) {
      case Need::NonZero: return std::fabs(t) > thr;
      case Need::Positive: return t > thr;
      case Need::Negative: return t < -thr;
    }
    return false;
  };
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const bool crossed = i > 0 && (v[i] < 0.0) != (v[i - 1] < 0.0);
    if (ok(v[i]) && !crossed) continue;
    if (i > 0 && ok(v[i - 1]) && (crossed || v[i] == 0.0))
      throw GuardViolation(name, bisect(q, xs[i - 1], xs[i]));
    throw GuardViolation(name, xs[i]);
  }
}

void radicand_guard(const std::string& name, const Fn& rad, const Interval& I,
                    const ConstructOptions& o) {
  const auto xs = linspace(I.lo, I.hi, o.guard_grid);
  double prev = rad(xs[0]);
  if (prev < 0.0) throw RadicandNegative(xs[0]);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double v = rad(xs[i]);
    if (v < 0.0) throw RadicandNegative(bisect(rad, xs[i - 1], xs[i]));
    prev = v;
  }
  guard(name, rad, Need::Positive, I, o);
}

struct Inputs {
  Fn a, b, c, f;      // values; the solved-for slot is empty
  Fn da, db, dc, df;  // slopes, exact when the input is an expression
  std::optional<expr::Expr> ea, eb, ec, ef;
};

Inputs inputs_of(const CaseSpec& s) {
  Inputs in;
  auto load = [](const std::optional<ScalarFunction>& src, Fn& v, Fn& d,
                 std::optional<expr::Expr>& e) {
    if (!src) return;
    const ScalarFunction f = *src;
    v = [f](double x) { return f(x); };
    d = slope_of(f);
    e = f.expression();
  };
  load(s.a, in.a, in.da, in.ea);
  load(s.b, in.b, in.db, in.eb);
  load(s.c, in.c, in.dc, in.ec);
  load(s.f, in.f, in.df, in.ef);
  return in;
}

double sigma_of(const CaseSpec& s) { return s.branch ? static_cast<double>(*s.branch) : 1.0; }

struct Completed {
  ScalarFunction a, b, c, y_p;
};

ScalarFunction fn(Fn f, Interval I, std::string label = {}) {
  return ScalarFunction(std::move(f), I, std::move(label));
}

ScalarFunction fn(Fn f, Fn df, Interval I, std::string label = {}) {
  return ScalarFunction(std::move(f), std::move(df), I, std::move(label));
}

// Quotient-rule derivative of f/c from the input slopes.
Fn ratio_slope(const Inputs& in) {
  return [in](double x) {
    const double c = in.c(x);
    return (in.df(x) * c - in.f(x) * in.dc(x)) / (c * c);
  };
}

// (-b + sigma sqrt(f + b^2)) / (2c) and its derivative from the input slopes.
std::pair<Fn, Fn> quadratic_root(const Inputs& in, double sigma) {
  Fn value = [in, sigma](double x) {
    const double b = in.b(x);
    return (-b + sigma * std::sqrt(in.f(x) + b * b)) / (2.0 * in.c(x));
  };
  Fn slope = [in, sigma](double x) {
    const double b = in.b(x), c = in.c(x);
    const double R = std::sqrt(in.f(x) + b * b);
    const double dR = (in.df(x) + 2.0 * b * in.db(x)) / (2.0 * R);
    return ((-in.db(x) + sigma * dR) * c - (-b + sigma * R) * in.dc(x)) / (2.0 * c * c);
  };
  return {value, slope};
}

Completed complete(const CaseSpec& s, const ConstructOptions& o) {
  const Interval I = s.interval;
  const double x0 = s.base_point();
  const double tq = o.tol.quad;
  const Inputs in = inputs_of(s);
  const double sigma = sigma_of(s);
  using expr::Expr;
  using expr::derive;
  const bool symbolic = (!s.a || in.ea) && (!s.b || in.eb) && (!s.c || in.ec) && in.ef;
  auto nonzero_c = [&] { guard("c nonvanishing", in.c, Need::NonZero, I, o); };

  switch (s.id) {
    case 1: {
      nonzero_c();
      const double C1 = s.constant("C1");
      Fn g = [in](double x) {
        const double b = in.b(x);
        return (in.f(x) - b * b) / (2.0 * in.c(x));
      };
      const auto I1 = integral(g, x0, I, tq);
      Fn a = [in, I1, C1](double x) {
        const double t = in.b(x) + in.c(x) * (I1(x) - C1);
        return (in.f(x) - t * t) / (4.0 * in.c(x));
      };
      return {fn(a, I, "a"), *s.b, *s.c,
              fn([I1, C1](double x) { return 0.5 * (I1(x) - C1); },
                 [g](double x) { return 0.5 * g(x); }, I, "y_p")};
    }
    case 2: {
      nonzero_c();
      radicand_guard("radicand f2+b^2 nonvanishing",
                     [in](double x) { return in.f(x) + in.b(x) * in.b(x); }, I, o);
      if (symbolic) {
        const Expr b = *in.eb, c = *in.ec, f = *in.ef;
        const Expr yp = (-b + Expr::number(sigma) * expr::apply(expr::Fn::Sqrt, f + b * b)) /
                        (Expr::number(2) * c);
        const Expr a = derive(yp) - f / (Expr::number(4) * c);
        return {ScalarFunction::from_expr(a, Interval::all(), "a"), *s.b, *s.c,
                ScalarFunction::from_expr(yp, I, "y_p")};
      }
      const auto [yp, dyp] = quadratic_root(in, sigma);
      Fn a = [in, dyp](double x) { return dyp(x) - in.f(x) / (4.0 * in.c(x)); };
      return {fn(a, I, "a"), *s.b, *s.c, fn(yp, dyp, I, "y_p")};
    }
    case 3: {
      nonzero_c();
      const double C3 = s.constant("C3");
      Fn h = [in](double x) { return in.a(x) + in.f(x) / (4.0 * in.c(x)); };
      const auto Jint = integral(h, x0, I, tq);
      Fn J = [Jint, C3](double x) { return Jint(x) - C3; };
      guard("bracket int[a+f2/(4c)]-C3 nonvanishing", J, Need::NonZero, I, o);
      Fn b = [in, J](double x) {
        const double c = in.c(x), j = J(x);
        return (in.f(x) - 4.0 * c * c * j * j) / (4.0 * c * j);
      };
      guard("printed branch 2cJ+b<0", [in, J, b](double x) { return 2.0 * in.c(x) * J(x) + b(x); },
            Need::Negative, I, o);
      return {*s.a, fn(b, I, "b"), *s.c, fn(J, h, I, "y_p")};
    }
    case 4: {
      radicand_guard("radicand f2+b^2 nonvanishing",
                     [in](double x) { return in.f(x) + in.b(x) * in.b(x); }, I, o);
      Fn sfun = [in, sigma](double x) {
        const double b = in.b(x);
        return -b + sigma * std::sqrt(in.f(x) + b * b);
      };
      guard("-b+sigma*sqrt(f2+b^2) nonvanishing", sfun, Need::NonZero, I, o);
      const auto K = integral([in, sfun](double x) { return in.f(x) / sfun(x); }, x0, I, tq);
      const double C5 = s.constant("C5");
      const auto Mint =
          integral([in, K](double x) { return in.a(x) * std::exp(-0.5 * K(x)); }, x0, I, tq);
      Fn M = [Mint, C5](double x) { return C5 + Mint(x); };
      guard("C5+int[a exp(-K/2)] nonvanishing", M, Need::NonZero, I, o);
      Fn c = [sfun, K, M](double x) { return sfun(x) * std::exp(-0.5 * K(x)) / (2.0 * M(x)); };
      Fn yp = [M, K](double x) { return M(x) * std::exp(0.5 * K(x)); };
      Fn dyp = [in, yp, sfun](double x) { return in.a(x) + yp(x) * in.f(x) / (2.0 * sfun(x)); };
      return {*s.a, *s.b, fn(c, I, "c"), fn(yp, dyp, I, "y_p")};
    }
    case 5:
    case 6: {
      nonzero_c();
      const double C7 = s.constant("C7");
      const auto Lint = integral([in](double x) { return in.f(x) / (2.0 * in.c(x)); }, x0, I, tq);
      Fn L = [Lint, C7](double x) { return Lint(x) - C7; };
      Fn yp = [L](double x) { return 0.5 * L(x); };
      Fn dyp = [in](double x) { return in.f(x) / (4.0 * in.c(x)); };
      if (s.id == 5) {
        Fn a = [in, L](double x) {
          const double c = in.c(x), l = L(x);
          return 0.25 * (in.f(x) / c - 2.0 * in.b(x) * l - c * l * l);
        };
        guard("printed branch b+cL>0", [in, L](double x) { return in.b(x) + in.c(x) * L(x); },
              Need::Positive, I, o);
        return {fn(a, I, "a"), *s.b, *s.c, fn(yp, dyp, I, "y_p")};
      }
      guard("bracket int[f3/(2c)]-C7 nonvanishing", L, Need::NonZero, I, o);
      Fn b = [in, L](double x) {
        const double a = in.a(x), c = in.c(x), l = L(x);
        return (in.f(x) - 4.0 * a * c - c * c * l * l) / (2.0 * c * l);
      };
      guard("printed branch b+cL<0", [in, L, b](double x) { return b(x) + in.c(x) * L(x); },
            Need::Negative, I, o);
      return {*s.a, fn(b, I, "b"), *s.c, fn(yp, dyp, I, "y_p")};
    }
    case 7:
    case 8: {
      nonzero_c();
      if (s.id == 8) guard("f4 nonvanishing", in.f, Need::NonZero, I, o);
      if (symbolic) {
        const Expr c = *in.ec, f = *in.ef;
        const Expr two = Expr::number(2);
        const Expr yp = f / (two * c);
        const Expr dq = derive(f / c);
        if (s.id == 7) {
          const Expr b = *in.eb;
          const Expr a = (two * c * dq - f * f - two * b * f) / (Expr::number(4) * c);
          return {ScalarFunction::from_expr(a, Interval::all(), "a"), *s.b, *s.c,
                  ScalarFunction::from_expr(yp, I, "y_p")};
        }
        const Expr a = *in.ea;
        const Expr b = (c * dq - f * f / two - two * a * c) / f;
        return {*s.a, ScalarFunction::from_expr(b, Interval::all(), "b"), *s.c,
                ScalarFunction::from_expr(yp, I, "y_p")};
      }
      const Fn dq = ratio_slope(in);
      Fn yp = [in](double x) { return in.f(x) / (2.0 * in.c(x)); };
      Fn dyp = [dq](double x) { return 0.5 * dq(x); };
      if (s.id == 7) {
        Fn a = [in, dq](double x) {
          const double c = in.c(x), f = in.f(x);
          return (2.0 * c * dq(x) - f * f - 2.0 * in.b(x) * f) / (4.0 * c);
        };
        return {fn(a, I, "a"), *s.b, *s.c, fn(yp, dyp, I, "y_p")};
      }
      Fn b = [in, dq](double x) {
        const double c = in.c(x), f = in.f(x);
        return (c * dq(x) - 0.5 * f * f - 2.0 * in.a(x) * c) / f;
      };
      return {*s.a, fn(b, I, "b"), *s.c, fn(yp, dyp, I, "y_p")};
    }
    case 9: {
      const double C12 = s.constant("C12");
      const auto P = integral([in](double x) { return 0.5 * in.f(x) + in.b(x); }, x0, I, tq);
      const auto Nint =
          integral([in, P](double x) { return in.a(x) * std::exp(-P(x)); }, x0, I, tq);
      Fn N = [Nint, C12](double x) { return C12 + 2.0 * Nint(x); };
      guard("C12+2int[a exp(-P)] nonvanishing", N, Need::NonZero, I, o);
      Fn c = [in, P, N](double x) { return in.f(x) * std::exp(-P(x)) / N(x); };
      Fn yp = [P, N](double x) { return 0.5 * N(x) * std::exp(P(x)); };
      Fn dyp = [in, yp](double x) { return in.a(x) + yp(x) * (0.5 * in.f(x) + in.b(x)); };
      return {*s.a, *s.b, fn(c, I, "c"), fn(yp, dyp, I, "y_p")};
    }
    case 10: {
      nonzero_c();
      if (symbolic) {
        const Expr b = *in.eb, c = *in.ec, f = *in.ef;
        const Expr two = Expr::number(2);
        const Expr yp = -b / (two * c) + Expr::number(sigma) * f;
        const Expr a =
            (b * b - Expr::number(4) * c * c * f * f) / (Expr::number(4) * c) + derive(yp);
        return {ScalarFunction::from_expr(a, Interval::all(), "a"), *s.b, *s.c,
                ScalarFunction::from_expr(yp, I, "y_p")};
      }
      Fn yp = [in, sigma](double x) { return -in.b(x) / (2.0 * in.c(x)) + sigma * in.f(x); };
      Fn dyp = [in, sigma](double x) {
        const double c = in.c(x);
        return -(in.db(x) * c - in.b(x) * in.dc(x)) / (2.0 * c * c) + sigma * in.df(x);
      };
      Fn a = [in, dyp](double x) {
        const double b = in.b(x), c = in.c(x), f = in.f(x);
        return (b * b - 4.0 * c * c * f * f) / (4.0 * c) + dyp(x);
      };
      return {fn(a, I, "a"), *s.b, *s.c, fn(yp, dyp, I, "y_p")};
    }
  }
  throw SpecError("unreachable case id");
}

// ---------------------------------------------------------------------------
// Printed theorem families, each rebuilt from its own integrals.

SolutionFamily printed(const std::string& name, Fn exponent, Fn c, Fn additive, double x0,
                       Interval I, double tol) {
  const auto X = integral(std::move(exponent), x0, I, tol);
  Fn E = [X](double x) { return std::exp(X(x)); };
  const auto Q = integral([c, E](double x) { return c(x) * E(x); }, x0, I, tol);
  return SolutionFamily(FamilyForm::Theorem, fn(std::move(additive), I, "additive"), fn(E, I, "N"),
                        Q.as_function("Q"), I, name);
}

SolutionFamily theorem_family(const CaseSpec& s, const RiccatiProblem& p, double tol) {
  const Interval I = s.interval;
  const double x0 = s.base_point();
  const Inputs in = inputs_of(s);
  const double sigma = sigma_of(s);
  const std::string name = case_info(s.id).theorem_constant;
  const ScalarFunction pa = p.a(), pb = p.b(), pc = p.c();
  Fn a = [pa](double x) { return pa(x); };
  Fn b = [pb](double x) { return pb(x); };
  Fn c = [pc](double x) { return pc(x); };

  switch (s.id) {
    case 1: {
      const double C1 = s.constant("C1");
      const auto I1 = integral(
          [in](double x) {
            const double bb = in.b(x);
            return (in.f(x) - bb * bb) / (2.0 * in.c(x));
          },
          x0, I, tol);
      return printed(
          name, [in, I1, C1](double x) { return in.b(x) + in.c(x) * (I1(x) - C1); }, c,
          [I1, C1](double x) { return 0.5 * (I1(x) - C1); }, x0, I, tol);
    }
    case 2: {
      return printed(
          name,
          [in, sigma](double x) {
            const double bb = in.b(x);
            return sigma * std::sqrt(in.f(x) + bb * bb);
          },
          c, quadratic_root(in, sigma).first, x0, I, tol);
    }
    case 3: {
      auto root = [in, b](double x) {
        const double bb = b(x);
        return std::sqrt(in.f(x) + bb * bb);
      };
      return printed(
          name, [root](double x) { return -root(x); }, c,
          [in, b, root](double x) { return -(root(x) + b(x)) / (2.0 * in.c(x)); }, x0, I, tol);
    }
    case 4: {
      Fn sfun = [in, sigma](double x) {
        const double bb = in.b(x);
        return -bb + sigma * std::sqrt(in.f(x) + bb * bb);
      };
      const auto K = integral([in, sfun](double x) { return in.f(x) / sfun(x); }, x0, I, tol);
      const double C5 = s.constant("C5");
      const auto Mint =
          integral([in, K](double x) { return in.a(x) * std::exp(-0.5 * K(x)); }, x0, I, tol);
      Fn M = [Mint, C5](double x) { return C5 + Mint(x); };
      Fn cp = [sfun, K, M](double x) { return sfun(x) * std::exp(-0.5 * K(x)) / (2.0 * M(x)); };
      return printed(
          name,
          [in, sigma](double x) {
            const double bb = in.b(x);
            return sigma * std::sqrt(in.f(x) + bb * bb);
          },
          cp, [M, K](double x) { return M(x) * std::exp(0.5 * K(x)); }, x0, I, tol);
    }
    case 5: {
      const double C7 = s.constant("C7");
      const auto Lint = integral([in](double x) { return in.f(x) / (2.0 * in.c(x)); }, x0, I, tol);
      auto root = [in, Lint, C7](double x) {
        const double bb = in.b(x), cc = in.c(x), l = Lint(x) - C7;
        return std::sqrt(std::max(0.0, bb * bb + cc * l * (2.0 * bb + cc * l)));
      };
      return printed(
          name, root, c, [in, root](double x) { return (-in.b(x) + root(x)) / (2.0 * in.c(x)); },
          x0, I, tol);
    }
    case 6: {
      const double C7 = s.constant("C7");
      const auto Lint = integral([in](double x) { return in.f(x) / (2.0 * in.c(x)); }, x0, I, tol);
      // The printed b, rebuilt from a, c, f3 and the fresh bracket.
      Fn bp = [in, Lint, C7](double x) {
        const double aa = in.a(x), cc = in.c(x), l = Lint(x) - C7;
        return (in.f(x) - 4.0 * aa * cc - cc * cc * l * l) / (2.0 * cc * l);
      };
      auto root = [in, bp](double x) {
        const double bb = bp(x);
        return std::sqrt(std::max(0.0, bb * bb - 4.0 * in.a(x) * in.c(x) + in.f(x)));
      };
      return printed(
          name, [root](double x) { return -root(x); }, c,
          [in, Lint, C7, root](double x) {
            const double aa = in.a(x), cc = in.c(x), l = Lint(x) - C7;
            return (-root(x) + (4.0 * aa * cc - in.f(x) + cc * cc * l * l) / (2.0 * cc * l)) /
                   (2.0 * cc);
          },
          x0, I, tol);
    }
    case 7:
      return printed(
          name, [in](double x) { return in.b(x) + in.f(x); }, c,
          [in](double x) { return in.f(x) / (2.0 * in.c(x)); }, x0, I, tol);
    case 8: {
      const Fn dq = ratio_slope(in);
      return printed(
          name,
          [in, dq](double x) {
            const double cc = in.c(x), f = in.f(x);
            return (cc * dq(x) - 0.5 * f * f - 2.0 * in.a(x) * cc) / f + f;
          },
          c, [in](double x) { return in.f(x) / (2.0 * in.c(x)); }, x0, I, tol);
    }
    case 9: {
      const double C12 = s.constant("C12");
      const auto P = integral([in](double x) { return 0.5 * in.f(x) + in.b(x); }, x0, I, tol);
      const auto Nint =
          integral([in, P](double x) { return in.a(x) * std::exp(-P(x)); }, x0, I, tol);
      Fn N = [Nint, C12](double x) { return C12 + 2.0 * Nint(x); };
      Fn cp = [in, P, N](double x) { return in.f(x) * std::exp(-P(x)) / N(x); };
      return printed(
          name, [in](double x) { return in.f(x) + in.b(x); }, cp,
          [P, N](double x) { return 0.5 * N(x) * std::exp(P(x)); }, x0, I, tol);
    }
    case 10:
      return printed(
          name, [in, sigma](double x) { return 2.0 * sigma * in.c(x) * in.f(x); }, c,
          [in, sigma](double x) { return -in.b(x) / (2.0 * in.c(x)) + sigma * in.f(x); }, x0, I,
          tol);
  }
  throw SpecError("unreachable case id");
}

}  // namespace

double particular_residual(const RiccatiProblem& p, const ScalarFunction& y_p, std::size_t grid) {
  double worst = 0.0;
  for (double x : linspace(p.interval().lo, p.interval().hi, grid))
    worst = std::max(worst, std::fabs(residual(p, y_p, x)) / (1.0 + std::fabs(y_p(x))));
  return worst;
}

ConstructedCase construct(const CaseSpec& spec, const ConstructOptions& opts) {
  validate_schema(spec);
  const Completed k = complete(spec, opts);
  const Interval I = spec.interval;
  RiccatiProblem problem(k.a, k.b, k.c, I);
  const ScalarFunction y_p = k.y_p.with_domain(I);
  SolutionFamily general =
      family_from_bc(problem, y_p, FamilyOptions{spec.base_point(), opts.tol});
  SolutionFamily theorem = theorem_family(spec, problem, opts.tol.quad);
  ConstructedCase cc{spec, problem, y_p, general, theorem, 0.0, 0.0};
  cc.condition_residual = validate_condition(cc);
  if (!(cc.condition_residual <= opts.tol.cond))
    throw ConditionResidualTooLarge(cc.condition_residual, opts.tol.cond);
  cc.particular_residual = particular_residual(problem, y_p);
  return cc;
}

// ---------------------------------------------------------------------------
// Validation

ConditionSides condition_sides(const ConstructedCase& cc, std::size_t grid, double tol_quad) {
  const CaseSpec& s = cc.spec;
  const Interval I = s.interval;
  const double x0 = s.base_point();
  const double sigma = sigma_of(s);
  // Free coefficients from the spec, the solved one from the problem.
  Inputs in = inputs_of(s);
  const ScalarFunction pa = cc.problem.a(), pb = cc.problem.b(), pc = cc.problem.c();
  ScalarFunction lhs;
  Fn rhs;
  switch (case_info(s.id).solves_for) {
    case Coefficient::A: lhs = pa; break;
    case Coefficient::B: lhs = pb; break;
    case Coefficient::C: lhs = pc; break;
  }

  switch (s.id) {
    case 1: {
      const double C1 = s.constant("C1");
      const auto I1 = integral(
          [in](double x) {
            const double b = in.b(x);
            return (in.f(x) - b * b) / (2.0 * in.c(x));
          },
          x0, I, tol_quad);
      rhs = [in, I1, C1](double x) {
        const double t = in.b(x) + in.c(x) * (I1(x) - C1);
        return (in.f(x) - t * t) / (4.0 * in.c(x));
      };
      break;
    }
    case 2: {
      const Fn dyp = quadratic_root(in, sigma).second;
      rhs = [in, dyp](double x) { return dyp(x) - in.f(x) / (4.0 * in.c(x)); };
      break;
    }
    case 3: {
      const double C3 = s.constant("C3");
      const auto Jint =
          integral([in](double x) { return in.a(x) + in.f(x) / (4.0 * in.c(x)); }, x0, I, tol_quad);
      rhs = [in, Jint, C3](double x) {
        const double c = in.c(x), j = Jint(x) - C3;
        return (in.f(x) - 4.0 * c * c * j * j) / (4.0 * c * j);
      };
      break;
    }
    case 4: {
      Fn sfun = [in, sigma](double x) {
        const double b = in.b(x);
        return -b + sigma * std::sqrt(in.f(x) + b * b);
      };
      const auto K = integral([in, sfun](double x) { return in.f(x) / sfun(x); }, x0, I, tol_quad);
      const double C5 = s.constant("C5");
      const auto Mint =
          integral([in, K](double x) { return in.a(x) * std::exp(-0.5 * K(x)); }, x0, I, tol_quad);
      rhs = [sfun, K, Mint, C5](double x) {
        return sfun(x) * std::exp(-0.5 * K(x)) / (2.0 * (C5 + Mint(x)));
      };
      break;
    }
    case 5:
    case 6: {
      const double C7 = s.constant("C7");
      const auto Lint =
          integral([in](double x) { return in.f(x) / (2.0 * in.c(x)); }, x0, I, tol_quad);
      if (s.id == 5) {
        rhs = [in, Lint, C7](double x) {
          const double c = in.c(x), l = Lint(x) - C7;
          return 0.25 * (in.f(x) / c - 2.0 * in.b(x) * l - c * l * l);
        };
      } else {
        rhs = [in, Lint, C7](double x) {
          const double a = in.a(x), c = in.c(x), l = Lint(x) - C7;
          return (in.f(x) - 4.0 * a * c - c * c * l * l) / (2.0 * c * l);
        };
      }
      break;
    }
    case 7: {
      const Fn dq = ratio_slope(in);
      rhs = [in, dq](double x) {
        const double c = in.c(x), f = in.f(x);
        return (2.0 * c * dq(x) - f * f - 2.0 * in.b(x) * f) / (4.0 * c);
      };
      break;
    }
    case 8: {
      const Fn dq = ratio_slope(in);
      rhs = [in, dq](double x) {
        const double c = in.c(x), f = in.f(x);
        return (c * dq(x) - 0.5 * f * f - 2.0 * in.a(x) * c) / f;
      };
      break;
    }
    case 9: {
      const double C12 = s.constant("C12");
      const auto P = integral([in](double x) { return 0.5 * in.f(x) + in.b(x); }, x0, I, tol_quad);
      const auto Nint =
          integral([in, P](double x) { return in.a(x) * std::exp(-P(x)); }, x0, I, tol_quad);
      rhs = [in, P, Nint, C12](double x) {
        return in.f(x) * std::exp(-P(x)) / (C12 + 2.0 * Nint(x));
      };
      break;
    }
    case 10: {
      rhs = [in, sigma](double x) {
        const double b = in.b(x), c = in.c(x), f = in.f(x);
        const double dyp = -(in.db(x) * c - b * in.dc(x)) / (2.0 * c * c) + sigma * in.df(x);
        return (b * b - 4.0 * c * c * f * f) / (4.0 * c) + dyp;
      };
      break;
    }
  }

  ConditionSides out;
  out.x = linspace(I.lo, I.hi, grid);
  for (double x : out.x) {
    out.lhs.push_back(lhs(x));
    out.rhs.push_back(rhs(x));
  }
  return out;
}

double validate_condition(const ConstructedCase& cc) {
  const ConditionSides sides = condition_sides(cc);
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < sides.x.size(); ++i) {
    diff = std::max(diff, std::fabs(sides.lhs[i] - sides.rhs[i]));
    scale = std::max(scale, std::fabs(sides.lhs[i]));
  }
  return diff / (1.0 + scale);
}

double seed_relation_check(const ConstructedCase& cc, std::size_t grid) {
  const CaseSpec& s = cc.spec;
  const auto& p = cc.problem;
  const double sigma = sigma_of(s);
  double worst = 0.0, sup_q = 0.0;
  for (double x : linspace(s.interval.lo, s.interval.hi, grid)) {
    const double a = p.a()(x), b = p.b()(x), c = p.c()(x);
    const double y = cc.y_p(x), dy = differentiate(cc.y_p, x);
    const double q = 2.0 * c * y + b;
    double rad = b * b - 4.0 * a * c + 4.0 * c * dy;
    const double scale = b * b + 4.0 * std::fabs(a * c) + 4.0 * std::fabs(c * dy);
    if (rad < 0.0) {
      if (rad < -1e-9 * (1.0 + scale)) throw RadicandNegative(x);
      rad = 0.0;
    }
    double root_sign;
    switch (s.id) {
      case 2:
      case 3:
      case 4: root_sign = sigma; break;
      case 5: root_sign = 1.0; break;
      case 6: root_sign = -1.0; break;
      case 10: root_sign = sigma * c * s.f.value()(x) >= 0.0 ? 1.0 : -1.0; break;
      default: root_sign = q >= 0.0 ? 1.0 : -1.0; break;
    }
    worst = std::max(worst, std::fabs(q - root_sign * std::sqrt(rad)));
    sup_q = std::max(sup_q, std::fabs(q));
  }
  return worst / (1.0 + sup_q);
}

double family_agreement(const SolutionFamily& reference, const SolutionFamily& other, double C,
                        const Tolerances& tol, std::size_t grid) {
  const Interval I = reference.interval();
  const double xm = I.lo;
  const double Cp = other.constant_for(xm, reference(C, xm));
  std::vector<double> poles = reference.poles(C);
  const auto more = other.poles(Cp);
  poles.insert(poles.end(), more.begin(), more.end());
  double worst = 0.0;
  for (double x : linspace(I.lo, I.hi, grid)) {
    if (std::any_of(poles.begin(), poles.end(),
                    [&](double xp) { return std::fabs(x - xp) <= tol.pole_guard; }))
      continue;
    const double r = reference(C, x);
    const double d = std::fabs(other(Cp, x) - r) / (1.0 + std::fabs(r));
    if (!(d <= worst)) worst = d;
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Random specs

double FuzzRng::uniform(double lo, double hi) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

int FuzzRng::pick(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }

namespace {

std::string decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string signed_term(double v, const std::string& tail) {
  return (v < 0.0 ? " - " : " + ") + decimal(std::fabs(v)) + tail;
}

}  // namespace

std::string random_function(FuzzRng& rng) {
  const int degree = rng.pick(4);
  std::string out = decimal(rng.uniform(-1.0, 1.0));
  for (int k = 1; k <= degree; ++k)
    out += signed_term(rng.uniform(-1.0, 1.0), k == 1 ? "*x" : "*x^" + std::to_string(k));
  if (rng.pick(2) == 1) {
    const double amp = rng.uniform(-0.5, 0.5);
    const double freq = rng.uniform(0.5, 3.0);
    const double phase = rng.uniform(0.0, 3.0);
    const char* trig = rng.pick(2) == 0 ? "sin" : "cos";
    out += signed_term(amp, std::string("*") + trig + "(" + decimal(freq) + "*x + " +
                                decimal(phase) + ")");
  }
  return out;
}

FuzzCase fuzz_case(int id, FuzzRng& rng, const FuzzOptions& opts, const Tolerances& tol) {
  const CaseInfo& info = case_info(id);
  const ConstructOptions copts{tol, opts.guard_margin, 257};
  for (int attempt = 1; attempt <= opts.max_attempts; ++attempt) {
    std::map<std::string, std::string> fns;
    for (Coefficient k : info.free) fns[std::string(1, to_char(k))] = random_function(rng);
    fns["f"] = random_function(rng);
    std::map<std::string, double> constants;
    for (const auto& name : info.constants)
      constants[name] = std::round(rng.uniform(-2.0, 2.0) * 1000.0) / 1000.0;
    std::optional<int> branch;
    if (info.branch) branch = id == 3 ? -1 : (rng.pick(2) == 0 ? 1 : -1);
    const CaseSpec spec = make_spec(id, fns, constants, branch, opts.interval);

    std::optional<ConstructedCase> cc;
    try {
      cc = construct(spec, copts);
    } catch (const GuardViolation&) {
      continue;
    } catch (const RadicandNegative&) {
      continue;
    } catch (const DomainError&) {
      continue;
    } catch (const NonFiniteIntegrand&) {
      continue;
    } catch (const CoefficientEvaluationError&) {
      continue;
    }
    // Conditioning: reject triples far outside the unit scale of the inputs.
    bool tame = true;
    for (double x : linspace(opts.interval.lo, opts.interval.hi, 129)) {
      const auto& p = cc->problem;
      if (std::fabs(p.a()(x)) > opts.max_coefficient || std::fabs(p.b()(x)) > opts.max_coefficient ||
          std::fabs(p.c()(x)) > opts.max_coefficient) {
        tame = false;
        break;
      }
    }
    if (!tame) continue;

    FuzzCase out{spec, *cc, {}, attempt};
    while (static_cast<int>(out.Cs.size()) < opts.constants_per_spec) {
      const double C = std::round(rng.uniform(-3.0, 3.0) * 1000.0) / 1000.0;
      if (std::fabs(C) >= 0.25) out.Cs.push_back(C);
    }
    return out;
  }
  throw SpecError("case " + std::to_string(id) + ": no admissible spec in " +
                  std::to_string(opts.max_attempts) + " attempts");
}

bool CaseMetrics::passes(const Tolerances& tol) const {
  return condition <= tol.cond && particular <= tol.res && family <= tol.res &&
         oracle <= tol.res && pole_mismatch <= 1e-3 && theorem_vs_gs <= 1e-8;
}

CaseMetrics evaluate_case(const ConstructedCase& cc, const std::vector<double>& Cs,
                          const Tolerances& tol) {
  CaseMetrics m;
  m.condition = cc.condition_residual;
  m.particular = cc.particular_residual;
  try {
    m.seed = seed_relation_check(cc);
  } catch (const RadicandNegative&) {
    m.seed = std::numeric_limits<double>::infinity();
  }
  const double x0 = cc.spec.interval.lo;
  for (double C : Cs) {
    const auto fr = family_residual(cc.problem, cc.general, C, tol);
    m.family = std::max(m.family, fr.value);
    m.poles += fr.poles.size();
    const auto cmp = compare_with_oracle(cc.problem, cc.general, x0, cc.general(C, x0), tol);
    m.oracle = std::max(m.oracle, cmp.sup_rel_err);
    m.pole_mismatch = std::max(m.pole_mismatch, cmp.pole_mismatch);
    m.theorem_vs_gs = std::max(m.theorem_vs_gs, family_agreement(cc.general, cc.theorem, C, tol));
  }
  return m;
}

}  // namespace riccati_lab
