#include "riccati_lab/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>

#include "riccati_lab/errors.hpp"

namespace riccati_lab {

Tolerances Tolerances::from_environment() {
  Tolerances tol;
  if (const char* env = std::getenv("RICCATI_LAB_TOL_QUAD"); env && *env) {
    char* end = nullptr;
    const double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0) || !std::isfinite(v))
      throw SpecError(std::string("RICCATI_LAB_TOL_QUAD is not a positive number: ") + env);
    tol.quad = v;
  }
  return tol;
}

// ---------------------------------------------------------------------------
// RiccatiProblem

RiccatiProblem::RiccatiProblem(ScalarFunction a, ScalarFunction b, ScalarFunction c,
                               Interval interval)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), interval_(interval) {
  if (!(interval_.bounded() && interval_.hi > interval_.lo))
    throw SpecError("Riccati problem needs a bounded interval with lo < hi");
  for (double x : linspace(interval_.lo, interval_.hi, 129)) {
    for (const ScalarFunction* f : {&a_, &b_, &c_}) {
      double v;
      try {
        v = (*f)(x);
      } catch (const Error& err) {
        throw CoefficientEvaluationError(x, err.what());
      }
      if (!std::isfinite(v)) throw CoefficientEvaluationError(x, f->label() + " is not finite");
    }
  }
}

double RiccatiProblem::rhs(double x, double y) const {
  return a_(x) + (b_(x) + c_(x) * y) * y;
}

double residual(const RiccatiProblem& p, const ScalarFunction& y, double x) {
  if (!p.interval().contains(x)) throw OutOfDomain(x, p.interval().lo, p.interval().hi);
  return differentiate(y, x) - p.rhs(x, y(x));
}

ProbeResult probe_residual(const RiccatiProblem& p, const ScalarFunction& y, int probes) {
  const Interval& I = p.interval();
  ProbeResult out;
  for (int i = 0; i < probes; ++i) {
    const double x = I.lo + (i + 0.5) / probes * I.width();
    const double r = std::fabs(residual(p, y, x)) / (1.0 + std::fabs(y(x)));
    if (!(r <= out.worst)) {
      out.worst = r;
      out.x = x;
    }
  }
  return out;
}

std::string to_string(FamilyForm form) {
  switch (form) {
    case FamilyForm::GS: return "GS";
    case FamilyForm::GS1: return "GS1";
    case FamilyForm::GS2: return "GS2";
    case FamilyForm::Theorem: return "Theorem";
    case FamilyForm::Classical: return "Classical";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// SolutionFamily

SolutionFamily::SolutionFamily(FamilyForm form, ScalarFunction particular,
                               ScalarFunction numerator, ScalarFunction quadrature,
                               Interval interval, std::string constant_name)
    : form_(form),
      particular_(std::move(particular)),
      numerator_(std::move(numerator)),
      quadrature_(std::move(quadrature)),
      interval_(interval),
      constant_name_(std::move(constant_name)) {}

double SolutionFamily::denominator(double C, double x) const { return C - quadrature_(x); }

double SolutionFamily::operator()(double C, double x) const {
  if (std::isinf(C)) return particular_(x);
  return particular_(x) + numerator_(x) / denominator(C, x);
}

ScalarFunction SolutionFamily::member(double C) const {
  const SolutionFamily self = *this;
  return ScalarFunction([self, C](double x) { return self(C, x); }, interval_,
                        "member " + constant_name_ + "=" + std::to_string(C));
}

double SolutionFamily::constant_for(double x, double y) const {
  const double gap = y - particular_(x);
  if (gap == 0.0) return std::numeric_limits<double>::infinity();
  return quadrature_(x) + numerator_(x) / gap;
}

std::vector<double> SolutionFamily::poles(double C, std::size_t scan, double xtol) const {
  std::vector<double> out;
  if (std::isinf(C)) return out;
  const auto xs = linspace(interval_.lo, interval_.hi, scan);
  auto D = [&](double x) { return denominator(C, x); };
  double prev = D(xs[0]);
  if (prev == 0.0) out.push_back(xs[0]);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double cur = D(xs[i]);
    if (cur == 0.0) {
      out.push_back(xs[i]);
    } else if (prev != 0.0 && (cur < 0.0) != (prev < 0.0)) {
      out.push_back(bisect(D, xs[i - 1], xs[i], xtol));
    }
    prev = cur;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Families from a particular solution

namespace {

double base_point(const RiccatiProblem& p, const FamilyOptions& opts) {
  const double x0 = std::isnan(opts.x0) ? p.interval().lo : opts.x0;
  if (!p.interval().contains(x0)) throw OutOfDomain(x0, p.interval().lo, p.interval().hi);
  return x0;
}

void require_particular(const RiccatiProblem& p, const ScalarFunction& y_p,
                        const Tolerances& tol) {
  const ProbeResult r = probe_residual(p, y_p);
  if (!(r.worst <= tol.res)) throw ParticularNotASolution(r.worst, r.x);
}

void require_nonvanishing(const ScalarFunction& y_p, const Interval& I, const Tolerances& tol) {
  const auto xs = linspace(I.lo, I.hi, 1025);
  double prev = y_p(xs[0]);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double v = y_p(xs[i]);
    if (std::fabs(v) < tol.div) throw ParticularVanishes(xs[i]);
    if (i > 0 && (v < 0.0) != (prev < 0.0))
      throw ParticularVanishes(bisect([&](double x) { return y_p(x); }, xs[i - 1], xs[i]));
    prev = v;
  }
}

ScalarFunction exp_of(const CumulativeIntegral& F) {
  return ScalarFunction([F](double x) { return std::exp(F(x)); }, F.interval());
}

}  // namespace

SolutionFamily family_from_bc(const RiccatiProblem& p, const ScalarFunction& y_p,
                              const FamilyOptions& opts) {
  const double x0 = base_point(p, opts);
  require_particular(p, y_p, opts.tol);
  const Interval I = p.interval();
  const auto b = p.b();
  const auto c = p.c();
  const ScalarFunction exponent([b, c, y_p](double x) { return b(x) + 2.0 * c(x) * y_p(x); }, I);
  const ScalarFunction E = exp_of(antiderivative(exponent, x0, I, opts.tol.quad));
  const ScalarFunction cE([c, E](double x) { return c(x) * E(x); }, I);
  const auto Q = antiderivative(cE, x0, I, opts.tol.quad).as_function();
  return SolutionFamily(FamilyForm::GS, y_p, E, Q, I);
}

SolutionFamily family_from_ac(const RiccatiProblem& p, const ScalarFunction& y_p,
                              const FamilyOptions& opts) {
  const double x0 = base_point(p, opts);
  const Interval I = p.interval();
  require_nonvanishing(y_p, I, opts.tol);
  require_particular(p, y_p, opts.tol);
  const auto a = p.a();
  const auto c = p.c();
  const ScalarFunction exponent(
      [a, c, y_p](double x) {
        const double y = y_p(x);
        return c(x) * y - a(x) / y;
      },
      I);
  const ScalarFunction E1 = exp_of(antiderivative(exponent, x0, I, opts.tol.quad));
  const ScalarFunction N([y_p, E1](double x) { return y_p(x) * E1(x); }, I);
  const ScalarFunction integrand([c, N](double x) { return c(x) * N(x); }, I);
  const auto Q = antiderivative(integrand, x0, I, opts.tol.quad).as_function();
  return SolutionFamily(FamilyForm::GS1, y_p, N, Q, I);
}

SolutionFamily family_from_ab(const RiccatiProblem& p, const ScalarFunction& y_p,
                              const FamilyOptions& opts) {
  const double x0 = base_point(p, opts);
  const Interval I = p.interval();
  require_nonvanishing(y_p, I, opts.tol);
  require_particular(p, y_p, opts.tol);
  const auto a = p.a();
  const auto b = p.b();
  const ScalarFunction exponent([a, b, y_p](double x) { return -(b(x) + 2.0 * a(x) / y_p(x)); },
                                I);
  const ScalarFunction E2 = exp_of(antiderivative(exponent, x0, I, opts.tol.quad));
  const ScalarFunction N(
      [y_p, E2](double x) {
        const double y = y_p(x);
        return y * y * E2(x);
      },
      I);
  const ScalarFunction integrand(
      [a, b, y_p, E2](double x) {
        return (differentiate(y_p, x) - a(x) - b(x) * y_p(x)) * E2(x);
      },
      I);
  const auto Q = antiderivative(integrand, x0, I, opts.tol.quad).as_function();
  return SolutionFamily(FamilyForm::GS2, y_p, N, Q, I);
}

FamilyResidual family_residual(const RiccatiProblem& p, const SolutionFamily& family, double C,
                               const Tolerances& tol, std::size_t grid) {
  FamilyResidual out;
  out.poles = family.poles(C);
  // Differentiate the smooth pieces rather than the quotient, whose slope
  // blows up near poles on or just beyond the interval.
  const SolutionFamily fam = family;
  const ScalarFunction y(
      [fam, C](double x) { return fam(C, x); },
      [fam, C](double x) {
        const double dyp = differentiate(fam.particular(), x);
        if (std::isinf(C)) return dyp;
        const double D = fam.denominator(C, x);
        return dyp + differentiate(fam.numerator(), x) / D +
               fam.numerator()(x) * differentiate(fam.quadrature(), x) / (D * D);
      },
      family.interval());
  auto guarded = [&](double x) {
    return std::any_of(out.poles.begin(), out.poles.end(),
                       [&](double xp) { return std::fabs(x - xp) <= tol.pole_guard; });
  };
  double sup_y = 0.0;
  double sup_r = 0.0;
  for (double x : linspace(p.interval().lo, p.interval().hi, grid)) {
    if (guarded(x)) continue;
    const double r = std::fabs(residual(p, y, x));
    sup_y = std::max(sup_y, std::fabs(y(x)));
    if (!(r <= sup_r)) {
      sup_r = r;
      out.x = x;
    }
    ++out.checked;
  }
  out.value = sup_r / (1.0 + sup_y);
  return out;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

std::string to_string(Termination t) {
  switch (t) {
    case Termination::ReachedEnd: return "reached-end";
    case Termination::PoleDetected: return "pole-detected";
    case Termination::StepFailure: return "step-failure";
  }
  return "?";
}

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

}  // namespace

double Trajectory::at(double x) const {
  if (!(x >= lo() && x <= hi())) throw OutOfDomain(x, lo(), hi());
  if (segments_.empty()) return samples_.front().y;
  auto lower = [](const Segment& s) { return std::min(s.x0, s.x0 + s.h); };
  auto it = std::upper_bound(segments_.begin(), segments_.end(), x,
                             [&](double v, const Segment& s) { return v < lower(s); });
  const Segment& s = it == segments_.begin() ? segments_.front() : *(it - 1);
  const double t = std::clamp((x - s.x0) / s.h, 0.0, 1.0);
  const double u = 1.0 - t;
  return s.r[0] + t * (s.r[1] + u * (s.r[2] + t * (s.r[3] + u * s.r[4])));
}

Trajectory integrate_numeric(const RiccatiProblem& p, double x0, double y0, int direction,
                             double x_end, const IntegratorSettings& settings) {
  const Interval& I = p.interval();
  if (!I.contains(x0)) throw OutOfDomain(x0, I.lo, I.hi);
  if (!I.contains(x_end)) throw OutOfDomain(x_end, I.lo, I.hi);
  if (direction != 1 && direction != -1) throw SpecError("direction must be +1 or -1");
  if (x_end != x0 && (x_end - x0) * direction < 0.0)
    throw SpecError("direction disagrees with x_end");
  if (!std::isfinite(y0)) throw SpecError("initial value must be finite");

  auto f = [&](double x, double y) {
    double v;
    try {
      v = p.rhs(x, y);
    } catch (const Error& err) {
      throw CoefficientEvaluationError(x, err.what());
    }
    return v;
  };

  Trajectory tr;
  tr.settings_ = settings;
  tr.samples_.push_back({x0, y0});
  const double span = std::fabs(x_end - x0);
  const double h_min = settings.h_min_rel * I.width();
  double x = x0, y = y0;
  double h = direction * std::max(1e-3 * span, h_min);
  double k1 = f(x, y);
  if (!std::isfinite(k1)) throw CoefficientEvaluationError(x, "right-hand side not finite");

  std::size_t steps = 0;
  tr.termination_ = Termination::ReachedEnd;
  while ((x_end - x) * direction > 0.0) {
    if (++steps > settings.max_steps) {
      tr.termination_ = Termination::StepFailure;
      break;
    }
    if (std::fabs(h) < h_min) {
      tr.termination_ = Termination::PoleDetected;
      break;
    }
    bool last = false;
    if ((x + h - x_end) * direction >= 0.0) {
      h = x_end - x;
      last = true;
    }
    const double k2 = f(x + c2 * h, y + h * a21 * k1);
    const double k3 = f(x + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const double k4 = f(x + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = f(x + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 =
        f(x + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const double y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const double x_new = last ? x_end : x + h;
    const double k7 = f(x_new, y_new);
    const double err_abs =
        std::fabs(h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));
    const double scale = settings.atol + settings.rtol * std::max(std::fabs(y), std::fabs(y_new));
    double err = err_abs / scale;
    if (!std::isfinite(err) || !std::isfinite(y_new)) err = std::numeric_limits<double>::infinity();

    if (err > 1.0) {
      const double factor = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
      h *= factor;
      continue;
    }
    if (std::fabs(y_new) > settings.y_blowup) {
      tr.termination_ = Termination::PoleDetected;
      break;
    }
    Trajectory::Segment seg{x, x_new - x, {}};
    seg.r[0] = y;
    seg.r[1] = y_new - y;
    seg.r[2] = seg.h * k1 - seg.r[1];
    seg.r[3] = seg.r[1] - seg.h * k7 - seg.r[2];
    seg.r[4] = seg.h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    tr.segments_.push_back(seg);
    x = x_new;
    y = y_new;
    k1 = k7;
    tr.samples_.push_back({x, y});
    const double factor = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
    h *= factor;
  }
  tr.stop_x_ = x;
  if (direction < 0) {
    std::reverse(tr.samples_.begin(), tr.samples_.end());
    std::reverse(tr.segments_.begin(), tr.segments_.end());
  }
  return tr;
}

OracleComparison compare_with_oracle(const RiccatiProblem& p, const SolutionFamily& family,
                                     double x0, double y0, const Tolerances& tol,
                                     const IntegratorSettings& settings) {
  const Interval& I = p.interval();
  OracleComparison out;
  out.C = family.constant_for(x0, y0);
  out.closed_form_poles = family.poles(out.C);

  std::vector<Trajectory> legs;
  if (x0 < I.hi) legs.push_back(integrate_numeric(p, x0, y0, 1, I.hi, settings));
  if (x0 > I.lo) legs.push_back(integrate_numeric(p, x0, y0, -1, I.lo, settings));

  std::vector<double> oracle_poles;
  for (const auto& leg : legs)
    if (leg.termination() == Termination::PoleDetected) oracle_poles.push_back(leg.stop_x());
  for (double xp : oracle_poles) {
    if (!out.oracle_pole || std::fabs(xp - x0) < std::fabs(*out.oracle_pole - x0))
      out.oracle_pole = xp;
    double nearest = std::numeric_limits<double>::infinity();
    for (double cp : out.closed_form_poles) nearest = std::min(nearest, std::fabs(cp - xp));
    out.pole_mismatch = std::max(out.pole_mismatch, nearest);
  }

  auto excluded = [&](double x) {
    for (double xp : out.closed_form_poles)
      if (std::fabs(x - xp) <= tol.pole_guard) return true;
    for (double xp : oracle_poles)
      if (std::fabs(x - xp) <= tol.pole_guard) return true;
    return false;
  };
  for (double x : linspace(I.lo, I.hi, 257)) {
    const Trajectory* leg = nullptr;
    for (const auto& l : legs)
      if (x >= l.lo() && x <= l.hi()) leg = &l;
    if (!leg || excluded(x)) continue;
    const double rk = leg->at(x);
    const double cf = family(out.C, x);
    out.rows.push_back({x, cf, rk});
    const double rel = std::fabs(cf - rk) / (1.0 + std::fabs(rk));
    if (!(rel <= out.sup_rel_err)) {
      out.sup_rel_err = rel;
      out.worst_x = x;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Diagnostics

double cross_ratio(const ScalarFunction& y1, const ScalarFunction& y2, const ScalarFunction& y3,
                   const ScalarFunction& y4, double x, double eps_div) {
  const double v1 = y1(x), v2 = y2(x), v3 = y3(x), v4 = y4(x);
  const double scale =
      1.0 + std::max({std::fabs(v1), std::fabs(v2), std::fabs(v3), std::fabs(v4)});
  if (std::fabs(v1 - v4) < eps_div * scale || std::fabs(v2 - v3) < eps_div * scale)
    throw DegenerateQuadruple(x);
  return ((v1 - v3) * (v2 - v4)) / ((v1 - v4) * (v2 - v3));
}

namespace {

struct Sampled {
  std::vector<double> x, a, b, c;
  double scale = 1.0;  // 1 + sup(|a| + |b| + |c|)
};

// Sup of |lambda^2 c + lambda mu b + mu^2 a| over the grid, theta parameterizing (lambda, mu).
struct LambdaMu {
  const Sampled& s;

  double sum_sq(double th) const {
    const double l = std::cos(th), m = std::sin(th);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double v = l * l * s.c[i] + l * m * s.b[i] + m * m * s.a[i];
      acc += v * v;
    }
    return acc;
  }

  // Gauss-Newton on the stacked residual vector.
  double refine(double th) const {
    for (int it = 0; it < 50; ++it) {
      const double l = std::cos(th), m = std::sin(th);
      double rr = 0.0, jj = 0.0;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double r = l * l * s.c[i] + l * m * s.b[i] + m * m * s.a[i];
        const double dr = -2.0 * l * m * s.c[i] + (l * l - m * m) * s.b[i] + 2.0 * l * m * s.a[i];
        rr += r * dr;
        jj += dr * dr;
      }
      if (jj == 0.0) break;
      const double step = rr / jj;
      th -= step;
      if (std::fabs(step) < 1e-16) break;
    }
    return th;
  }
};

}  // namespace

ClassicalReport detect_classical(const RiccatiProblem& p, const Tolerances& tol,
                                 std::size_t grid) {
  const Interval& I = p.interval();
  ClassicalReport rep;
  rep.grid = grid;

  Sampled s;
  s.x = linspace(I.lo, I.hi, grid);
  double sup_abc = 0.0;
  for (double x : s.x) {
    s.a.push_back(p.a()(x));
    s.b.push_back(p.b()(x));
    s.c.push_back(p.c()(x));
    sup_abc = std::max(sup_abc, std::fabs(s.a.back()) + std::fabs(s.b.back()) +
                                    std::fabs(s.c.back()));
  }
  s.scale = 1.0 + sup_abc;

  // a + b + c = 0
  for (std::size_t i = 0; i < grid; ++i)
    rep.sum_residual = std::max(rep.sum_residual, std::fabs(s.a[i] + s.b[i] + s.c[i]));
  rep.sum_residual /= s.scale;
  rep.sum_zero = rep.sum_residual <= tol.cond;
  if (rep.sum_zero) {
    const auto a = p.a();
    const auto c = p.c();
    const double x0 = I.lo;
    const auto expo = antiderivative(
        ScalarFunction([a, c](double x) { return c(x) - a(x); }, I), x0, I, tol.quad);
    const ScalarFunction E([expo](double x) { return std::exp(expo(x)); }, I);
    const auto inner = antiderivative(
        ScalarFunction([a, c, E](double x) { return (c(x) + a(x)) * E(x); }, I), x0, I,
        tol.quad);
    // (K + S - E)/(K + S + E) = 1 + 2E/(C - (S + E)) with C = -K.
    const ScalarFunction Q([inner, E](double x) { return inner(x) + E(x); }, I);
    const ScalarFunction N([E](double x) { return 2.0 * E(x); }, I);
    const ScalarFunction one([](double) { return 1.0; }, [](double) { return 0.0; }, I, "1");
    rep.sum_family.emplace(FamilyForm::Classical, one, N, Q, I, "-K");
  }

  // lambda^2 c + lambda mu b + mu^2 a = 0
  {
    LambdaMu lm{s};
    constexpr int kScan = 720;
    double best_th = 0.0, best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kScan; ++k) {
      const double th = std::numbers::pi * k / kScan;
      const double v = lm.sum_sq(th);
      if (v < best) {
        best = v;
        best_th = th;
      }
    }
    const double th = lm.refine(best_th);
    double l = std::cos(th), m = std::sin(th);
    const double norm = std::fabs(l) + std::fabs(m);
    l /= norm;
    m /= norm;
    if (l < 0.0 || (l == 0.0 && m < 0.0)) {
      l = -l;
      m = -m;
    }
    double sup = 0.0;
    for (std::size_t i = 0; i < grid; ++i)
      sup = std::max(sup, std::fabs(l * l * s.c[i] + l * m * s.b[i] + m * m * s.a[i]));
    rep.lambda = l;
    rep.mu = m;
    rep.lambda_mu_residual = sup / s.scale;
    rep.lambda_mu = rep.lambda_mu_residual <= tol.cond;
  }

  // c = 1 and constant b^2 - 2b' - 4a
  double sup_c = 0.0;
  for (double v : s.c) sup_c = std::max(sup_c, std::fabs(v - 1.0));
  rep.unit_c = sup_c <= tol.cond;
  const auto& ea = p.a().expression();
  const auto& eb = p.b().expression();
  rep.polynomial_coefficients = ea && eb && expr::is_polynomial(*ea) && expr::is_polynomial(*eb);
  if (rep.unit_c) {
    const ScalarFunction b = p.b().with_domain(I);
    std::vector<double> disc(grid);
    double sup_terms = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < grid; ++i) {
      const double db = differentiate(b, s.x[i]);
      disc[i] = s.b[i] * s.b[i] - 2.0 * db - 4.0 * s.a[i];
      sup_terms = std::max(sup_terms, s.b[i] * s.b[i] + 2.0 * std::fabs(db) + 4.0 * std::fabs(s.a[i]));
      mean += disc[i];
    }
    mean /= static_cast<double>(grid);
    double spread = 0.0;
    for (double d : disc) spread = std::max(spread, std::fabs(d - mean));
    rep.discriminant = mean;
    rep.discriminant_spread = spread / (1.0 + sup_terms);
    rep.constant_discriminant = rep.discriminant_spread <= tol.cond;
    if (rep.constant_discriminant) {
      if (mean < -tol.cond * (1.0 + sup_terms)) {
        rep.complex_branch = true;
      } else {
        const double root = std::sqrt(std::max(mean, 0.0));
        auto make = [&](double sign, const char* label) {
          return ScalarFunction([b, root, sign](double x) { return -(b(x) + sign * root) / 2.0; },
                                [b](double x) { return -differentiate(b, x) / 2.0; }, I, label);
        };
        rep.y_plus = make(1.0, "y+");
        rep.y_minus = make(-1.0, "y-");
      }
    }
  }
  return rep;
}

}  // namespace riccati_lab
