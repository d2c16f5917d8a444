#include "riccati_lab/calculus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "riccati_lab/errors.hpp"

namespace riccati_lab {

// ---------------------------------------------------------------------------
// ScalarFunction

ScalarFunction::ScalarFunction()
    : ScalarFunction([](double) { return 0.0; }, [](double) { return 0.0; }, Interval::all(),
                     "0") {}

ScalarFunction::ScalarFunction(Fn f, Interval domain, std::string label)
    : f_(std::move(f)), domain_(domain), label_(std::move(label)) {}

ScalarFunction::ScalarFunction(Fn f, Fn df, Interval domain, std::string label)
    : f_(std::move(f)), df_(std::move(df)), domain_(domain), label_(std::move(label)) {}

ScalarFunction ScalarFunction::from_expr(const expr::Expr& e, Interval domain,
                                         std::string label) {
  const expr::Expr de = expr::derive(e);
  ScalarFunction out([e](double x) { return expr::eval(e, x); },
                     [de](double x) { return expr::eval(de, x); }, domain,
                     label.empty() ? expr::print(e) : std::move(label));
  out.expr_ = e;
  return out;
}

ScalarFunction ScalarFunction::constant(double value, Interval domain) {
  return from_expr(expr::Expr::number(value), domain);
}

void ScalarFunction::check(double x) const {
  // Slack absorbs round-off in callers that compute endpoints arithmetically.
  const double slack = domain_.bounded() ? 1e-12 * (1.0 + domain_.width()) : 0.0;
  if (!(x >= domain_.lo - slack && x <= domain_.hi + slack))
    throw OutOfDomain(x, domain_.lo, domain_.hi);
}

double ScalarFunction::operator()(double x) const {
  check(x);
  return f_(x);
}

double ScalarFunction::derivative(double x) const {
  check(x);
  return df_(x);
}

ScalarFunction ScalarFunction::with_domain(Interval domain) const {
  ScalarFunction out = *this;
  out.domain_ = domain;
  return out;
}

ScalarFunction ScalarFunction::without_derivative() const {
  ScalarFunction out = *this;
  out.df_ = nullptr;
  return out;
}

// ---------------------------------------------------------------------------
// differentiate

namespace {

// Neville tableau on step sizes shrinking by `con`; `power` is 2 for central
// differences (even error series) and 1 for one-sided ones.
template <class Difference>
double ridders(Difference&& diff, double h, int power) {
  constexpr int kTable = 10;
  constexpr double con = 1.4;
  constexpr double safe = 2.0;
  const double con_p = power == 2 ? con * con : con;
  std::array<std::array<double, kTable>, kTable> a{};
  a[0][0] = diff(h);
  double best = a[0][0];
  double err = std::numeric_limits<double>::max();
  for (int i = 1; i < kTable; ++i) {
    h /= con;
    a[0][i] = diff(h);
    double fac = con_p;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
      fac *= con_p;
      const double errt =
          std::max(std::fabs(a[j][i] - a[j - 1][i]), std::fabs(a[j][i] - a[j - 1][i - 1]));
      if (errt <= err) {
        err = errt;
        best = a[j][i];
      }
    }
    if (std::fabs(a[i][i] - a[i - 1][i - 1]) >= safe * err) break;
  }
  return best;
}

}  // namespace

double differentiate(const ScalarFunction& f, double x) {
  if (f.has_derivative()) return f.derivative(x);
  const Interval& dom = f.domain();
  if (!dom.contains(x)) throw OutOfDomain(x, dom.lo, dom.hi);
  const double h0 = std::pow(std::numeric_limits<double>::epsilon(), 0.2) * (1.0 + std::fabs(x));
  const double left = x - dom.lo;
  const double right = dom.hi - x;
  const double margin = std::min(left, right);
  if (margin >= 0.25 * h0) {
    const double h = std::min(h0, margin);
    return ridders([&](double s) { return (f(x + s) - f(x - s)) / (2.0 * s); }, h, 2);
  }
  // One-sided toward the wider side.
  const double dir = right >= left ? 1.0 : -1.0;
  const double room = std::max(left, right);
  const double h = std::min(h0, 0.5 * room);
  const double fx = f(x);
  return ridders([&](double s) { return (f(x + dir * s) - fx) / (dir * s); }, h, 1);
}

// ---------------------------------------------------------------------------
// Chebyshev machinery

namespace {

constexpr int N = CumulativeIntegral::kDegree;

struct ChebTables {
  std::array<double, N + 1> nodes{};                  // cos(j pi / N), j = 0..N
  std::array<std::array<double, N + 1>, N + 1> cosjk{};  // cos(j k pi / N)
  ChebTables() {
    for (int j = 0; j <= N; ++j) {
      nodes[j] = std::cos(j * std::numbers::pi / N);
      for (int k = 0; k <= N; ++k) cosjk[j][k] = std::cos(j * k * std::numbers::pi / N);
    }
    nodes[N / 2] = 0.0;
  }
};

const ChebTables& tables() {
  static const ChebTables t;
  return t;
}

template <std::size_t M>
double clenshaw(const std::array<double, M>& c, double t) {
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = M - 1; k >= 1; --k) {
    const double b0 = 2.0 * t * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + c[0];
}

}  // namespace

struct CumulativeIntegral::Impl {
  struct Panel {
    double lo, hi;
    double f_lo;                         // F at lo
    std::array<double, N + 1> interp;    // integrand interpolant coefficients
    std::array<double, N + 2> integral;  // Q(t), Q(-1) = 0, in units of half-width
    double error;
  };

  ScalarFunction g;
  double x0;
  Interval interval;
  std::vector<Panel> panels;  // sorted by lo, contiguous
  double achieved = 0.0;

  const Panel& locate(double x) const {
    auto it = std::upper_bound(panels.begin(), panels.end(), x,
                               [](double v, const Panel& p) { return v < p.lo; });
    if (it == panels.begin()) return panels.front();
    return *(it - 1);
  }

  void check(double x) const {
    const double slack = 1e-12 * (1.0 + interval.width());
    if (!(x >= interval.lo - slack && x <= interval.hi + slack))
      throw OutOfDomain(x, interval.lo, interval.hi);
  }

  double value(double x) const {
    check(x);
    if (x == x0) return 0.0;
    const Panel& p = locate(x);
    const double half = 0.5 * (p.hi - p.lo);
    const double t = std::clamp((x - p.lo) / half - 1.0, -1.0, 1.0);
    return p.f_lo + half * clenshaw(p.integral, t);
  }

  double slope(double x) const {
    check(x);
    const Panel& p = locate(x);
    const double half = 0.5 * (p.hi - p.lo);
    const double t = std::clamp((x - p.lo) / half - 1.0, -1.0, 1.0);
    return clenshaw(p.interp, t);
  }
};

namespace {

using Panel = CumulativeIntegral::Impl::Panel;

struct Builder {
  const ScalarFunction& g;
  double tol;
  double noise_floor;  // absolute error per unit length attributable to round-off
  double min_width;
  std::vector<Panel> out;

  double sample(double x) const {
    double v;
    try {
      v = g(x);
    } catch (const DomainError&) {
      throw NonFiniteIntegrand(x);
    }
    if (!std::isfinite(v)) throw NonFiniteIntegrand(x);
    return v;
  }

  Panel fit(double lo, double hi) const {
    const auto& tb = tables();
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    std::array<double, N + 1> f{};
    double fmax = 0.0;
    for (int j = 0; j <= N; ++j) {
      const double x = j == 0 ? hi : j == N ? lo : mid + half * tb.nodes[j];
      f[j] = sample(x);
      fmax = std::max(fmax, std::fabs(f[j]));
    }
    Panel p{};
    p.lo = lo;
    p.hi = hi;
    for (int k = 0; k <= N; ++k) {
      double s = 0.5 * (f[0] * tb.cosjk[0][k] + f[N] * tb.cosjk[N][k]);
      for (int j = 1; j < N; ++j) s += f[j] * tb.cosjk[j][k];
      p.interp[k] = 2.0 * s / N;
    }
    p.interp[0] *= 0.5;
    p.interp[N] *= 0.5;

    auto& b = p.integral;
    b.fill(0.0);
    b[1] += p.interp[0];
    b[2] += p.interp[1] / 4.0;
    for (int k = 2; k <= N; ++k) {
      b[k + 1] += p.interp[k] / (2.0 * (k + 1));
      b[k - 1] -= p.interp[k] / (2.0 * (k - 1));
    }
    double at_minus_one = 0.0;
    for (int k = 1; k <= N + 1; ++k) at_minus_one += (k % 2 ? -1.0 : 1.0) * b[k];
    b[0] = -at_minus_one;

    const double tail = std::max({std::fabs(p.interp[N - 2]), std::fabs(p.interp[N - 1]),
                                  std::fabs(p.interp[N])});
    p.error = tail * (hi - lo);
    p.f_lo = fmax;  // scratch: panel magnitude, replaced during chaining
    return p;
  }

  void refine(double lo, double hi) {
    Panel p = fit(lo, hi);
    const double width = hi - lo;
    const double allowed = std::max(tol * p.f_lo * width, noise_floor * width);
    if (p.error <= allowed) {
      out.push_back(p);
      return;
    }
    if (width < min_width) throw ToleranceNotMet(lo, hi, p.error);
    const double mid = 0.5 * (lo + hi);
    refine(lo, mid);
    refine(mid, hi);
  }
};

}  // namespace

CumulativeIntegral antiderivative(const ScalarFunction& g, double x0, Interval interval,
                                  double tol) {
  if (!(interval.bounded() && interval.hi > interval.lo))
    throw SpecError("antiderivative needs a bounded interval with lo < hi");
  if (!interval.contains(x0)) throw OutOfDomain(x0, interval.lo, interval.hi);
  if (!(tol > 0.0)) throw SpecError("antiderivative tolerance must be positive");

  double gmax = 0.0;
  for (double x : linspace(interval.lo, interval.hi, 65)) {
    double v;
    try {
      v = g(x);
    } catch (const DomainError&) {
      throw NonFiniteIntegrand(x);
    }
    if (!std::isfinite(v)) throw NonFiniteIntegrand(x);
    gmax = std::max(gmax, std::fabs(v));
  }
  Builder builder{g, tol, 256.0 * std::numeric_limits<double>::epsilon() * gmax,
                  1e-13 * interval.width(), {}};
  if (x0 > interval.lo) builder.refine(interval.lo, x0);
  const std::size_t left_count = builder.out.size();
  if (x0 < interval.hi) builder.refine(x0, interval.hi);

  auto impl = std::make_shared<CumulativeIntegral::Impl>();
  impl->g = g;
  impl->x0 = x0;
  impl->interval = interval;
  impl->panels = std::move(builder.out);
  auto& panels = impl->panels;

  auto panel_total = [](const Panel& p) {
    double s = 0.0;
    for (double c : p.integral) s += c;  // Q(1)
    return 0.5 * (p.hi - p.lo) * s;
  };
  // Chain F outward from x0 in both directions.
  double acc = 0.0;
  for (std::size_t i = left_count; i < panels.size(); ++i) {
    panels[i].f_lo = acc;
    acc += panel_total(panels[i]);
  }
  acc = 0.0;
  for (std::size_t i = left_count; i-- > 0;) {
    acc -= panel_total(panels[i]);
    panels[i].f_lo = acc;
  }
  for (const auto& p : panels) impl->achieved += p.error;
  return CumulativeIntegral(std::move(impl));
}

double CumulativeIntegral::operator()(double x) const { return impl_->value(x); }
double CumulativeIntegral::slope(double x) const { return impl_->slope(x); }
const ScalarFunction& CumulativeIntegral::integrand() const { return impl_->g; }
double CumulativeIntegral::base_point() const { return impl_->x0; }
const Interval& CumulativeIntegral::interval() const { return impl_->interval; }
double CumulativeIntegral::achieved_tolerance() const { return impl_->achieved; }
std::size_t CumulativeIntegral::panel_count() const { return impl_->panels.size(); }

std::vector<CumulativeIntegral::Node> CumulativeIntegral::nodes() const {
  std::vector<Node> out;
  out.reserve(impl_->panels.size() + 1);
  for (const auto& p : impl_->panels) out.push_back({p.lo, p.f_lo});
  const double hi = impl_->interval.hi;
  out.push_back({hi, impl_->value(hi)});
  return out;
}

ScalarFunction CumulativeIntegral::as_function(std::string label) const {
  auto impl = impl_;
  return ScalarFunction([impl](double x) { return impl->value(x); },
                        [impl](double x) { return impl->g(x); }, impl->interval,
                        label.empty() ? "integral of " + impl->g.label() : std::move(label));
}

double eval_integral(const CumulativeIntegral& F, double x) { return F(x); }

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  out.back() = hi;
  return out;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double xtol) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  double fhi = f(hi);
  if (fhi == 0.0) return hi;
  while (hi - lo > xtol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace riccati_lab
