#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "riccati_lab/calculus.hpp"

namespace riccati_lab {

struct Tolerances {
  double quad = kDefaultQuadratureTolerance;
  double res = 1e-6;         // relative to 1 + |y|
  double cond = 1e-9;        // condition identities
  double pole_guard = 1e-2;  // exclusion radius around poles
  double div = 1e-10;        // smallest admissible |denominator|

  /// Defaults, with `quad` taken from RICCATI_LAB_TOL_QUAD when set.
  static Tolerances from_environment();
};

/// y' = a(x) + b(x) y + c(x) y^2 on a bounded interval.
class RiccatiProblem {
 public:
  /// Throws CoefficientEvaluationError if a coefficient fails on a 129-point scan.
  RiccatiProblem(ScalarFunction a, ScalarFunction b, ScalarFunction c, Interval interval);

  const ScalarFunction& a() const { return a_; }
  const ScalarFunction& b() const { return b_; }
  const ScalarFunction& c() const { return c_; }
  const Interval& interval() const { return interval_; }

  double rhs(double x, double y) const;

 private:
  ScalarFunction a_, b_, c_;
  Interval interval_;
};

/// y'(x) - (a + b y + c y^2) at x, using y's exact derivative when present.
double residual(const RiccatiProblem& p, const ScalarFunction& y, double x);

/// Largest |residual|/(1+|y|) at 16 interior probe points, with its abscissa.
struct ProbeResult {
  double worst = 0.0;
  double x = 0.0;
};
ProbeResult probe_residual(const RiccatiProblem& p, const ScalarFunction& y, int probes = 16);

enum class FamilyForm { GS, GS1, GS2, Theorem, Classical };

std::string to_string(FamilyForm form);

/// y(x; C) = y_p(x) + N(x) / (C - Q(x)).
///
/// Every closed form handled here has this shape; the forms differ in how N
/// and Q are assembled. C = +inf gives the particular solution itself.
class SolutionFamily {
 public:
  SolutionFamily(FamilyForm form, ScalarFunction particular, ScalarFunction numerator,
                 ScalarFunction quadrature, Interval interval, std::string constant_name = "C");

  double operator()(double C, double x) const;
  double denominator(double C, double x) const;

  /// Family member as a function; it carries no exact derivative.
  ScalarFunction member(double C) const;
  /// The C whose member passes through (x, y); +inf when y = y_p(x).
  double constant_for(double x, double y) const;
  /// Sign changes of C - Q on a uniform scan, bisected to `xtol`.
  std::vector<double> poles(double C, std::size_t scan = 1025, double xtol = 1e-10) const;

  FamilyForm form() const { return form_; }
  const ScalarFunction& particular() const { return particular_; }
  const ScalarFunction& numerator() const { return numerator_; }
  const ScalarFunction& quadrature() const { return quadrature_; }
  const Interval& interval() const { return interval_; }
  const std::string& constant_name() const { return constant_name_; }

 private:
  FamilyForm form_;
  ScalarFunction particular_, numerator_, quadrature_;
  Interval interval_;
  std::string constant_name_;
};

struct FamilyOptions {
  /// Base point of every indefinite integral; NaN selects the left end.
  double x0 = std::numeric_limits<double>::quiet_NaN();
  Tolerances tol{};
};

/// y_p + E / (C - int c E),  E = exp int (b + 2 c y_p).
SolutionFamily family_from_bc(const RiccatiProblem& p, const ScalarFunction& y_p,
                              const FamilyOptions& opts = {});
/// y_p + y_p E1 / (C - int c y_p E1),  E1 = exp int (c y_p - a / y_p).
SolutionFamily family_from_ac(const RiccatiProblem& p, const ScalarFunction& y_p,
                              const FamilyOptions& opts = {});
/// y_p + y_p^2 E2 / (C - int (y_p' - a - b y_p) E2),  E2 = exp(-int (b + 2 a / y_p)).
SolutionFamily family_from_ab(const RiccatiProblem& p, const ScalarFunction& y_p,
                              const FamilyOptions& opts = {});

/// Sup of |residual| / (1 + sup|y|) over a uniform grid, skipping points
/// within tol.pole_guard of a pole of the member.
struct FamilyResidual {
  double value = 0.0;
  double x = 0.0;
  std::size_t checked = 0;
  std::vector<double> poles;
};
FamilyResidual family_residual(const RiccatiProblem& p, const SolutionFamily& family, double C,
                               const Tolerances& tol = {}, std::size_t grid = 257);

// ---------------------------------------------------------------------------
// Numerical oracle

struct IntegratorSettings {
  double rtol = 1e-9;
  double atol = 1e-12;
  double y_blowup = 1e8;
  double h_min_rel = 1e-13;  // relative to |I|
  std::size_t max_steps = 1000000;
};

enum class Termination { ReachedEnd, PoleDetected, StepFailure };

std::string to_string(Termination t);

class Trajectory {
 public:
  struct Sample {
    double x;
    double y;
  };

  /// Ascending in x regardless of integration direction.
  const std::vector<Sample>& samples() const { return samples_; }
  Termination termination() const { return termination_; }
  /// Last good abscissa before a detected pole or failure.
  double stop_x() const { return stop_x_; }
  const IntegratorSettings& settings() const { return settings_; }

  double lo() const { return samples_.front().x; }
  double hi() const { return samples_.back().x; }
  /// Dense output of the Runge-Kutta pair; throws OutOfDomain outside [lo, hi].
  double at(double x) const;

 private:
  friend Trajectory integrate_numeric(const RiccatiProblem&, double, double, int, double,
                                      const IntegratorSettings&);
  struct Segment {
    double x0, h;
    double r[5];
  };
  std::vector<Sample> samples_;
  std::vector<Segment> segments_;  // ascending
  Termination termination_ = Termination::ReachedEnd;
  double stop_x_ = 0.0;
  IntegratorSettings settings_;
};

/// Dormand-Prince 5(4) from (x0, y0) toward x_end; `direction` must agree with
/// the sign of x_end - x0. Throws CoefficientEvaluationError.
Trajectory integrate_numeric(const RiccatiProblem& p, double x0, double y0, int direction,
                             double x_end, const IntegratorSettings& settings = {});

/// Closed form versus the oracle from a matched initial value.
struct OracleComparison {
  struct Row {
    double x, closed_form, oracle;
  };
  double C = 0.0;
  double sup_rel_err = 0.0;  // |closed - oracle| / (1 + |oracle|)
  double worst_x = 0.0;
  std::vector<Row> rows;
  std::vector<double> closed_form_poles;
  std::optional<double> oracle_pole;  // first blow-up on either side of x0
  double pole_mismatch = 0.0;         // distance from oracle_pole to nearest closed-form pole
};
OracleComparison compare_with_oracle(const RiccatiProblem& p, const SolutionFamily& family,
                                     double x0, double y0, const Tolerances& tol = {},
                                     const IntegratorSettings& settings = {});

// ---------------------------------------------------------------------------
// Diagnostics

/// ((y1-y3)(y2-y4)) / ((y1-y4)(y2-y3)); throws DegenerateQuadruple when
/// |y1-y4| or |y2-y3| falls below eps_div (1 + max|y_i|).
double cross_ratio(const ScalarFunction& y1, const ScalarFunction& y2, const ScalarFunction& y3,
                   const ScalarFunction& y4, double x, double eps_div = 1e-12);

struct ClassicalReport {
  std::size_t grid = 0;

  bool sum_zero = false;  // a + b + c = 0
  double sum_residual = 0.0;
  /// (K + int (c+a) E - E) / (K + int (c+a) E + E), stored with C = -K.
  std::optional<SolutionFamily> sum_family;

  bool lambda_mu = false;  // lambda^2 c + lambda mu b + mu^2 a = 0
  double lambda = 0.0, mu = 0.0;  // |lambda| + |mu| = 1
  double lambda_mu_residual = 0.0;

  bool unit_c = false;  // c = 1
  bool constant_discriminant = false;
  double discriminant = 0.0;  // b^2 - 2 b' - 4 a
  double discriminant_spread = 0.0;
  bool complex_branch = false;
  bool polynomial_coefficients = false;  // informational
  std::optional<ScalarFunction> y_plus, y_minus;  // -(b +- sqrt(disc)) / 2
};

ClassicalReport detect_classical(const RiccatiProblem& p, const Tolerances& tol = {},
                                 std::size_t grid = 129);

}  // namespace riccati_lab
