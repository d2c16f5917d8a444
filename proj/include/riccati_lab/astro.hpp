#pragma once

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "riccati_lab/riccati.hpp"

namespace riccati_lab {

/// Static anisotropic sphere in the coordinate x = r^2, units 8 pi G = c = 1.
struct StellarModel {
  ScalarFunction eta;    // m(r) / r^3 as a function of x
  ScalarFunction delta;  // p_perp - p_r
  double A0 = 1.0;
  double R = 1.0;

  double x_eps() const { return 1e-6 * R * R; }
  /// [x_eps, R^2]; the centre itself is excluded.
  Interval domain() const { return {x_eps(), R * R}; }
};

/// Builds a model from expression strings.
StellarModel make_model(const std::string& eta, const std::string& delta, double A0 = 1.0,
                        double R = 1.0);

/// Throws SpecError for a bad radius, A0 or an anisotropy with Delta/x
/// unbounded at the centre; MetricSignatureViolation where 1 - 2 x eta <= 0.
void validate_model(const StellarModel& model);

/// u' = a + b u - u^2 with u = A'/A. Coefficients stay symbolic when eta and
/// Delta are expressions. Throws as validate_model.
RiccatiProblem riccati_from_physics(const StellarModel& model);

/// A(x) = A0 exp(int_{x0}^x u) on `interval`.
ScalarFunction metric_A(const ScalarFunction& u, double A0, double x0, Interval interval);

/// Turns any y' = a + b y + c y^2 with nonvanishing c into a stellar model
/// whose structure equation is solved by u = -c y. The model has V = 1 at
/// the lower end of the problem's interval and R^2 at its upper end.
struct MappedRiccati {
  StellarModel model;
  SolutionFamily u_family;  // -c times the given family
};
MappedRiccati model_from_riccati(const RiccatiProblem& p, const SolutionFamily& family,
                                 double A0 = 1.0, const Tolerances& tol = {});

struct StellarProfile {
  StellarModel model;
  std::vector<double> r, x, V, A, u, rho, p_r, p_perp, m;
  /// max |m/r^3 - eta| / (1 + |eta|) over the grid.
  double mass_eta_error = 0.0;
  /// Pointwise versions used to locate sign changes between grid points.
  ScalarFunction rho_fn, p_r_fn, p_perp_fn;
};

/// 513-point grid on [x_eps, R^2]. Throws NotASolution if u misses the
/// structure equation by more than tol.res, MetricSignatureViolation.
StellarProfile profile(const StellarModel& model, const ScalarFunction& u,
                       const Tolerances& tol = {}, std::size_t grid = 513);

enum class Verdict { Pass, NonStrict, Fail, Indeterminate };

std::string to_string(Verdict v);

struct ConditionVerdict {
  Verdict verdict = Verdict::Pass;
  std::optional<double> r;  // first violation, or first degenerate point
  std::string detail;
};

struct PhysicalityReport {
  /// (i) positivity, (ii) decreasing gradients, (iii) causality,
  /// (iv) exterior matching, (v) vanishing boundary pressure.
  std::array<ConditionVerdict, 5> conditions;
  double required_A0 = 0.0;
  double boundary_mass = 0.0;  // m(R)
};

PhysicalityReport physicality_report(const StellarProfile& p);

/// Text form of the report, one line per condition.
std::string format_report(const PhysicalityReport& report);

/// Columns r,x,V,A,u,rho,p_r,p_perp,m with a header row and 17 significant digits.
void write_profile_csv(std::ostream& out, const StellarProfile& p);

}  // namespace riccati_lab
