#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "riccati_lab/riccati.hpp"

namespace riccati_lab {

enum class Coefficient { A, B, C };

char to_char(Coefficient k);

/// One row of the case table: which inputs a case consumes and which
/// coefficient its condition determines.
struct CaseInfo {
  int id;
  Coefficient solves_for;
  std::vector<Coefficient> free;
  std::string generating;              // "f1" .. "f5"
  std::vector<std::string> constants;  // user constants, default 0
  bool branch;
  bool differential;
  std::string theorem_constant;
};

const std::vector<CaseInfo>& case_table();
/// Throws SpecError for ids outside 1..10.
const CaseInfo& case_info(int id);

struct CaseSpec {
  int id = 0;
  std::optional<ScalarFunction> a, b, c;
  std::optional<ScalarFunction> f;
  std::map<std::string, double> constants;
  std::optional<int> branch;  // +1 or -1
  double x0 = std::numeric_limits<double>::quiet_NaN();
  Interval interval{0.0, 1.0};

  double constant(const std::string& name) const;
  double base_point() const { return std::isnan(x0) ? interval.lo : x0; }
};

/// Builds a spec from expression strings keyed "a", "b", "c", "f".
CaseSpec make_spec(int id, const std::map<std::string, std::string>& functions,
                   const std::map<std::string, double>& constants = {},
                   std::optional<int> branch = std::nullopt, Interval interval = {0.0, 1.0},
                   double x0 = std::numeric_limits<double>::quiet_NaN());

/// Throws SpecError unless the spec carries exactly the inputs of its case.
void validate_schema(const CaseSpec& spec);

/// Canonical one-line text of a spec.
std::string describe(const CaseSpec& spec);

struct ConstructOptions {
  Tolerances tol{};
  /// Guard quantities must stay above margin * (1 + sup|q|) in magnitude.
  double guard_margin = 0.0;
  std::size_t guard_grid = 257;
};

struct ConstructedCase {
  CaseSpec spec;
  RiccatiProblem problem;
  ScalarFunction y_p;
  SolutionFamily general;  // family_from_bc(problem, y_p)
  SolutionFamily theorem;  // the printed formula, built from its own integrals
  double condition_residual;
  double particular_residual;
};

/// Throws SpecError, GuardViolation, RadicandNegative, ConditionResidualTooLarge,
/// ParticularNotASolution.
ConstructedCase construct(const CaseSpec& spec, const ConstructOptions& opts = {});

/// Both sides of the defining condition recomputed from the completed triple.
struct ConditionSides {
  std::vector<double> x, lhs, rhs;
};
ConditionSides condition_sides(const ConstructedCase& cc, std::size_t grid = 257,
                               double tol_quad = 1e-12);

/// sup |lhs - rhs| / (1 + sup |lhs|) on a 257-point grid.
double validate_condition(const ConstructedCase& cc);

/// sup |2 c y_p + b - s sqrt(b^2 - 4ac + 4c y_p')| / (1 + sup |2 c y_p + b|),
/// s being the root the case promises. Throws RadicandNegative.
double seed_relation_check(const ConstructedCase& cc, std::size_t grid = 257);

/// sup over the grid of |residual of y_p| / (1 + |y_p|).
double particular_residual(const RiccatiProblem& p, const ScalarFunction& y_p,
                           std::size_t grid = 257);

/// Sup relative difference of two families after matching constants at the
/// left end; points within the pole guard of either family are skipped.
double family_agreement(const SolutionFamily& reference, const SolutionFamily& other, double C,
                        const Tolerances& tol = {}, std::size_t grid = 257);

// ---------------------------------------------------------------------------
// Random specs

/// mt19937_64 with a fixed conversion to reals, identical on every platform.
class FuzzRng {
 public:
  explicit FuzzRng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi);
  int pick(int n);
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Degree <= 3 polynomial plus an optional bounded trigonometric term.
std::string random_function(FuzzRng& rng);

struct FuzzOptions {
  Interval interval{0.0, 1.0};
  double guard_margin = 1e-2;
  double max_coefficient = 50.0;  // rejects specs with sup |a|, |b|, |c| above this
  int max_attempts = 5000;
  int constants_per_spec = 8;
};

struct FuzzCase {
  CaseSpec spec;
  ConstructedCase constructed;
  std::vector<double> Cs;
  int attempts;
};

/// Draws specs until one constructs under the fuzz guards. Throws SpecError
/// when max_attempts is exhausted.
FuzzCase fuzz_case(int id, FuzzRng& rng, const FuzzOptions& opts = {},
                   const Tolerances& tol = {});

struct CaseMetrics {
  double condition = 0.0;
  double seed = 0.0;
  double particular = 0.0;
  double family = 0.0;           // worst over the constants
  double oracle = 0.0;           // worst sup relative error against the RK oracle
  double pole_mismatch = 0.0;    // worst oracle pole distance to a closed-form pole
  double theorem_vs_gs = 0.0;    // worst over the constants
  std::size_t poles = 0;         // closed-form poles summed over the constants

  bool passes(const Tolerances& tol) const;
};

CaseMetrics evaluate_case(const ConstructedCase& cc, const std::vector<double>& Cs,
                          const Tolerances& tol = {});

}  // namespace riccati_lab
