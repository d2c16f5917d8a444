#include "riccati_lab/errors.hpp"

#include <cstdio>

namespace riccati_lab {
namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}

}  // namespace

SyntaxError::SyntaxError(std::size_t offset, const std::string& message,
                         std::vector<std::string> expected)
    : Error("SyntaxError",
            "offset " + std::to_string(offset) + ": " + message +
                (expected.empty() ? "" : " (expected " + join(expected) + ")")),
      offset_(offset),
      expected_(std::move(expected)) {}

UnknownIdentifier::UnknownIdentifier(std::string name, std::size_t offset)
    : Error("UnknownIdentifier",
            "unknown identifier '" + name + "' at offset " + std::to_string(offset)),
      name_(std::move(name)),
      offset_(offset) {}

DomainError::DomainError(std::string subexpression, double x, const std::string& reason)
    : Error("DomainError", reason + " in '" + subexpression + "' at x=" + fmt_double(x)),
      subexpression_(std::move(subexpression)),
      x_(x) {}

OutOfDomain::OutOfDomain(double x, double lo, double hi)
    : Error("OutOfDomain", "x=" + fmt_double(x) + " outside [" + fmt_double(lo) + ", " +
                               fmt_double(hi) + "]"),
      x_(x) {}

NonFiniteIntegrand::NonFiniteIntegrand(double x)
    : Error("NonFiniteIntegrand", "integrand not finite at x=" + fmt_double(x)), x_(x) {}

ToleranceNotMet::ToleranceNotMet(double panel_lo, double panel_hi, double achieved)
    : Error("ToleranceNotMet", "panel [" + fmt_double(panel_lo) + ", " + fmt_double(panel_hi) +
                                   "] achieved error " + fmt_double(achieved)),
      achieved_(achieved) {}

ParticularNotASolution::ParticularNotASolution(double residual, double x)
    : Error("ParticularNotASolution",
            "particular solution residual " + fmt_double(residual) + " at x=" + fmt_double(x)),
      residual_(residual),
      x_(x) {}

ParticularVanishes::ParticularVanishes(double x)
    : Error("ParticularVanishes", "particular solution vanishes near x=" + fmt_double(x)),
      x_(x) {}

CoefficientEvaluationError::CoefficientEvaluationError(double x, const std::string& detail)
    : Error("CoefficientEvaluationError",
            "coefficient evaluation failed at x=" + fmt_double(x) + ": " + detail),
      x_(x) {}

DegenerateQuadruple::DegenerateQuadruple(double x)
    : Error("DegenerateQuadruple", "cross-ratio denominator vanishes at x=" + fmt_double(x)) {}

GuardViolation::GuardViolation(std::string guard, double x)
    : Error("GuardViolation", "guard '" + guard + "' violated at x=" + fmt_double(x)),
      guard_(std::move(guard)),
      x_(x) {}

RadicandNegative::RadicandNegative(double x)
    : Error("RadicandNegative", "radicand negative at x=" + fmt_double(x)), x_(x) {}

ConditionResidualTooLarge::ConditionResidualTooLarge(double residual, double tolerance)
    : Error("ConditionResidualTooLarge", "condition residual " + fmt_double(residual) +
                                             " exceeds " + fmt_double(tolerance)),
      residual_(residual) {}

MetricSignatureViolation::MetricSignatureViolation(double x)
    : Error("MetricSignatureViolation", "1 - 2 x eta <= 0 at x=" + fmt_double(x)), x_(x) {}

NotASolution::NotASolution(double residual, double x)
    : Error("NotASolution", "u does not solve the structure equation: residual " +
                                fmt_double(residual) + " at x=" + fmt_double(x)),
      residual_(residual) {}

}  // namespace riccati_lab
