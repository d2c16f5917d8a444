#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace riccati_lab {

/// Base of every error raised by the library. `code()` is a stable
/// machine-readable token used by the CLI on its `ERROR <code> <detail>` line.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// exprlang

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& message,
              std::vector<std::string> expected = {});
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(std::string name, std::size_t offset);
  const std::string& name() const noexcept { return name_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

class DomainError : public Error {
 public:
  DomainError(std::string subexpression, double x, const std::string& reason);
  const std::string& subexpression() const noexcept { return subexpression_; }
  double x() const noexcept { return x_; }

 private:
  std::string subexpression_;
  double x_;
};

// calculus

class OutOfDomain : public Error {
 public:
  OutOfDomain(double x, double lo, double hi);
  double x() const noexcept { return x_; }

 private:
  double x_;
};

class NonFiniteIntegrand : public Error {
 public:
  explicit NonFiniteIntegrand(double x);
  double x() const noexcept { return x_; }

 private:
  double x_;
};

class ToleranceNotMet : public Error {
 public:
  ToleranceNotMet(double panel_lo, double panel_hi, double achieved);
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

// riccati_core

class ParticularNotASolution : public Error {
 public:
  ParticularNotASolution(double residual, double x);
  double residual() const noexcept { return residual_; }
  double x() const noexcept { return x_; }

 private:
  double residual_;
  double x_;
};

class ParticularVanishes : public Error {
 public:
  explicit ParticularVanishes(double x);
  double x() const noexcept { return x_; }

 private:
  double x_;
};

class CoefficientEvaluationError : public Error {
 public:
  CoefficientEvaluationError(double x, const std::string& detail);
  double x() const noexcept { return x_; }

 private:
  double x_;
};

class DegenerateQuadruple : public Error {
 public:
  explicit DegenerateQuadruple(double x);
};

// cases

class GuardViolation : public Error {
 public:
  GuardViolation(std::string guard, double x);
  const std::string& guard() const noexcept { return guard_; }
  double x() const noexcept { return x_; }

 private:
  std::string guard_;
  double x_;
};

class RadicandNegative : public Error {
 public:
  explicit RadicandNegative(double x);
  double x() const noexcept { return x_; }

 private:
  double x_;
};

class ConditionResidualTooLarge : public Error {
 public:
  ConditionResidualTooLarge(double residual, double tolerance);
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class SpecError : public Error {
 public:
  explicit SpecError(const std::string& what) : Error("SpecError", what) {}
};

// astro

class MetricSignatureViolation : public Error {
 public:
  explicit MetricSignatureViolation(double x);
  double x() const noexcept { return x_; }

 private:
  double x_;
};

class NotASolution : public Error {
 public:
  NotASolution(double residual, double x);
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace riccati_lab
