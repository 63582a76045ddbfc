#pragma once

#include <stdexcept>
#include <string>

namespace shilnikov {

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define SHILNIKOV_ERROR(Name)                                                   \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& what) : Error(#Name, what) {}            \
  };

SHILNIKOV_ERROR(SpecError)
SHILNIKOV_ERROR(DomainError)
SHILNIKOV_ERROR(NotHyperbolic)
SHILNIKOV_ERROR(NotEqualEigenvalues)
SHILNIKOV_ERROR(StepFailure)
SHILNIKOV_ERROR(NoCrossing)
SHILNIKOV_ERROR(Tangency)
SHILNIKOV_ERROR(ResonanceObstruction)
SHILNIKOV_ERROR(ChartOverflow)
SHILNIKOV_ERROR(ChartExit)
SHILNIKOV_ERROR(ConeViolation)
SHILNIKOV_ERROR(ContractionFailure)
SHILNIKOV_ERROR(InnerNewtonFailure)
SHILNIKOV_ERROR(TransversalityFailure)
SHILNIKOV_ERROR(DegenerateCriticalPoint)
SHILNIKOV_ERROR(DegenerateOrbit)
SHILNIKOV_ERROR(IllConditioned)
SHILNIKOV_ERROR(IoError)

#undef SHILNIKOV_ERROR

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, double residual)
      : Error("NoConvergence", what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class NewtonFailure : public Error {
 public:
  NewtonFailure(const std::string& what, double residual)
      : Error("NewtonFailure", what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace shilnikov
