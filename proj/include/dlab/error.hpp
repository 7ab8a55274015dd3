#pragma once

#include <stdexcept>
#include <string>

namespace dlab {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define DLAB_ERROR_KIND(Name)                                   \
  class Name : public Error {                                   \
  public:                                                       \
    using Error::Error;                                         \
    const char* kind() const noexcept override { return #Name; } \
  };

DLAB_ERROR_KIND(PositivityLost)
DLAB_ERROR_KIND(SingularMetric)
DLAB_ERROR_KIND(NonRealResult)
DLAB_ERROR_KIND(NoConvergence)
DLAB_ERROR_KIND(UnsupportedDimension)
DLAB_ERROR_KIND(StepFailure)
DLAB_ERROR_KIND(BadReference)
DLAB_ERROR_KIND(PrereqViolated)
DLAB_ERROR_KIND(BadRadius)
DLAB_ERROR_KIND(ConfigError)
DLAB_ERROR_KIND(GridMismatch)

#undef DLAB_ERROR_KIND

// Smallest eigenvalue a metric may have before it counts as degenerate.
inline constexpr double positivity_floor = 1e-10;
inline constexpr double singular_condition = 1e12;

}  // namespace dlab
