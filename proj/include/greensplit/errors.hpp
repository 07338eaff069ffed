#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace greensplit {

/// Base class of every error raised by the library. `error_class()` is the
/// stable machine-readable name printed by the command line front end.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* error_class() const noexcept = 0;
  /// Process exit code the CLI maps this error onto.
  virtual int exit_code() const noexcept { return 3; }
};

#define GREENSPLIT_DEFINE_ERROR(Name, Code)                            \
  class Name : public Error {                                          \
   public:                                                             \
    using Error::Error;                                                \
    const char* error_class() const noexcept override { return #Name; } \
    int exit_code() const noexcept override { return Code; }           \
  };

GREENSPLIT_DEFINE_ERROR(ValidationError, 2)
GREENSPLIT_DEFINE_ERROR(DimensionError, 2)
GREENSPLIT_DEFINE_ERROR(EigenFailure, 3)
GREENSPLIT_DEFINE_ERROR(UnstableMatrix, 3)
GREENSPLIT_DEFINE_ERROR(SolveFailure, 3)
GREENSPLIT_DEFINE_ERROR(DegenerateSystem, 3)
GREENSPLIT_DEFINE_ERROR(NoConvergence, 3)
GREENSPLIT_DEFINE_ERROR(ZeroTrace, 3)
GREENSPLIT_DEFINE_ERROR(NoStableStart, 3)
GREENSPLIT_DEFINE_ERROR(InconsistentLocal, 3)
GREENSPLIT_DEFINE_ERROR(IterationLimit, 4)

#undef GREENSPLIT_DEFINE_ERROR

/// Raised when the distributed solver misses its tolerance. Carries the
/// per-agent relative errors and the connected components of the
/// communication graph so callers can tell a slow run from a split one.
class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, std::vector<double> residuals,
               std::vector<std::vector<int>> components)
      : Error(what), residuals_(std::move(residuals)), components_(std::move(components)) {}
  const char* error_class() const noexcept override { return "NotConverged"; }
  int exit_code() const noexcept override { return 4; }

  const std::vector<double>& residuals() const { return residuals_; }
  const std::vector<std::vector<int>>& components() const { return components_; }

 private:
  std::vector<double> residuals_;
  std::vector<std::vector<int>> components_;
};

}  // namespace greensplit
