#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gdml {

/// Points live in R^2; 1D objects use the first coordinate and keep y = 0.
using Point = Eigen::Vector2d;
using Vector = Eigen::VectorXd;
using Index = std::ptrdiff_t;

inline Point point1d(double x) { return Point(x, 0.0); }

// Error hierarchy. Every failure surfaced by the library derives from Error so
// callers (the CLI in particular) can catch once and report the message.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define GDML_DEFINE_ERROR(Name)            \
  class Name : public Error {              \
  public:                                  \
    using Error::Error;                    \
  };

GDML_DEFINE_ERROR(NonInvertible)
GDML_DEFINE_ERROR(InvalidMesh)
GDML_DEFINE_ERROR(IncompatibleRule)
GDML_DEFINE_ERROR(OutOfDomain)
GDML_DEFINE_ERROR(EvaluationError)
GDML_DEFINE_ERROR(NoConvergence)
GDML_DEFINE_ERROR(SingularJacobian)
GDML_DEFINE_ERROR(SingularMatrix)
GDML_DEFINE_ERROR(ConstantsNotConverged)
GDML_DEFINE_ERROR(Unsupported)
GDML_DEFINE_ERROR(NotConverged)
GDML_DEFINE_ERROR(InsufficientData)
GDML_DEFINE_ERROR(MismatchedSizes)
GDML_DEFINE_ERROR(ConfigError)
GDML_DEFINE_ERROR(InvalidModel)

#undef GDML_DEFINE_ERROR

} // namespace gdml
