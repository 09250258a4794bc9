#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace descent {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Error taxonomy shared by all modules. Every contract violation throws a
// dedicated type so callers (and tests) can distinguish failure modes.
#define DESCENT_DEFINE_ERROR(Name)                          \
  struct Name : std::runtime_error {                        \
    explicit Name(const std::string& what_arg)              \
        : std::runtime_error(#Name ": " + what_arg) {}      \
  }

DESCENT_DEFINE_ERROR(DimensionMismatch);
DESCENT_DEFINE_ERROR(NonSymmetric);
DESCENT_DEFINE_ERROR(NotPositiveDefinite);
DESCENT_DEFINE_ERROR(NotSpd);
DESCENT_DEFINE_ERROR(Singular);
DESCENT_DEFINE_ERROR(SingularHessian);
DESCENT_DEFINE_ERROR(NoConvergence);
DESCENT_DEFINE_ERROR(NegativeQuadraticForm);
DESCENT_DEFINE_ERROR(NonPositiveCurvature);
DESCENT_DEFINE_ERROR(BracketInvalid);
DESCENT_DEFINE_ERROR(MaxIters);
DESCENT_DEFINE_ERROR(NonFiniteGradient);
DESCENT_DEFINE_ERROR(EmptyBatch);
DESCENT_DEFINE_ERROR(NotConjugate);
DESCENT_DEFINE_ERROR(ConfigError);

#undef DESCENT_DEFINE_ERROR

}  // namespace descent
