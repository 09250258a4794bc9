#pragma once

#include <iosfwd>
#include <variant>
#include <vector>

#include "descent/linalg.hpp"
#include "descent/linesearch.hpp"
#include "descent/objective.hpp"
#include "descent/types.hpp"

namespace descent::cg {

// Full record of one conjugate-direction/gradient run. iterates holds
// x_1..x_{T+1}; gradients/directions/betas/etas hold the T per-iteration
// quantities; terminated_at = T.
struct CgRun {
  std::vector<Vector> iterates;
  std::vector<Vector> gradients;
  std::vector<Vector> directions;
  std::vector<double> betas;
  std::vector<double> etas;
  int terminated_at = 0;
};

// SPD preconditioner M; M^{-1} is always applied via triangular solves on a
// Cholesky factor (diagonal entries for the diagonal kind), never an inverse.
class Preconditioner {
 public:
  static Preconditioner identity();
  static Preconditioner diagonal(const Matrix& a);
  static Preconditioner perfect(const Matrix& a);  // M = A
  static Preconditioner custom(Matrix m);

  Vector apply_inverse(const Vector& v) const;

 private:
  enum class Kind { Identity, Diagonal, Factored };
  Kind kind_ = Kind::Identity;
  Vector diag_;
  linalg::CholeskyFactor factor_{Matrix()};
};

// Conjugate-direction solve along caller-supplied directions. Requires d
// pairwise H-conjugate directions (checked to 1e-8 relative) on an SPD
// quadratic; reaches the minimizer after d exact steps.
CgRun cd_solve(const objective::QuadraticForm& q, const Vector& x1,
               const std::vector<Vector>& dirs);

// beta_t = g_t^T g_t / g_{t-1}^T g_{t-1} (beta_1 = 0), eta from the exact
// quadratic step. Stops at ||g|| <= tol * max(1, ||g_1||) or after d steps.
CgRun cg_practical(const objective::QuadraticForm& q, const Vector& x1,
                   double tol = 1e-10);

// beta_t = g_t^T A d_{t-1} / d_{t-1}^T A d_{t-1}; must match cg_practical.
CgRun cg_vanilla(const objective::QuadraticForm& q, const Vector& x1,
                 double tol = 1e-10);

enum class BetaKind { FletcherReeves, PolakRibiere, HestenesStiefel };

struct FixedRate {
  double eta;
};
struct ExactRate {};  // needs the objective's Hessian
struct ArmijoRate {
  linesearch::ArmijoConfig cfg;
};
using RateRule = std::variant<FixedRate, ExactRate, ArmijoRate>;

// Nonlinear CG with the chosen beta formula. If the descent condition
// d^T g < 0 fails (possible under fixed/inexact rates), the direction is
// restarted to -g. Stops at max_iters or ||g|| <= tol * max(1, ||g_1||).
CgRun cg_general(const objective::Objective& obj, const Vector& x1,
                 BetaKind beta_kind, const RateRule& rate, int max_iters,
                 double tol = 1e-10);

// Untransformed-preconditioned CG: the practical recurrences with M^{-1}
// applied to every gradient. With M = A it converges in one iteration.
CgRun pcg_untransformed(const objective::QuadraticForm& q, const Vector& x1,
                        const Preconditioner& m, double tol = 1e-10);

// Transformed-preconditioned CG: runs cg_practical on P^{-T} A P^{-1} and
// maps iterates back through x = P^{-1} x_hat. Oracle for pcg_untransformed
// when M = P^T P.
CgRun pcg_transformed(const objective::QuadraticForm& q, const Vector& x1,
                      const Matrix& p, double tol = 1e-10);

// 2 ((sqrt(k)-1)/(sqrt(k)+1))^t, the energy-norm error bound after t steps.
double chebyshev_bound(double kappa, int t);

// CSV: t,grad_norm,beta,eta,energy_norm (energy norm of x_t - x_star in A).
void export_csv(const CgRun& run, const objective::QuadraticForm& q,
                std::ostream& os);

}  // namespace descent::cg
