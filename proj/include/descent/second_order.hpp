#pragma once

#include "descent/objective.hpp"
#include "descent/types.hpp"

namespace descent::second_order {

enum class CriticalPointKind { LocalMin, LocalMax, Saddle, Degenerate };

// Multiplicative damping control: grow alpha while the loss increases,
// shrink it while the quadratic model keeps working.
struct DampingController {
  double alpha = 1.0;        // > 0, clamped to [1e-12, 1e12]
  double up_factor = 10.0;   // > 1
  double down_factor = 0.1;  // in (0,1)
};

// -H^{-1} g via a solve (Cholesky when PD, pivoted LU otherwise).
// One step reaches the minimizer of a PD quadratic.
Vector newton_step(const objective::Objective& obj, const Vector& x);

// -(H + alpha I)^{-1} g; interpolates between Newton (alpha=0) and a
// gradient step scaled by 1/alpha (alpha large).
Vector damped_newton_step(const objective::Objective& obj, const Vector& x,
                          double alpha);

// -(H + alpha diag(H))^{-1} g; per-mode factor -1/(lambda (1+alpha)) on
// diagonal Hessians.
Vector lm_step(const objective::Objective& obj, const Vector& x, double alpha);

// alpha *= up_factor if the loss increased, else *= down_factor (ties count
// as a decrease); result clamped to [1e-12, 1e12].
DampingController lm_adapt(DampingController ctrl, double loss_prev,
                           double loss_new);

// Eigen-sign classification with relative threshold tau = 1e-10 max|lambda|.
CriticalPointKind classify_critical_point(const Matrix& h);

const char* to_string(CriticalPointKind kind);

}  // namespace descent::second_order
