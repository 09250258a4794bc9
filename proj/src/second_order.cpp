#include "descent/second_order.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "descent/linalg.hpp"

namespace descent::second_order {

namespace {

Matrix hessian_or_throw(const objective::Objective& obj, const Vector& x) {
  const auto h = obj.hessian(x);
  if (!h.has_value()) {
    throw SingularHessian("second_order: objective provides no Hessian");
  }
  return *h;
}

// Cholesky when PD, else pivoted elimination; Singular matrices rejected.
Vector solve_step(const Matrix& m, const Vector& rhs) {
  try {
    return linalg::cholesky_solve(linalg::cholesky(m), rhs);
  } catch (const NotPositiveDefinite&) {
    // fall through to LU
  } catch (const NonSymmetric&) {
    // general objectives may hand back slightly asymmetric Hessians
  }
  Eigen::PartialPivLU<Matrix> lu(m);
  const double pivot_min = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (pivot_min <= 1e-12 * std::max(1.0, m.norm())) {
    throw SingularHessian("second_order: pivot " + std::to_string(pivot_min));
  }
  Vector out = lu.solve(rhs);
  if (!out.allFinite()) throw SingularHessian("second_order: non-finite solve");
  return out;
}

}  // namespace

Vector newton_step(const objective::Objective& obj, const Vector& x) {
  return solve_step(hessian_or_throw(obj, x), -obj.gradient(x));
}

Vector damped_newton_step(const objective::Objective& obj, const Vector& x,
                          double alpha) {
  Matrix h = hessian_or_throw(obj, x);
  h.diagonal().array() += alpha;
  return solve_step(h, -obj.gradient(x));
}

Vector lm_step(const objective::Objective& obj, const Vector& x, double alpha) {
  Matrix h = hessian_or_throw(obj, x);
  h.diagonal() += alpha * hessian_or_throw(obj, x).diagonal();
  return solve_step(h, -obj.gradient(x));
}

DampingController lm_adapt(DampingController ctrl, double loss_prev,
                           double loss_new) {
  ctrl.alpha *= loss_new > loss_prev ? ctrl.up_factor : ctrl.down_factor;
  ctrl.alpha = std::clamp(ctrl.alpha, 1e-12, 1e12);
  return ctrl;
}

CriticalPointKind classify_critical_point(const Matrix& h) {
  const linalg::SpectralDecomposition s = linalg::spectral(h);
  const double tau = 1e-10 * s.lambda.cwiseAbs().maxCoeff();
  bool any_pos = false;
  bool any_neg = false;
  for (Index i = 0; i < s.lambda.size(); ++i) {
    if (std::abs(s.lambda(i)) <= tau) return CriticalPointKind::Degenerate;
    (s.lambda(i) > 0.0 ? any_pos : any_neg) = true;
  }
  if (any_pos && any_neg) return CriticalPointKind::Saddle;
  return any_pos ? CriticalPointKind::LocalMin : CriticalPointKind::LocalMax;
}

const char* to_string(CriticalPointKind kind) {
  switch (kind) {
    case CriticalPointKind::LocalMin: return "local_min";
    case CriticalPointKind::LocalMax: return "local_max";
    case CriticalPointKind::Saddle: return "saddle";
    case CriticalPointKind::Degenerate: return "degenerate";
  }
  return "unknown";
}

}  // namespace descent::second_order
