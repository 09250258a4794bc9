#pragma once

#include "descent/objective.hpp"
#include "descent/types.hpp"

namespace descent::linesearch {

// One-dimensional slice J(eta) = L(x + eta d) along a fixed direction.
struct RaySlice {
  const objective::Objective* obj;
  Vector x;
  Vector d;

  double j(double eta) const { return obj->value(x + eta * d); }
  double jprime(double eta) const { return d.dot(obj->gradient(x + eta * d)); }
};

struct ArmijoConfig {
  double s = 1.0;        // initial rate, > 0
  double alpha = 1e-4;   // sufficient-decrease fraction, in (0,1)
  double beta = 0.5;     // backtracking factor, in (0,1)
  int max_iters = 100;
};

// Closed-form minimizer of the quadratic slice: eta = -d^T g / (d^T A d).
// Throws NonPositiveCurvature when d^T A d <= 1e-14.
double exact_quadratic_step(const objective::QuadraticForm& q, const Vector& x,
                            const Vector& d);

// Interval bisection on J'(eta). Requires J'(0) < 0 and J'(eta_max) > 0
// (BracketInvalid otherwise); callers without a bracket can double a trial
// eta until the slope turns positive. With use_gradient=false the sign of
// J' is probed by two close evaluations eps=1e-8 apart.
double bisection(const RaySlice& slice, double eta_max, double tol = 1e-8,
                 int max_iters = 200, bool use_gradient = true);

// Four-point golden-section search on [0, eta_max] for unimodal J.
// Probes at c1 = b - (b-a)/phi and c2 = a + (b-a)/phi; four-way-minimum ties
// break toward keeping the left interval.
double golden_section(const RaySlice& slice, double eta_max, double tol = 1e-8,
                      int max_iters = 200);

// Backtracking rule: largest eta = s*beta^k with
// J(eta) - J(0) <= alpha * eta * J'(0). Requires d^T grad < 0.
double armijo(const RaySlice& slice, const ArmijoConfig& cfg);

}  // namespace descent::linesearch
