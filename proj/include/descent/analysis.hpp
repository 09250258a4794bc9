#pragma once

#include "descent/objective.hpp"
#include "descent/types.hpp"

namespace descent::analysis {

// Per-eigenmode contraction factors of an iteration; converges iff the
// largest magnitude stays below 1.
struct RatePrediction {
  Vector per_mode_factors;
  double overall_rate = 0.0;
  bool converges = false;
};

// Iterate after t fixed-rate gradient steps on an SPD quadratic:
// x_{t+1} = x_star + Q (I - eta Lambda)^t Q^T (x_1 - x_star).
Vector vanilla_gd_closed_form(const objective::QuadraticForm& q,
                              const Vector& x1, double eta, int t);

// (eta, rate) = (2/(lambda_1 + lambda_d), (kappa-1)/(kappa+1)).
std::pair<double, double> vanilla_gd_optimal(const objective::QuadraticForm& q);

// Spectral radius of [[rho, -eta lambda], [rho, 1 - eta lambda]] per mode.
RatePrediction momentum_rate(double eta, double rho, const Vector& lambdas);

// Steepest-descent contraction r for a 2-d spectrum, from
// r^2 = 1 - (kappa^2 + s^2)^2 / ((kappa^3 + s^2)(kappa + s^2)); zero at
// s in {0, inf} and at kappa = 1.
double steepest_rate_2d(double kappa, double sigma2);

// EMA period N with smoothing constant 1 - rho = 2/(N+1).
double ema_period(double rho);

// Predicted squared energy-norm drop of one steepest-descent step:
// r^2 = 1 - (g^T g)^2 / ((g^T A g)(e^T A e)).
double steepest_energy_drop(const objective::QuadraticForm& q,
                            const Vector& x_t);

}  // namespace descent::analysis
