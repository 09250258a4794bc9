#include "descent/linesearch.hpp"

#include <cmath>

namespace descent::linesearch {

double exact_quadratic_step(const objective::QuadraticForm& q, const Vector& x,
                            const Vector& d) {
  const Vector g = q.gradient(x);
  const double curvature = d.dot(q.a() * d);
  if (curvature <= 1e-14) {
    throw NonPositiveCurvature("exact_quadratic_step: d^T A d = " +
                               std::to_string(curvature));
  }
  return -d.dot(g) / curvature;
}

double bisection(const RaySlice& slice, double eta_max, double tol,
                 int max_iters, bool use_gradient) {
  constexpr double kEps = 1e-8;
  const auto increasing_at = [&](double eta) {
    if (use_gradient) return slice.jprime(eta) > 0.0;
    return slice.j(eta + kEps) > slice.j(eta);
  };

  double a = 0.0;
  double b = eta_max;
  if (!(b > a)) throw BracketInvalid("bisection: eta_max must be > 0");
  if (increasing_at(a)) {
    throw BracketInvalid("bisection: J'(0) >= 0");
  }
  if (!increasing_at(b)) {
    throw BracketInvalid("bisection: J'(eta_max) <= 0");
  }
  for (int it = 0; it < max_iters; ++it) {
    if (b - a <= tol) return (a + b) / 2.0;
    const double mid = (a + b) / 2.0;
    if (increasing_at(mid)) {
      b = use_gradient ? mid : mid + kEps;
    } else {
      a = mid;
    }
  }
  if (b - a <= tol) return (a + b) / 2.0;
  throw MaxIters("bisection: interval " + std::to_string(b - a) + " after " +
                 std::to_string(max_iters) + " iterations");
}

double golden_section(const RaySlice& slice, double eta_max, double tol,
                      int max_iters) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  double a = 0.0;
  double b = eta_max;
  if (!(b > a)) throw BracketInvalid("golden_section: eta_max must be > 0");
  for (int it = 0; it < max_iters; ++it) {
    if (b - a <= tol) return (a + b) / 2.0;
    const double c1 = b - (b - a) / phi;
    const double c2 = a + (b - a) / phi;
    const double ja = slice.j(a);
    const double jc1 = slice.j(c1);
    const double jc2 = slice.j(c2);
    const double jb = slice.j(b);
    // Discard one end interval; <= keeps the left option on ties.
    if (ja <= jc1 && ja <= jc2 && ja <= jb) {
      b = c1;
    } else if (jc1 <= jc2 && jc1 <= jb) {
      b = c2;
    } else if (jc2 <= jb) {
      a = c1;
    } else {
      a = c2;
    }
  }
  if (b - a <= tol) return (a + b) / 2.0;
  throw MaxIters("golden_section: interval " + std::to_string(b - a) +
                 " after " + std::to_string(max_iters) + " iterations");
}

double armijo(const RaySlice& slice, const ArmijoConfig& cfg) {
  if (cfg.s <= 0.0 || cfg.alpha <= 0.0 || cfg.alpha >= 1.0 ||
      cfg.beta <= 0.0 || cfg.beta >= 1.0) {
    throw std::invalid_argument("armijo: need s > 0, alpha,beta in (0,1)");
  }
  const double j0 = slice.j(0.0);
  const double slope = slice.d.dot(slice.obj->gradient(slice.x));
  if (slope >= 0.0) {
    throw BracketInvalid("armijo: d is not a descent direction");
  }
  double eta = cfg.s;
  for (int k = 0; k <= cfg.max_iters; ++k) {
    if (slice.j(eta) - j0 <= cfg.alpha * eta * slope) return eta;
    eta *= cfg.beta;
  }
  throw MaxIters("armijo: no step accepted within " +
                 std::to_string(cfg.max_iters) + " backtracks");
}

}  // namespace descent::linesearch
