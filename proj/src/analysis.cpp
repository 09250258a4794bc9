#include "descent/analysis.hpp"

#include <cmath>

#include "descent/linalg.hpp"

namespace descent::analysis {

namespace {

linalg::SpectralDecomposition spd_spectrum(const objective::QuadraticForm& q,
                                           const char* who) {
  linalg::require_symmetric(q.a(), who);
  linalg::SpectralDecomposition s = linalg::spectral(q.a());
  if (s.lambda(s.lambda.size() - 1) <= 0.0) {
    throw NotSpd(std::string(who) + ": lambda_min = " +
                 std::to_string(s.lambda(s.lambda.size() - 1)));
  }
  return s;
}

}  // namespace

Vector vanilla_gd_closed_form(const objective::QuadraticForm& q,
                              const Vector& x1, double eta, int t) {
  if (t < 0) throw std::invalid_argument("vanilla_gd_closed_form: t >= 0");
  const linalg::SpectralDecomposition s =
      spd_spectrum(q, "vanilla_gd_closed_form");
  const Vector x_star = q.minimizer();
  Vector y = s.q.transpose() * (x1 - x_star);
  for (Index i = 0; i < y.size(); ++i) {
    y(i) *= std::pow(1.0 - eta * s.lambda(i), t);
  }
  return x_star + s.q * y;
}

std::pair<double, double> vanilla_gd_optimal(
    const objective::QuadraticForm& q) {
  const linalg::SpectralDecomposition s = spd_spectrum(q, "vanilla_gd_optimal");
  const double lmax = s.lambda(0);
  const double lmin = s.lambda(s.lambda.size() - 1);
  const double kappa = lmax / lmin;
  return {2.0 / (lmax + lmin), (kappa - 1.0) / (kappa + 1.0)};
}

RatePrediction momentum_rate(double eta, double rho, const Vector& lambdas) {
  if (eta <= 0.0) throw std::invalid_argument("momentum_rate: eta > 0");
  if (rho < 0.0 || rho > 1.0) {
    throw std::invalid_argument("momentum_rate: rho in [0,1]");
  }
  RatePrediction out;
  out.per_mode_factors.resize(lambdas.size());
  Matrix b(2, 2);
  for (Index i = 0; i < lambdas.size(); ++i) {
    b << rho, -eta * lambdas(i), rho, 1.0 - eta * lambdas(i);
    const linalg::Eigenpair2x2 pair = linalg::eig2x2(b);
    out.per_mode_factors(i) = std::max(std::abs(pair.alpha), std::abs(pair.beta));
  }
  out.overall_rate = out.per_mode_factors.maxCoeff();
  out.converges = out.overall_rate < 1.0;
  return out;
}

double steepest_rate_2d(double kappa, double sigma2) {
  if (kappa < 1.0) throw std::invalid_argument("steepest_rate_2d: kappa >= 1");
  if (std::abs(sigma2) > 1e12) return 0.0;  // sigma -> inf limit
  const double s2 = sigma2 * sigma2;
  const double k2 = kappa * kappa;
  const double num = (k2 + s2) * (k2 + s2);
  const double den = (kappa * k2 + s2) * (kappa + s2);
  return std::sqrt(std::max(0.0, 1.0 - num / den));
}

double ema_period(double rho) {
  if (rho < 0.0 || rho >= 1.0) {
    throw std::invalid_argument("ema_period: rho in [0,1)");
  }
  return 2.0 / (1.0 - rho) - 1.0;
}

double steepest_energy_drop(const objective::QuadraticForm& q,
                            const Vector& x_t) {
  spd_spectrum(q, "steepest_energy_drop");
  const Matrix& a = q.sym_hessian();
  const Vector g = q.gradient(x_t);
  const Vector e = x_t - q.minimizer();
  const double gg = g.dot(g);
  const double gag = g.dot(a * g);
  const double eae = e.dot(a * e);
  if (gag <= 0.0 || eae <= 0.0) return 0.0;  // already at the minimizer
  return 1.0 - gg * gg / (gag * eae);
}

}  // namespace descent::analysis
