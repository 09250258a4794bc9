#include "descent/cg.hpp"

#include <cmath>
#include <ostream>

#include <Eigen/LU>

#include "descent/io.hpp"

namespace descent::cg {

namespace {

double relative_tol(double tol, const Vector& g1) {
  return tol * std::max(1.0, g1.norm());
}

double curvature_or_throw(const objective::QuadraticForm& q, const Vector& d) {
  const double curv = d.dot(q.a() * d);
  if (curv <= 0.0) {
    throw NotSpd("cg: d^T A d = " + std::to_string(curv));
  }
  return curv;
}

}  // namespace

Preconditioner Preconditioner::identity() { return Preconditioner{}; }

Preconditioner Preconditioner::diagonal(const Matrix& a) {
  linalg::require_symmetric(a, "Preconditioner::diagonal");
  Preconditioner p;
  p.kind_ = Kind::Diagonal;
  p.diag_ = a.diagonal();
  if ((p.diag_.array() <= 0.0).any()) {
    throw NotSpd("diagonal preconditioner: nonpositive diagonal entry");
  }
  return p;
}

Preconditioner Preconditioner::perfect(const Matrix& a) {
  return custom(a);
}

Preconditioner Preconditioner::custom(Matrix m) {
  Preconditioner p;
  p.kind_ = Kind::Factored;
  try {
    p.factor_ = linalg::cholesky(m);
  } catch (const NotPositiveDefinite& e) {
    throw NotSpd(std::string("custom preconditioner: ") + e.what());
  }
  return p;
}

Vector Preconditioner::apply_inverse(const Vector& v) const {
  switch (kind_) {
    case Kind::Identity:
      return v;
    case Kind::Diagonal:
      return v.cwiseQuotient(diag_);
    case Kind::Factored:
      return linalg::cholesky_solve(factor_, v);
  }
  return v;
}

CgRun cd_solve(const objective::QuadraticForm& q, const Vector& x1,
               const std::vector<Vector>& dirs) {
  linalg::require_symmetric(q.a(), "cd_solve");
  const Index d = q.dimension();
  if (static_cast<Index>(dirs.size()) != d) {
    throw NotConjugate("cd_solve: need exactly d directions, got " +
                       std::to_string(dirs.size()));
  }
  const Matrix& h = q.sym_hessian();
  for (size_t i = 0; i < dirs.size(); ++i) {
    for (size_t j = i + 1; j < dirs.size(); ++j) {
      const double cross = std::abs(dirs[i].dot(h * dirs[j]));
      const double scale = linalg::energy_norm(dirs[i], h) *
                           linalg::energy_norm(dirs[j], h);
      if (cross > 1e-8 * scale) {
        throw NotConjugate("cd_solve: directions " + std::to_string(i) +
                           " and " + std::to_string(j));
      }
    }
  }

  CgRun run;
  Vector x = x1;
  run.iterates.push_back(x);
  for (const Vector& dir : dirs) {
    const Vector g = q.gradient(x);
    double eta;
    try {
      eta = linesearch::exact_quadratic_step(q, x, dir);
    } catch (const NonPositiveCurvature& e) {
      throw NotSpd(std::string("cd_solve: ") + e.what());
    }
    x += eta * dir;
    run.gradients.push_back(g);
    run.directions.push_back(dir);
    run.betas.push_back(0.0);
    run.etas.push_back(eta);
    run.iterates.push_back(x);
  }
  run.terminated_at = static_cast<int>(dirs.size());
  return run;
}

namespace {

enum class QuadraticBeta { Practical, Vanilla };

CgRun cg_quadratic(const objective::QuadraticForm& q, const Vector& x1,
                   double tol, QuadraticBeta kind) {
  linalg::require_symmetric(q.a(), "cg");
  const Index dims = q.dimension();
  CgRun run;
  Vector x = x1;
  run.iterates.push_back(x);
  const double stop = relative_tol(tol, q.gradient(x1));

  Vector g_prev;
  Vector d_prev;
  for (Index t = 1; t <= dims; ++t) {
    const Vector g = q.gradient(x);
    if (g.norm() <= stop) break;
    double beta = 0.0;
    if (t > 1) {
      beta = kind == QuadraticBeta::Practical
                 ? g.dot(g) / g_prev.dot(g_prev)
                 : g.dot(q.a() * d_prev) / d_prev.dot(q.a() * d_prev);
    }
    const Vector d = t == 1 ? Vector(-g) : Vector(-g + beta * d_prev);
    const double eta = g.dot(g) / curvature_or_throw(q, d);
    x += eta * d;

    run.gradients.push_back(g);
    run.directions.push_back(d);
    run.betas.push_back(beta);
    run.etas.push_back(eta);
    run.iterates.push_back(x);
    g_prev = g;
    d_prev = d;
  }
  run.terminated_at = static_cast<int>(run.etas.size());
  return run;
}

}  // namespace

CgRun cg_practical(const objective::QuadraticForm& q, const Vector& x1,
                   double tol) {
  return cg_quadratic(q, x1, tol, QuadraticBeta::Practical);
}

CgRun cg_vanilla(const objective::QuadraticForm& q, const Vector& x1,
                 double tol) {
  return cg_quadratic(q, x1, tol, QuadraticBeta::Vanilla);
}

CgRun cg_general(const objective::Objective& obj, const Vector& x1,
                 BetaKind beta_kind, const RateRule& rate, int max_iters,
                 double tol) {
  CgRun run;
  Vector x = x1;
  run.iterates.push_back(x);
  const Vector g1 = obj.gradient(x1);
  if (!g1.allFinite()) throw NonFiniteGradient("cg_general");
  const double stop = relative_tol(tol, g1);

  Vector g_prev;
  Vector d_prev;
  for (int t = 1; t <= max_iters; ++t) {
    const Vector g = obj.gradient(x);
    if (!g.allFinite()) throw NonFiniteGradient("cg_general");
    if (g.norm() <= stop) break;

    double beta = 0.0;
    if (t > 1) {
      switch (beta_kind) {
        case BetaKind::FletcherReeves:
          beta = g.dot(g) / g_prev.dot(g_prev);
          break;
        case BetaKind::PolakRibiere:
          beta = (g - g_prev).dot(g) / g_prev.dot(g_prev);
          break;
        case BetaKind::HestenesStiefel: {
          const double denom = (g - g_prev).dot(d_prev);
          beta = denom != 0.0 ? (g - g_prev).dot(g) / denom : 0.0;
          break;
        }
      }
    }
    Vector d = t == 1 ? Vector(-g) : Vector(-g + beta * d_prev);
    if (d.dot(g) >= 0.0) {
      // Descent condition violated (possible under inexact rates): restart.
      d = -g;
      beta = 0.0;
    }

    double eta;
    if (const auto* fixed = std::get_if<FixedRate>(&rate)) {
      eta = fixed->eta;
    } else if (std::holds_alternative<ExactRate>(rate)) {
      const auto h = obj.hessian(x);
      if (!h.has_value()) {
        throw NonPositiveCurvature("cg_general: exact rate needs a Hessian");
      }
      const double curv = d.dot(*h * d);
      if (curv <= 1e-14) {
        throw NonPositiveCurvature("cg_general: d^T H d = " +
                                   std::to_string(curv));
      }
      eta = -d.dot(g) / curv;
    } else {
      const auto& cfg = std::get<ArmijoRate>(rate).cfg;
      eta = linesearch::armijo(linesearch::RaySlice{&obj, x, d}, cfg);
    }

    x += eta * d;
    run.gradients.push_back(g);
    run.directions.push_back(d);
    run.betas.push_back(beta);
    run.etas.push_back(eta);
    run.iterates.push_back(x);
    g_prev = g;
    d_prev = d;
  }
  run.terminated_at = static_cast<int>(run.etas.size());
  return run;
}

CgRun pcg_untransformed(const objective::QuadraticForm& q, const Vector& x1,
                        const Preconditioner& m, double tol) {
  linalg::require_symmetric(q.a(), "pcg_untransformed");
  const Index dims = q.dimension();
  CgRun run;
  Vector x = x1;
  run.iterates.push_back(x);
  const double stop = relative_tol(tol, q.gradient(x1));

  double s_prev = 0.0;
  Vector d_prev;
  for (Index t = 1; t <= dims; ++t) {
    const Vector g = q.gradient(x);
    if (g.norm() <= stop) break;
    const Vector y = m.apply_inverse(g);
    const double s = g.dot(y);
    if (s <= 0.0) throw NotSpd("pcg_untransformed: g^T M^{-1} g <= 0");
    const double beta = t == 1 ? 0.0 : s / s_prev;
    const Vector d = t == 1 ? Vector(-y) : Vector(-y + beta * d_prev);
    const double eta = s / curvature_or_throw(q, d);
    x += eta * d;

    run.gradients.push_back(g);
    run.directions.push_back(d);
    run.betas.push_back(beta);
    run.etas.push_back(eta);
    run.iterates.push_back(x);
    s_prev = s;
    d_prev = d;
  }
  run.terminated_at = static_cast<int>(run.etas.size());
  return run;
}

CgRun pcg_transformed(const objective::QuadraticForm& q, const Vector& x1,
                      const Matrix& p, double tol) {
  linalg::require_symmetric(q.a(), "pcg_transformed");
  if (p.rows() != p.cols() || p.rows() != q.dimension()) {
    throw DimensionMismatch("pcg_transformed: P must be d x d");
  }
  Eigen::PartialPivLU<Matrix> lu_p(p);
  Eigen::PartialPivLU<Matrix> lu_pt(Matrix(p.transpose()));
  const double pivot_min = lu_p.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (pivot_min <= 1e-12 * std::max(1.0, p.norm())) {
    throw Singular("pcg_transformed: P pivot " + std::to_string(pivot_min));
  }

  // A_hat = P^{-T} A P^{-1} (symmetrized: the congruence of a symmetric
  // matrix is symmetric, only rounding breaks it), b_hat = P^{-T} b.
  const Matrix w = lu_pt.solve(Matrix(q.a().transpose())).transpose();
  Matrix a_hat = lu_pt.solve(w);
  a_hat = 0.5 * (a_hat + a_hat.transpose());
  const Vector b_hat = lu_pt.solve(q.b());
  const objective::QuadraticForm q_hat(a_hat, b_hat, q.c());

  // Run the practical recurrences on the hat quadratic, but terminate on the
  // original-space gradient so the stopping rule matches the untransformed
  // variant it serves as an oracle for.
  const Index dims = q.dimension();
  CgRun run;
  Vector x_hat = p * x1;
  run.iterates.push_back(lu_p.solve(x_hat));
  const double stop = relative_tol(tol, q.gradient(x1));

  Vector g_prev;
  Vector d_prev;
  for (Index t = 1; t <= dims; ++t) {
    const Vector x_back = lu_p.solve(x_hat);
    if (q.gradient(x_back).norm() <= stop) break;
    const Vector g = q_hat.gradient(x_hat);
    const double beta = t == 1 ? 0.0 : g.dot(g) / g_prev.dot(g_prev);
    const Vector d = t == 1 ? Vector(-g) : Vector(-g + beta * d_prev);
    const double curv = d.dot(q_hat.a() * d);
    if (curv <= 0.0) throw NotSpd("pcg_transformed: d^T A_hat d <= 0");
    const double eta = g.dot(g) / curv;
    x_hat += eta * d;

    run.gradients.push_back(q.gradient(x_back));
    run.directions.push_back(lu_p.solve(d));
    run.betas.push_back(beta);
    run.etas.push_back(eta);
    run.iterates.push_back(lu_p.solve(x_hat));
    g_prev = g;
    d_prev = d;
  }
  run.terminated_at = static_cast<int>(run.etas.size());
  return run;
}

double chebyshev_bound(double kappa, int t) {
  if (kappa < 1.0) throw std::invalid_argument("chebyshev_bound: kappa >= 1");
  if (t < 0) throw std::invalid_argument("chebyshev_bound: t >= 0");
  const double root = std::sqrt(kappa);
  return 2.0 * std::pow((root - 1.0) / (root + 1.0), t);
}

void export_csv(const CgRun& run, const objective::QuadraticForm& q,
                std::ostream& os) {
  const Vector x_star = q.minimizer();
  os << "t,grad_norm,beta,eta,energy_norm\n";
  for (size_t i = 0; i < run.etas.size(); ++i) {
    const Vector e = run.iterates[i] - x_star;
    os << (i + 1) << "," << io::format_double(run.gradients[i].norm()) << ","
       << io::format_double(run.betas[i]) << ","
       << io::format_double(run.etas[i]) << ","
       << io::format_double(linalg::energy_norm(e, q.sym_hessian())) << "\n";
  }
}

}  // namespace descent::cg
