#include "descent/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace descent::linalg {

namespace {

void require_square(const Matrix& a, const char* who) {
  if (a.rows() != a.cols()) {
    throw DimensionMismatch(std::string(who) + ": matrix is " +
                            std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()));
  }
}

double off_diagonal_norm(const Matrix& a) {
  double s = 0.0;
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (i != j) s += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(s);
}

}  // namespace

void require_symmetric(const Matrix& a, const char* who) {
  require_square(a, who);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = i + 1; j < a.cols(); ++j) {
      if (std::abs(a(i, j) - a(j, i)) > kSymmetryTol) {
        throw NonSymmetric(std::string(who) + ": |a(" + std::to_string(i) +
                           "," + std::to_string(j) + ") - a(" +
                           std::to_string(j) + "," + std::to_string(i) +
                           ")| > 1e-12");
      }
    }
  }
}

double inner(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) {
    throw DimensionMismatch("inner: " + std::to_string(u.size()) + " vs " +
                            std::to_string(v.size()));
  }
  return u.dot(v);
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionMismatch("matmul: " + std::to_string(a.cols()) + " vs " +
                            std::to_string(b.rows()));
  }
  return a * b;
}

CholeskyFactor cholesky(const Matrix& a) {
  require_symmetric(a, "cholesky");
  const Index n = a.rows();
  Matrix r = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double pivot = a(j, j);
    for (Index k = 0; k < j; ++k) pivot -= r(k, j) * r(k, j);
    if (pivot <= kCholeskyPivotTol) {
      throw NotPositiveDefinite("cholesky: pivot " + std::to_string(pivot) +
                                " at column " + std::to_string(j));
    }
    r(j, j) = std::sqrt(pivot);
    for (Index i = j + 1; i < n; ++i) {
      double s = a(j, i);
      for (Index k = 0; k < j; ++k) s -= r(k, j) * r(k, i);
      r(j, i) = s / r(j, j);
    }
  }
  return CholeskyFactor{std::move(r)};
}

Vector cholesky_solve(const CholeskyFactor& f, const Vector& rhs) {
  const Matrix& r = f.r;
  if (r.rows() != rhs.size()) {
    throw DimensionMismatch("cholesky_solve: " + std::to_string(r.rows()) +
                            " vs " + std::to_string(rhs.size()));
  }
  Vector y = r.transpose().triangularView<Eigen::Lower>().solve(rhs);
  return r.triangularView<Eigen::Upper>().solve(y);
}

SpectralDecomposition spectral(const Matrix& a) {
  require_symmetric(a, "spectral");
  const Index n = a.rows();
  Matrix d = a;
  Matrix q = Matrix::Identity(n, n);
  const double target = 1e-12 * std::max(a.norm(), 0.0);
  constexpr int kMaxSweeps = 100;

  int sweep = 0;
  while (off_diagonal_norm(d) > target) {
    if (sweep++ >= kMaxSweeps) {
      throw NoConvergence("spectral: off-diagonal norm " +
                          std::to_string(off_diagonal_norm(d)) + " after " +
                          std::to_string(kMaxSweeps) + " sweeps");
    }
    for (Index p = 0; p < n - 1; ++p) {
      for (Index qq = p + 1; qq < n; ++qq) {
        const double apq = d(p, qq);
        if (apq == 0.0) continue;
        // Rotation angle that zeroes d(p,q).
        const double theta = (d(qq, qq) - d(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0)
                             ? 1.0 / (theta + std::sqrt(theta * theta + 1.0))
                             : 1.0 / (theta - std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // d <- J^T d J with J the (p,q) rotation; exploit symmetry.
        for (Index k = 0; k < n; ++k) {
          const double dkp = d(k, p);
          const double dkq = d(k, qq);
          d(k, p) = c * dkp - s * dkq;
          d(k, qq) = s * dkp + c * dkq;
        }
        for (Index k = 0; k < n; ++k) {
          const double dpk = d(p, k);
          const double dqk = d(qq, k);
          d(p, k) = c * dpk - s * dqk;
          d(qq, k) = s * dpk + c * dqk;
        }
        for (Index k = 0; k < n; ++k) {
          const double qkp = q(k, p);
          const double qkq = q(k, qq);
          q(k, p) = c * qkp - s * qkq;
          q(k, qq) = s * qkp + c * qkq;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(),
            [&](Index i, Index j) { return d(i, i) > d(j, j); });

  SpectralDecomposition out;
  out.lambda.resize(n);
  out.q.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    out.lambda(k) = d(order[static_cast<size_t>(k)], order[static_cast<size_t>(k)]);
    out.q.col(k) = q.col(order[static_cast<size_t>(k)]);
    // Sign convention: make the largest-magnitude component nonnegative.
    Index imax = 0;
    out.q.col(k).cwiseAbs().maxCoeff(&imax);
    if (out.q(imax, k) < 0.0) out.q.col(k) = -out.q.col(k);
  }
  return out;
}

Eigenpair2x2 eig2x2(const Matrix& b) {
  if (b.rows() != 2 || b.cols() != 2) {
    throw DimensionMismatch("eig2x2: expected 2x2, got " +
                            std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
  }
  const double tr = b(0, 0) + b(1, 1);
  const double det = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
  const double disc = tr * tr - 4.0 * det;
  Eigenpair2x2 out;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    out.alpha = {(tr + root) / 2.0, 0.0};
    out.beta = {(tr - root) / 2.0, 0.0};
  } else {
    const double imag = std::sqrt(-disc) / 2.0;
    out.alpha = {tr / 2.0, imag};
    out.beta = {tr / 2.0, -imag};
  }
  return out;
}

double condition_number(const Matrix& a) {
  const SpectralDecomposition s = spectral(a);
  const double lmax = s.lambda(0);
  const double lmin = s.lambda(s.lambda.size() - 1);
  if (lmin <= 1e-12 * lmax) {
    throw Singular("condition_number: lambda_min " + std::to_string(lmin));
  }
  return lmax / lmin;
}

double energy_norm(const Vector& e, const Matrix& a) {
  require_symmetric(a, "energy_norm");
  if (e.size() != a.rows()) {
    throw DimensionMismatch("energy_norm: " + std::to_string(e.size()) +
                            " vs " + std::to_string(a.rows()));
  }
  const double q = e.dot(a * e);
  if (q < -1e-12) {
    throw NegativeQuadraticForm("energy_norm: e^T A e = " + std::to_string(q));
  }
  return std::sqrt(std::max(q, 0.0));
}

Matrix matrix_power(const Matrix& a, int m) {
  if (m < 0) throw std::invalid_argument("matrix_power: m must be >= 0");
  const SpectralDecomposition s = spectral(a);
  Vector powered(s.lambda.size());
  for (Index i = 0; i < s.lambda.size(); ++i) {
    powered(i) = std::pow(s.lambda(i), m);
  }
  return s.q * powered.asDiagonal() * s.q.transpose();
}

int spectral_rank(const SpectralDecomposition& s) {
  int rank = 0;
  for (Index i = 0; i < s.lambda.size(); ++i) {
    if (std::abs(s.lambda(i)) > 1e-10) ++rank;
  }
  return rank;
}

}  // namespace descent::linalg
