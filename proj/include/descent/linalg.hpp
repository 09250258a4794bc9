#pragma once

#include <complex>

#include "descent/types.hpp"

namespace descent::linalg {

// Orthonormal eigenbasis of a symmetric matrix, eigenvalues sorted descending.
// Invariants: ||Q^T Q - I||_F <= 1e-10 and ||Q L Q^T - A||_F <= 1e-10 ||A||_F.
struct SpectralDecomposition {
  Matrix q;
  Vector lambda;
};

// Upper-triangular R with R^T R = A and strictly positive diagonal.
struct CholeskyFactor {
  Matrix r;
};

// Eigenvalues of a real 2x2 matrix; complex pair allowed.
struct Eigenpair2x2 {
  std::complex<double> alpha;
  std::complex<double> beta;
};

inline constexpr double kSymmetryTol = 1e-12;      // max |a_ij - a_ji|
inline constexpr double kCholeskyPivotTol = 1e-14;

// Inner product, 2n-1 flops.
double inner(const Vector& u, const Vector& v);

// Dense product, mk(2n-1) flops for (m x n) * (n x k).
Matrix matmul(const Matrix& a, const Matrix& b);

// Upper Cholesky factor of a symmetric positive definite matrix.
// Throws NotPositiveDefinite when a pivot falls below kCholeskyPivotTol.
CholeskyFactor cholesky(const Matrix& a);

// Solves (R^T R) x = rhs by two triangular solves.
Vector cholesky_solve(const CholeskyFactor& f, const Vector& rhs);

// Cyclic Jacobi eigensolver for symmetric matrices. Stops when the
// off-diagonal Frobenius norm drops below 1e-12 * ||A||_F; at most 100 sweeps.
// Eigenvector sign convention: largest-magnitude component nonnegative.
SpectralDecomposition spectral(const Matrix& a);

// Quadratic-formula eigenvalues of a 2x2 matrix.
Eigenpair2x2 eig2x2(const Matrix& b);

// lambda_max / lambda_min of a symmetric PD matrix.
// Throws Singular when lambda_min <= 1e-12 * lambda_max.
double condition_number(const Matrix& a);

// sqrt(e^T A e). Throws NegativeQuadraticForm when e^T A e < -1e-12.
double energy_norm(const Vector& e, const Matrix& a);

// Q Lambda^m Q^T for symmetric a and m >= 0.
Matrix matrix_power(const Matrix& a, int m);

// Number of eigenvalues with |lambda| > 1e-10 (rank of a symmetric matrix).
int spectral_rank(const SpectralDecomposition& s);

void require_symmetric(const Matrix& a, const char* who);

}  // namespace descent::linalg
