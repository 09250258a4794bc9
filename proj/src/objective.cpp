#include "descent/objective.hpp"

#include <cmath>

namespace descent::objective {

QuadraticForm::QuadraticForm(Matrix a, Vector b, double c)
    : a_(std::move(a)), b_(std::move(b)), c_(c) {
  if (a_.rows() != a_.cols() || a_.rows() != b_.size()) {
    throw DimensionMismatch("QuadraticForm: A is " + std::to_string(a_.rows()) +
                            "x" + std::to_string(a_.cols()) + ", b has " +
                            std::to_string(b_.size()));
  }
  sym_h_ = 0.5 * (a_.transpose() + a_);
}

double QuadraticForm::value(const Vector& x) const {
  if (x.size() != b_.size()) {
    throw DimensionMismatch("QuadraticForm::value: x has " +
                            std::to_string(x.size()));
  }
  return 0.5 * x.dot(a_ * x) - b_.dot(x) + c_;
}

Vector QuadraticForm::gradient(const Vector& x) const {
  if (x.size() != b_.size()) {
    throw DimensionMismatch("QuadraticForm::gradient: x has " +
                            std::to_string(x.size()));
  }
  return sym_h_ * x - b_;
}

Vector QuadraticForm::minimizer() const {
  try {
    return linalg::cholesky_solve(linalg::cholesky(sym_h_), b_);
  } catch (const NotPositiveDefinite& e) {
    throw Singular(std::string("QuadraticForm::minimizer: ") + e.what());
  }
}

Vector QuadraticForm::residual(const Vector& x) const { return b_ - a_ * x; }

Vector project_l2_ball(const Vector& x, double cap) {
  if (cap <= 0.0) throw std::invalid_argument("project_l2_ball: cap <= 0");
  const double sq = x.squaredNorm();
  if (sq <= cap) return x;
  return x * std::sqrt(cap / sq);
}

}  // namespace descent::objective
