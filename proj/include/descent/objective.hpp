#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <vector>

#include "descent/linalg.hpp"
#include "descent/types.hpp"

namespace descent::objective {

// Differentiable scalar objective. Implementations must keep gradient
// consistent with value (checked by finite differences in the tests).
class Objective {
 public:
  virtual ~Objective() = default;
  virtual Index dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual std::optional<Matrix> hessian(const Vector& /*x*/) const {
    return std::nullopt;
  }
};

// L(x) = 1/2 x^T A x - b^T x + c, with the symmetrized Hessian cached.
// A need not be symmetric; the gradient uses 1/2 (A^T + A).
class QuadraticForm : public Objective {
 public:
  QuadraticForm(Matrix a, Vector b, double c);

  Index dimension() const override { return b_.size(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  std::optional<Matrix> hessian(const Vector& /*x*/) const override {
    return sym_h_;
  }

  // Solves 1/2 (A^T + A) x = b via Cholesky; throws Singular when not PD.
  Vector minimizer() const;

  // b - A x; the negative gradient when A is symmetric.
  Vector residual(const Vector& x) const;

  const Matrix& a() const { return a_; }
  const Vector& b() const { return b_; }
  double c() const { return c_; }
  const Matrix& sym_hessian() const { return sym_h_; }

 private:
  Matrix a_;
  Vector b_;
  double c_;
  Matrix sym_h_;
};

// Unique positions into a dataset.
struct MiniBatch {
  std::vector<int> indices;
  int size() const { return static_cast<int>(indices.size()); }
};

// input -> hidden (ReLU) -> dropout -> softmax, weights in one flat vector
// (row-major W1, b1, W2, b2) so optimizers stay dimension-agnostic.
struct MlpTask {
  int input_dim = 0;
  int hidden_width = 16;
  int num_classes = 2;
  double dropout_rate = 0.5;
  std::vector<Vector> features;
  std::vector<int> labels;
  std::uint64_t rng_seed = 0;

  Index weight_count() const {
    return static_cast<Index>(hidden_width) * input_dim + hidden_width +
           static_cast<Index>(num_classes) * hidden_width + num_classes;
  }
  int sample_count() const { return static_cast<int>(features.size()); }
};

// Gaussian class blobs, unit within-class variance, centers 4 apart,
// deterministic for a fixed seed.
MlpTask make_synthetic_task(int num_classes, int per_class, int dim,
                            std::uint64_t seed, int hidden_width = 16,
                            double dropout_rate = 0.5);

// Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] init drawn from the task RNG.
Vector init_weights(const MlpTask& task);

// Mean cross-entropy over the batch and the exact backpropagated gradient.
// Dropout mask is applied only in train mode and drawn from `rng`.
std::pair<double, Vector> mlp_loss_and_grad(const MlpTask& task,
                                            const Vector& weights,
                                            const MiniBatch& batch,
                                            bool train_mode,
                                            std::mt19937_64* rng = nullptr);

// Fraction of batch samples whose argmax softmax matches the label.
double mlp_accuracy(const MlpTask& task, const Vector& weights,
                    const MiniBatch& batch);

MiniBatch full_batch(const MlpTask& task);

// x unchanged when x^T x <= cap, else scaled back to the radius-sqrt(cap) ball.
Vector project_l2_ball(const Vector& x, double cap);

// CSV with feature columns then an integer label column.
void export_dataset_csv(const MlpTask& task, std::ostream& os);
void import_dataset_csv(MlpTask& task, std::istream& is);

// Objective view of an MlpTask bound to a mutable current batch; the training
// loop swaps batches in and owns the dropout RNG.
class MlpBatchObjective : public Objective {
 public:
  MlpBatchObjective(const MlpTask& task, MiniBatch batch, bool train_mode,
                    std::mt19937_64* rng);

  Index dimension() const override { return task_->weight_count(); }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;

  void set_batch(MiniBatch batch) { batch_ = std::move(batch); }

 private:
  const MlpTask* task_;
  MiniBatch batch_;
  bool train_mode_;
  std::mt19937_64* rng_;
};

}  // namespace descent::objective
