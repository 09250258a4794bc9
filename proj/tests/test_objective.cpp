#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "descent/objective.hpp"

using namespace descent;
using namespace descent::objective;

namespace {

// Independent value oracle: elementwise double loop, no matrix ops.
double quad_value_bruteforce(const Matrix& a, const Vector& b, double c,
                             const Vector& x) {
  double acc = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) acc += 0.5 * x(i) * a(i, j) * x(j);
  for (Index i = 0; i < b.size(); ++i) acc -= b(i) * x(i);
  return acc + c;
}

Vector central_difference_gradient(const Objective& obj, const Vector& x,
                                   double h) {
  Vector g(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    Vector hi = x, lo = x;
    hi(i) += h;
    lo(i) -= h;
    g(i) = (obj.value(hi) - obj.value(lo)) / (2.0 * h);
  }
  return g;
}

QuadraticForm random_spd_quadratic(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = n(rng);
  Matrix a = g.transpose() * g + 0.1 * Matrix::Identity(d, d);
  Vector b(d);
  for (int i = 0; i < d; ++i) b(i) = n(rng);
  return QuadraticForm(std::move(a), std::move(b), n(rng));
}

}  // namespace

TEST_CASE("quadratic value") {
  Matrix a(2, 2);
  a << 20, 7, 5, 5;
  const QuadraticForm q(a, Vector::Zero(2), 0.0);
  const Vector x{{-3, 3.5}};
  CHECK(q.value(x) ==
        doctest::Approx(quad_value_bruteforce(a, Vector::Zero(2), 0.0, x))
            .epsilon(1e-14));

  const QuadraticForm with_c(a, Vector{{1, 2}}, 3.25);
  CHECK(with_c.value(Vector::Zero(2)) == 3.25);

  const QuadraticForm iso(Matrix::Identity(3, 3), Vector::Zero(3), 0.0);
  const Vector y{{1, -2, 2}};
  CHECK(iso.value(y) == doctest::Approx(0.5 * y.squaredNorm()));

  CHECK_THROWS_AS(q.value(Vector::Zero(3)), DimensionMismatch);
}

TEST_CASE("quadratic gradient uses the symmetrized matrix") {
  Matrix a(2, 2);
  a << 20, 7, 5, 5;
  const QuadraticForm q(a, Vector::Zero(2), 0.0);
  const Vector g = q.gradient(Vector{{-3, 3.5}});
  CHECK(g(0) == doctest::Approx(-39.0));
  CHECK(g(1) == doctest::Approx(-0.5));

  // First-order optimality at the minimizer.
  const QuadraticForm diag(Vector{{4, 40}}.asDiagonal(), Vector{{12, 80}},
                           103.0);
  const Vector x_star = diag.minimizer();
  CHECK(x_star(0) == doctest::Approx(3.0));
  CHECK(x_star(1) == doctest::Approx(2.0));
  CHECK(diag.gradient(Vector{{3, 2}}).norm() == 0.0);
}

TEST_CASE("quadratic minimizer") {
  const QuadraticForm zero_b(Vector{{4, 40}}.asDiagonal(), Vector::Zero(2),
                             0.0);
  CHECK(zero_b.minimizer().norm() == 0.0);

  Matrix a(2, 2);
  a << 20, 5, 5, 5;
  const QuadraticForm q(a, Vector{{1, 1}}, 0.0);
  const Vector x_star = q.minimizer();
  CHECK(x_star(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(x_star(1) == doctest::Approx(0.2));

  const QuadraticForm singular(Vector{{1, 0}}.asDiagonal(), Vector{{1, 1}},
                               0.0);
  CHECK_THROWS_AS(singular.minimizer(), Singular);
}

TEST_CASE("residual") {
  Matrix a(2, 2);
  a << 20, 5, 5, 5;
  const QuadraticForm q(a, Vector::Zero(2), 0.0);
  const Vector r = q.residual(Vector{{-1, 2}});
  CHECK(r(0) == doctest::Approx(10.0));
  CHECK(r(1) == doctest::Approx(-5.0));

  const QuadraticForm diag(Vector{{4, 40}}.asDiagonal(), Vector{{12, 80}},
                           0.0);
  CHECK(diag.residual(diag.minimizer()).norm() <= 1e-12);
  // Equals the negative gradient for symmetric A.
  CHECK((q.residual(Vector{{-1, 2}}) + q.gradient(Vector{{-1, 2}})).norm() <=
        1e-14);
}

TEST_CASE("quadratic invariants on random SPD instances") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int trial = 0; trial < 30; ++trial) {
    const QuadraticForm q = random_spd_quadratic(dim(rng), rng);
    CHECK(q.gradient(q.minimizer()).norm() <= 1e-10);

    std::normal_distribution<double> n(0.0, 2.0);
    Vector x(q.dimension());
    for (Index i = 0; i < x.size(); ++i) x(i) = n(rng);

    const Vector fd = central_difference_gradient(q, x, 1e-6);
    const Vector g = q.gradient(x);
    CHECK((fd - g).norm() <= 1e-6 * std::max(1.0, g.norm()));

    // Descent condition along the negative gradient.
    if (g.norm() > 1e-6) CHECK(q.value(x - 1e-6 * g) < q.value(x));
  }
}

TEST_CASE("project_l2_ball") {
  const Vector inside{{1.0, 1.0}};
  CHECK((project_l2_ball(inside, 4.0) - inside).norm() == 0.0);

  const Vector boundary{{3.0, 4.0}};
  CHECK((project_l2_ball(boundary, 25.0) - boundary).norm() == 0.0);

  const Vector scaled = project_l2_ball(boundary, 1.0);
  CHECK(scaled(0) == doctest::Approx(0.6));
  CHECK(scaled(1) == doctest::Approx(0.8));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    Vector x(4);
    for (Index i = 0; i < 4; ++i) x(i) = n(rng);
    const Vector p = project_l2_ball(x, 2.0);
    CHECK(p.norm() <= x.norm() + 1e-15);
    CHECK((project_l2_ball(p, 2.0) - p).norm() <= 1e-15);
    CHECK(p.squaredNorm() <= 2.0 + 1e-12);
  }
}

TEST_CASE("synthetic task construction") {
  const MlpTask t1 = make_synthetic_task(2, 50, 2, 7);
  const MlpTask t2 = make_synthetic_task(2, 50, 2, 7);
  REQUIRE(t1.sample_count() == 100);
  for (int i = 0; i < 100; ++i) {
    CHECK(t1.labels[i] == t2.labels[i]);
    CHECK((t1.features[i] - t2.features[i]).norm() == 0.0);
  }
  CHECK(std::count(t1.labels.begin(), t1.labels.end(), 0) == 50);
  CHECK(std::count(t1.labels.begin(), t1.labels.end(), 1) == 50);

  const MlpTask other = make_synthetic_task(2, 50, 2, 8);
  CHECK((t1.features[0] - other.features[0]).norm() > 0.0);
}

TEST_CASE("synthetic task is linearly separable") {
  const MlpTask task = make_synthetic_task(2, 50, 2, 7);
  // Multinomial logistic fit by plain gradient descent.
  const int k = task.num_classes;
  const int d = task.input_dim;
  Matrix w = Matrix::Zero(k, d);
  Vector b = Vector::Zero(k);
  for (int it = 0; it < 2000; ++it) {
    Matrix gw = Matrix::Zero(k, d);
    Vector gb = Vector::Zero(k);
    for (int i = 0; i < task.sample_count(); ++i) {
      Vector z = w * task.features[i] + b;
      Vector p = (z.array() - z.maxCoeff()).exp();
      p /= p.sum();
      p(task.labels[i]) -= 1.0;
      gw += p * task.features[i].transpose();
      gb += p;
    }
    w -= 0.05 / task.sample_count() * gw;
    b -= 0.05 / task.sample_count() * gb;
  }
  int hits = 0;
  for (int i = 0; i < task.sample_count(); ++i) {
    Index arg = 0;
    (w * task.features[i] + b).maxCoeff(&arg);
    hits += arg == task.labels[i];
  }
  CHECK(hits >= 95);
}

TEST_CASE("mlp loss and gradient") {
  const MlpTask task = make_synthetic_task(3, 10, 2, 11, /*hidden_width=*/8);
  const MiniBatch batch = full_batch(task);

  SUBCASE("zero weights give the uniform-softmax loss") {
    const Vector w = Vector::Zero(task.weight_count());
    const auto [loss, grad] = mlp_loss_and_grad(task, w, batch, false);
    CHECK(loss == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(grad.size() == task.weight_count());
  }

  SUBCASE("duplicating every sample leaves the mean unchanged") {
    const Vector w = init_weights(task);
    MiniBatch doubled = batch;
    doubled.indices.insert(doubled.indices.end(), batch.indices.begin(),
                           batch.indices.end());
    const auto [l1, g1] = mlp_loss_and_grad(task, w, batch, false);
    const auto [l2, g2] = mlp_loss_and_grad(task, w, doubled, false);
    CHECK(l1 == doctest::Approx(l2).epsilon(1e-14));
    CHECK((g1 - g2).norm() <= 1e-14 * std::max(1.0, g1.norm()));
  }

  SUBCASE("backprop against central finite differences") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n(0.0, 0.4);
    MlpBatchObjective obj(task, batch, /*train_mode=*/false, nullptr);
    int checked = 0;
    while (checked < 10) {
      Vector w(task.weight_count());
      for (Index i = 0; i < w.size(); ++i) w(i) = n(rng);
      // Skip draws that park a ReLU pre-activation on the kink, where the
      // finite-difference oracle itself is invalid.
      bool near_kink = false;
      const int h = task.hidden_width;
      for (int s = 0; s < task.sample_count() && !near_kink; ++s) {
        for (int unit = 0; unit < h; ++unit) {
          double z = w(static_cast<Index>(h) * task.input_dim + unit);
          for (int j = 0; j < task.input_dim; ++j) {
            z += w(static_cast<Index>(unit) * task.input_dim + j) *
                 task.features[s](j);
          }
          if (std::abs(z) < 1e-4) {
            near_kink = true;
            break;
          }
        }
      }
      if (near_kink) continue;
      ++checked;
      const Vector fd = central_difference_gradient(obj, w, 1e-5);
      const Vector g = obj.gradient(w);
      CHECK((fd - g).norm() <= 1e-5 * std::max(1.0, g.norm()));
    }
  }

  SUBCASE("empty batch rejected") {
    CHECK_THROWS_AS(
        mlp_loss_and_grad(task, Vector::Zero(task.weight_count()), MiniBatch{},
                          false),
        EmptyBatch);
  }

  SUBCASE("train mode needs an RNG for dropout") {
    CHECK_THROWS_AS(mlp_loss_and_grad(task, Vector::Zero(task.weight_count()),
                                      batch, true, nullptr),
                    std::invalid_argument);
  }

  SUBCASE("dropout only fires in train mode") {
    const Vector w = init_weights(task);
    std::mt19937_64 rng(5);
    const auto [ltrain, gtrain] = mlp_loss_and_grad(task, w, batch, true, &rng);
    const auto [leval, geval] = mlp_loss_and_grad(task, w, batch, false);
    CHECK(ltrain != leval);  // some unit almost surely dropped
    CHECK(std::isfinite(ltrain));
    CHECK(gtrain.size() == geval.size());
  }
}

TEST_CASE("dataset csv round-trip") {
  const MlpTask task = make_synthetic_task(2, 5, 3, 9);
  std::stringstream ss;
  export_dataset_csv(task, ss);

  MlpTask loaded = task;
  loaded.features.clear();
  loaded.labels.clear();
  import_dataset_csv(loaded, ss);
  REQUIRE(loaded.sample_count() == task.sample_count());
  CHECK(loaded.input_dim == task.input_dim);
  for (int i = 0; i < task.sample_count(); ++i) {
    CHECK(loaded.labels[i] == task.labels[i]);
    CHECK((loaded.features[i] - task.features[i]).norm() == 0.0);
  }
}
