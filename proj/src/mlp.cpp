#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "descent/io.hpp"
#include "descent/objective.hpp"

namespace descent::objective {

namespace {

struct WeightViews {
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>> w1;
  Eigen::Map<const Vector> b1;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>> w2;
  Eigen::Map<const Vector> b2;
};

WeightViews split_weights(const MlpTask& task, const Vector& w) {
  if (w.size() != task.weight_count()) {
    throw DimensionMismatch("mlp weights: got " + std::to_string(w.size()) +
                            ", need " + std::to_string(task.weight_count()));
  }
  const int d = task.input_dim;
  const int h = task.hidden_width;
  const int k = task.num_classes;
  const double* p = w.data();
  return WeightViews{
      {p, h, d}, {p + h * d, h}, {p + h * d + h, k, h}, {p + h * d + h + k * h, k}};
}

Vector softmax(const Vector& z) {
  Vector p = (z.array() - z.maxCoeff()).exp();
  return p / p.sum();
}

}  // namespace

MlpTask make_synthetic_task(int num_classes, int per_class, int dim,
                            std::uint64_t seed, int hidden_width,
                            double dropout_rate) {
  if (num_classes <= 0 || per_class <= 0 || dim <= 0 || hidden_width <= 0) {
    throw std::invalid_argument("make_synthetic_task: all sizes must be > 0");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("make_synthetic_task: dropout_rate in [0,1)");
  }
  MlpTask task;
  task.input_dim = dim;
  task.hidden_width = hidden_width;
  task.num_classes = num_classes;
  task.dropout_rate = dropout_rate;
  task.rng_seed = seed;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (int c = 0; c < num_classes; ++c) {
    Vector center = Vector::Zero(dim);
    center(c % dim) = 4.0 * c;
    for (int s = 0; s < per_class; ++s) {
      Vector x(dim);
      for (int j = 0; j < dim; ++j) x(j) = center(j) + unit(rng);
      task.features.push_back(std::move(x));
      task.labels.push_back(c);
    }
  }
  return task;
}

Vector init_weights(const MlpTask& task) {
  std::mt19937_64 rng(task.rng_seed);
  Vector w(task.weight_count());
  const Index split = static_cast<Index>(task.hidden_width) * task.input_dim +
                      task.hidden_width;
  const double r1 = 1.0 / std::sqrt(static_cast<double>(task.input_dim));
  const double r2 = 1.0 / std::sqrt(static_cast<double>(task.hidden_width));
  std::uniform_real_distribution<double> u1(-r1, r1);
  std::uniform_real_distribution<double> u2(-r2, r2);
  for (Index i = 0; i < w.size(); ++i) w(i) = i < split ? u1(rng) : u2(rng);
  return w;
}

std::pair<double, Vector> mlp_loss_and_grad(const MlpTask& task,
                                            const Vector& weights,
                                            const MiniBatch& batch,
                                            bool train_mode,
                                            std::mt19937_64* rng) {
  if (batch.indices.empty()) throw EmptyBatch("mlp_loss_and_grad");
  const bool dropout = train_mode && task.dropout_rate > 0.0;
  if (dropout && rng == nullptr) {
    throw std::invalid_argument("mlp_loss_and_grad: train mode needs an RNG");
  }
  const WeightViews v = split_weights(task, weights);
  const int h = task.hidden_width;
  const int k = task.num_classes;
  const double keep = 1.0 - task.dropout_rate;

  double loss = 0.0;
  Matrix dw1 = Matrix::Zero(h, task.input_dim);
  Vector db1 = Vector::Zero(h);
  Matrix dw2 = Matrix::Zero(k, h);
  Vector db2 = Vector::Zero(k);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  for (int idx : batch.indices) {
    if (idx < 0 || idx >= task.sample_count()) {
      throw std::out_of_range("mlp_loss_and_grad: batch index " +
                              std::to_string(idx));
    }
    const Vector& x = task.features[static_cast<size_t>(idx)];
    const int label = task.labels[static_cast<size_t>(idx)];

    Vector z1 = v.w1 * x + v.b1;
    Vector a = z1.cwiseMax(0.0);
    Vector mask = Vector::Ones(h);
    if (dropout) {
      // Inverted dropout: scale kept units by 1/keep so eval needs no rescale.
      for (int i = 0; i < h; ++i) mask(i) = uni(*rng) < keep ? 1.0 / keep : 0.0;
      a = a.cwiseProduct(mask);
    }
    Vector p = softmax(v.w2 * a + v.b2);
    loss -= std::log(std::max(p(label), 1e-300));

    Vector dz2 = p;
    dz2(label) -= 1.0;
    dw2 += dz2 * a.transpose();
    db2 += dz2;
    Vector da = v.w2.transpose() * dz2;
    if (dropout) da = da.cwiseProduct(mask);
    Vector dz1 = (z1.array() > 0.0).select(da, 0.0);
    dw1 += dz1 * x.transpose();
    db1 += dz1;
  }

  const double inv = 1.0 / batch.size();
  Vector grad(task.weight_count());
  Index pos = 0;
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < task.input_dim; ++j) grad(pos++) = dw1(i, j) * inv;
  for (int i = 0; i < h; ++i) grad(pos++) = db1(i) * inv;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < h; ++j) grad(pos++) = dw2(i, j) * inv;
  for (int i = 0; i < k; ++i) grad(pos++) = db2(i) * inv;
  return {loss * inv, std::move(grad)};
}

double mlp_accuracy(const MlpTask& task, const Vector& weights,
                    const MiniBatch& batch) {
  if (batch.indices.empty()) throw EmptyBatch("mlp_accuracy");
  const WeightViews v = split_weights(task, weights);
  int hits = 0;
  for (int idx : batch.indices) {
    const Vector& x = task.features[static_cast<size_t>(idx)];
    Vector z2 = v.w2 * (v.w1 * x + v.b1).cwiseMax(0.0) + v.b2;
    Index argmax = 0;
    z2.maxCoeff(&argmax);
    if (argmax == task.labels[static_cast<size_t>(idx)]) ++hits;
  }
  return static_cast<double>(hits) / batch.size();
}

MiniBatch full_batch(const MlpTask& task) {
  MiniBatch b;
  b.indices.resize(static_cast<size_t>(task.sample_count()));
  for (int i = 0; i < task.sample_count(); ++i)
    b.indices[static_cast<size_t>(i)] = i;
  return b;
}

void export_dataset_csv(const MlpTask& task, std::ostream& os) {
  for (int j = 0; j < task.input_dim; ++j) os << "f" << j << ",";
  os << "label\n";
  for (int i = 0; i < task.sample_count(); ++i) {
    const Vector& x = task.features[static_cast<size_t>(i)];
    for (int j = 0; j < task.input_dim; ++j)
      os << io::format_double(x(j)) << ",";
    os << task.labels[static_cast<size_t>(i)] << "\n";
  }
}

void import_dataset_csv(MlpTask& task, std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("dataset csv: empty file");
  int cols = 1 + static_cast<int>(std::count(line.begin(), line.end(), ','));
  const int dim = cols - 1;
  task.features.clear();
  task.labels.clear();
  task.input_dim = dim;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Vector x(dim);
    for (int j = 0; j < dim; ++j) {
      if (!std::getline(ss, cell, ',')) {
        throw ConfigError("dataset csv: short row");
      }
      x(j) = std::stod(cell);
    }
    if (!std::getline(ss, cell, ',')) throw ConfigError("dataset csv: no label");
    task.features.push_back(std::move(x));
    task.labels.push_back(std::stoi(cell));
  }
}

MlpBatchObjective::MlpBatchObjective(const MlpTask& task, MiniBatch batch,
                                     bool train_mode, std::mt19937_64* rng)
    : task_(&task), batch_(std::move(batch)), train_mode_(train_mode),
      rng_(rng) {}

double MlpBatchObjective::value(const Vector& w) const {
  return mlp_loss_and_grad(*task_, w, batch_, train_mode_, rng_).first;
}

Vector MlpBatchObjective::gradient(const Vector& w) const {
  return mlp_loss_and_grad(*task_, w, batch_, train_mode_, rng_).second;
}

}  // namespace descent::objective
