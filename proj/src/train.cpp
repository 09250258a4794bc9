#include <algorithm>
#include <cmath>
#include <numeric>

#include "descent/optimizers.hpp"

namespace descent::optimizers {

namespace {

bool loss_diverged(double loss) {
  return !std::isfinite(loss) || loss > kDivergenceLossThreshold;
}

}  // namespace

TrainTrajectory train(const objective::Objective& obj,
                      const OptimizerSpec& spec,
                      const schedulers::ScheduleSpec& schedule, Vector x1,
                      int steps, bool record_x) {
  if (steps < 1) throw std::invalid_argument("train: steps must be >= 1");
  validate(spec);

  TrainTrajectory traj;
  Vector x = std::move(x1);
  OptimizerState state = OptimizerState::init(spec, x.size());

  for (int t = 1; t <= steps; ++t) {
    const double eta = schedulers::rate_at(schedule, t);
    const Vector point = eval_point(spec, state, x);
    const double loss = obj.value(x);
    const Vector g = obj.gradient(point);

    TrainRecord rec{t, loss, g.norm(), eta, std::nullopt};
    if (record_x) rec.x = x;
    traj.records.push_back(std::move(rec));
    if (loss_diverged(loss)) {
      traj.diverged = true;
      break;
    }

    x += step(spec, state, g, eta);
    if (!x.allFinite()) {
      traj.diverged = true;
      break;
    }
  }
  traj.final_x = std::move(x);
  return traj;
}

Batcher::Batcher(int dataset_size, int batch_size, std::uint64_t seed)
    : dataset_size_(dataset_size), batch_size_(batch_size), rng_(seed) {
  if (dataset_size < 1 || batch_size < 1) {
    throw std::invalid_argument("Batcher: sizes must be >= 1");
  }
  order_.resize(static_cast<size_t>(dataset_size));
  std::iota(order_.begin(), order_.end(), 0);
}

objective::MiniBatch Batcher::next() {
  epoch_start_ = pos_ == 0;
  if (epoch_start_) std::shuffle(order_.begin(), order_.end(), rng_);
  objective::MiniBatch batch;
  const size_t end =
      std::min(pos_ + static_cast<size_t>(batch_size_), order_.size());
  batch.indices.assign(order_.begin() + static_cast<long>(pos_),
                       order_.begin() + static_cast<long>(end));
  pos_ = end == order_.size() ? 0 : end;
  return batch;
}

TrainTrajectory train_mlp(const objective::MlpTask& task,
                          const OptimizerSpec& spec,
                          const schedulers::ScheduleSpec& schedule, Vector w1,
                          int epochs, int batch_size, std::uint64_t seed,
                          bool record_x) {
  if (epochs < 1) throw std::invalid_argument("train_mlp: epochs must be >= 1");
  validate(spec);

  TrainTrajectory traj;
  Vector w = std::move(w1);
  OptimizerState state = OptimizerState::init(spec, w.size());
  Batcher batcher(task.sample_count(), batch_size, seed);
  std::mt19937_64 dropout_rng(seed ^ 0x9e3779b97f4a7c15ULL);

  const int batches_per_epoch =
      (task.sample_count() + batch_size - 1) / batch_size;
  long t = 0;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (int b = 0; b < batches_per_epoch; ++b) {
      const objective::MiniBatch batch = batcher.next();
      if (batcher.last_was_epoch_start()) state.reset_window();
      ++t;

      const double eta = schedulers::rate_at(schedule, t);
      const Vector point = eval_point(spec, state, w);
      auto [loss, g] =
          objective::mlp_loss_and_grad(task, point, batch, true, &dropout_rng);

      TrainRecord rec{t, loss, g.norm(), eta, std::nullopt};
      if (record_x) rec.x = w;
      traj.records.push_back(std::move(rec));
      if (loss_diverged(loss)) {
        traj.diverged = true;
        traj.final_x = std::move(w);
        return traj;
      }

      w += step(spec, state, g, eta);
      if (!w.allFinite()) {
        traj.diverged = true;
        traj.final_x = std::move(w);
        return traj;
      }
    }
  }
  traj.final_x = std::move(w);
  return traj;
}

}  // namespace descent::optimizers
