#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <variant>
#include <vector>

#include "descent/objective.hpp"
#include "descent/schedulers.hpp"
#include "descent/types.hpp"

namespace descent::optimizers {

struct Sgd {};
struct Momentum {
  double rho = 0.9;
};
struct Nag {
  double rho = 0.9;
};
struct AdaGrad {
  double eps = 1e-8;
};
struct RmsProp {
  double rho = 0.9;
  double eps = 1e-6;
};
struct RmsPropNesterov {
  double rho = 0.9;
  double alpha = 0.9;
  double eps = 1e-6;
};
struct AdaDelta {
  double rho = 0.9;
  double eps = 1e-6;
};
struct AdaSmooth {
  double rho1 = 0.5;
  double rho2 = 0.99;
  double eps = 1e-6;
};
struct AdaSmoothDelta {
  double rho1 = 0.5;
  double rho2 = 0.99;
  double eps = 1e-6;
};
struct Adam {
  double rho1 = 0.9;
  double rho2 = 0.999;
  double eps = 1e-8;
};
struct AdaMax {
  double rho1 = 0.9;
  double rho2 = 0.999;
};
struct Nadam {
  double rho1 = 0.9;
  double rho2 = 0.999;
  double eps = 1e-8;
};
struct NadamPrime {
  double rho1 = 0.9;
  double rho2 = 0.999;
  double eps = 1e-8;
};
struct NoisySgd {
  double sigma = 0.01;
  std::uint64_t seed = 0;
};

using OptimizerSpec =
    std::variant<Sgd, Momentum, Nag, AdaGrad, RmsProp, RmsPropNesterov,
                 AdaDelta, AdaSmooth, AdaSmoothDelta, Adam, AdaMax, Nadam,
                 NadamPrime, NoisySgd>;

// Throws std::invalid_argument on out-of-range constants
// (rho in [0,1); rho1 < rho2 for the AdaSmooth family; eps > 0; sigma >= 0).
void validate(const OptimizerSpec& spec);

const char* name_of(const OptimizerSpec& spec);

// Per-dimension accumulators, all zero-initialized. The ER window counters
// back AdaSmooth's scaled smoothing constant.
struct OptimizerState {
  Vector prev_delta;       // dx_{t-1}
  Vector accum_sq;         // E[g^2] or running sum of g^2
  Vector accum_dx_sq;      // E[dx^2]
  Vector first_moment;     // m_t
  Vector inf_norm;         // u_t
  Vector er_signal_accum;  // sum of dx within the window
  Vector er_noise_accum;   // sum of |dx| within the window
  long step_count = 0;
  int window_len = 0;      // steps recorded in the current ER window
  int window_cap = 64;     // non-epoch runs restart the window at the cap
  std::mt19937_64 rng;     // noisy-gradient draws

  static OptimizerState init(const OptimizerSpec& spec, Index dim,
                             int window_cap = 64);
  void reset_window();
};

// Point where the gradient must be evaluated: x itself for every rule except
// the Nesterov pair, which look ahead to x + rho * prev_delta.
Vector eval_point(const OptimizerSpec& spec, const OptimizerState& state,
                  const Vector& x);

// One update: returns delta_x and advances the state (prev_delta, moments,
// ER window). g must be the gradient at eval_point(spec, state, x).
Vector step(const OptimizerSpec& spec, OptimizerState& state, const Vector& g,
            double eta);

// Entrywise |sum dx| / sum |dx| over the current window; 0 where nothing moved.
Vector effective_ratio(const OptimizerState& state);

// c = (rho2 - rho1) e + (1 - rho2), entrywise in [1-rho2, 1-rho1].
Vector scaled_smoothing(double rho1, double rho2, const Vector& e);

struct TrainRecord {
  long t;
  double loss;
  double grad_norm;
  double eta;
  std::optional<Vector> x;
};

struct TrainTrajectory {
  std::vector<TrainRecord> records;
  bool diverged = false;
  Vector final_x;

  double final_loss() const {
    return records.empty() ? 0.0 : records.back().loss;
  }
};

inline constexpr double kDivergenceLossThreshold = 1e12;

// Deterministic full-gradient loop: x_{t+1} = x_t + step(...), t = 1..steps,
// learning rate rate_at(schedule, t). Halts early with the diverged flag on a
// non-finite or > 1e12 loss.
TrainTrajectory train(const objective::Objective& obj,
                      const OptimizerSpec& spec,
                      const schedulers::ScheduleSpec& schedule, Vector x1,
                      int steps, bool record_x = false);

// Mini-batch loop over a synthetic task: seeded shuffling batcher, dropout in
// train mode, ER window reset at each epoch start (window = batch index).
TrainTrajectory train_mlp(const objective::MlpTask& task,
                          const OptimizerSpec& spec,
                          const schedulers::ScheduleSpec& schedule, Vector w1,
                          int epochs, int batch_size, std::uint64_t seed,
                          bool record_x = false);

// Seeded epoch shuffler producing consecutive mini-batches.
class Batcher {
 public:
  Batcher(int dataset_size, int batch_size, std::uint64_t seed);

  objective::MiniBatch next();
  bool last_was_epoch_start() const { return epoch_start_; }

 private:
  int dataset_size_;
  int batch_size_;
  std::vector<int> order_;
  size_t pos_ = 0;
  bool epoch_start_ = false;
  std::mt19937_64 rng_;
};

}  // namespace descent::optimizers
