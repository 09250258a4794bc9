#pragma once

#include <iosfwd>
#include <string>
#include <utility>

#include <json.hpp>

#include "descent/optimizers.hpp"
#include "descent/schedulers.hpp"
#include "descent/types.hpp"

namespace descent::io {

// Shortest round-trippable decimal form; stable across runs.
std::string format_double(double v);

// Tagged-union JSON for optimizers, e.g. {"type":"adam","rho1":0.9,...}.
// Unknown keys and unknown types are rejected.
optimizers::OptimizerSpec optimizer_from_json(const nlohmann::json& j);

// Tagged-union JSON for schedules, e.g. {"type":"step_decay","eta0":0.1,...}.
schedulers::ScheduleSpec schedule_from_json(const nlohmann::json& j);

// Header t,loss,grad_norm,eta; per-dimension x columns when present.
void write_trajectory_csv(const optimizers::TrainTrajectory& traj,
                          std::ostream& os);

// First line d, then d whitespace-separated rows; one optional extra row is
// read as the right-hand side b (defaults to ones).
std::pair<Matrix, Vector> read_matrix_file(std::istream& is);

}  // namespace descent::io
