// Command-line harness wiring objectives, optimizers, schedulers, and solvers
// into reproducible experiments with CSV/JSON artifacts.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "descent/analysis.hpp"
#include "descent/cg.hpp"
#include "descent/io.hpp"
#include "descent/objective.hpp"
#include "descent/optimizers.hpp"
#include "descent/schedulers.hpp"
#include "descent/second_order.hpp"
#include "descent/types.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace descent;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitDiverged = 4;

json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Matrix matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty()) {
    throw ConfigError("matrix literal must be a non-empty array of rows");
  }
  const Index r = static_cast<Index>(rows.size());
  const Index c = static_cast<Index>(rows.at(0).size());
  Matrix a(r, c);
  for (Index i = 0; i < r; ++i) {
    const auto& row = rows.at(static_cast<size_t>(i));
    if (!row.is_array() || static_cast<Index>(row.size()) != c) {
      throw ConfigError("matrix literal has ragged rows");
    }
    for (Index j = 0; j < c; ++j) {
      a(i, j) = row.at(static_cast<size_t>(j)).get<double>();
    }
  }
  return a;
}

Vector vector_from_json(const json& arr) {
  if (!arr.is_array()) throw ConfigError("vector literal must be an array");
  Vector v(static_cast<Index>(arr.size()));
  for (Index i = 0; i < v.size(); ++i) {
    v(i) = arr.at(static_cast<size_t>(i)).get<double>();
  }
  return v;
}

struct ExperimentConfig {
  std::optional<objective::QuadraticForm> quadratic;
  std::optional<objective::MlpTask> task;
  optimizers::OptimizerSpec optimizer;
  schedulers::ScheduleSpec schedule = schedulers::Constant{0.001};
  std::optional<Vector> x1;
  int steps = 0;
  int epochs = 0;
  int batch_size = 32;
  std::uint64_t seed = 0;
  bool record_x = false;
};

void reject_unknown(const json& j, std::set<std::string> allowed,
                    const char* what) {
  for (const auto& item : j.items()) {
    if (!allowed.contains(item.key())) {
      throw ConfigError(std::string(what) + ": unknown key '" + item.key() +
                        "'");
    }
  }
}

ExperimentConfig parse_config(const json& j,
                              std::optional<std::uint64_t> seed_override) {
  reject_unknown(j,
                 {"objective", "optimizer", "schedule", "x1", "steps",
                  "epochs", "batch_size", "seed", "record_x"},
                 "config");
  if (!j.contains("objective") || !j.contains("optimizer") ||
      !j.contains("schedule")) {
    throw ConfigError("config needs 'objective', 'optimizer' and 'schedule'");
  }

  ExperimentConfig cfg;
  const json& obj = j.at("objective");
  if (!obj.contains("type")) throw ConfigError("objective needs a 'type'");
  const std::string type = obj.at("type").get<std::string>();
  if (type == "quadratic") {
    reject_unknown(obj, {"type", "a", "b", "c"}, "objective.quadratic");
    Matrix a = matrix_from_json(obj.at("a"));
    Vector b = obj.contains("b") ? vector_from_json(obj.at("b"))
                                 : Vector(Vector::Zero(a.rows()));
    const double c = obj.contains("c") ? obj.at("c").get<double>() : 0.0;
    cfg.quadratic.emplace(std::move(a), std::move(b), c);
  } else if (type == "synthetic_mlp") {
    reject_unknown(obj,
                   {"type", "num_classes", "per_class", "dim", "seed",
                    "hidden_width", "dropout_rate"},
                   "objective.synthetic_mlp");
    cfg.task = objective::make_synthetic_task(
        obj.at("num_classes").get<int>(), obj.at("per_class").get<int>(),
        obj.at("dim").get<int>(), obj.at("seed").get<std::uint64_t>(),
        obj.contains("hidden_width") ? obj.at("hidden_width").get<int>() : 16,
        obj.contains("dropout_rate") ? obj.at("dropout_rate").get<double>()
                                     : 0.5);
  } else {
    throw ConfigError("unknown objective type '" + type + "'");
  }

  cfg.optimizer = io::optimizer_from_json(j.at("optimizer"));
  cfg.schedule = io::schedule_from_json(j.at("schedule"));
  if (j.contains("x1")) cfg.x1 = vector_from_json(j.at("x1"));
  if (j.contains("steps")) cfg.steps = j.at("steps").get<int>();
  if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<int>();
  if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<int>();
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("record_x")) cfg.record_x = j.at("record_x").get<bool>();
  if (seed_override.has_value()) cfg.seed = *seed_override;

  if (cfg.quadratic.has_value()) {
    if (cfg.steps < 1) throw ConfigError("quadratic runs need 'steps' >= 1");
    if (!cfg.x1.has_value()) throw ConfigError("quadratic runs need 'x1'");
    if (cfg.x1->size() != cfg.quadratic->dimension()) {
      throw ConfigError("x1 length does not match the objective dimension");
    }
  } else {
    if (cfg.epochs < 1) throw ConfigError("mlp runs need 'epochs' >= 1");
    if (cfg.batch_size < 1) throw ConfigError("'batch_size' must be >= 1");
  }
  return cfg;
}

int run_one_experiment(const fs::path& config_path, const fs::path& out_dir,
                       std::optional<std::uint64_t> seed_override) {
  const ExperimentConfig cfg =
      parse_config(load_json_file(config_path), seed_override);
  fs::create_directories(out_dir);

  optimizers::TrainTrajectory traj;
  double final_loss = 0.0;
  if (cfg.quadratic.has_value()) {
    traj = optimizers::train(*cfg.quadratic, cfg.optimizer, cfg.schedule,
                             *cfg.x1, cfg.steps, cfg.record_x);
    final_loss = cfg.quadratic->value(traj.final_x);
  } else {
    Vector w1 = cfg.x1.has_value() ? *cfg.x1 : objective::init_weights(*cfg.task);
    traj = optimizers::train_mlp(*cfg.task, cfg.optimizer, cfg.schedule, w1,
                                 cfg.epochs, cfg.batch_size, cfg.seed,
                                 cfg.record_x);
    final_loss = objective::mlp_loss_and_grad(*cfg.task, traj.final_x,
                                              objective::full_batch(*cfg.task),
                                              /*train_mode=*/false)
                     .first;
  }

  {
    std::ofstream csv(out_dir / "trajectory.csv");
    io::write_trajectory_csv(traj, csv);
  }
  json summary;
  summary["schema"] = 1;
  summary["optimizer"] = optimizers::name_of(cfg.optimizer);
  summary["iterations"] = traj.records.size();
  summary["final_loss"] = final_loss;
  summary["final_grad_norm"] =
      traj.records.empty() ? 0.0 : traj.records.back().grad_norm;
  summary["diverged"] = traj.diverged;
  {
    std::ofstream out(out_dir / "summary.json");
    out << summary.dump(2) << "\n";
  }
  return traj.diverged ? kExitDiverged : kExitOk;
}

int cmd_run(const std::vector<std::string>& configs, const fs::path& out_dir,
            std::optional<std::uint64_t> seed_override, int jobs) {
  if (configs.size() == 1) {
    return run_one_experiment(configs.front(), out_dir, seed_override);
  }
  // Fan-out: each config runs in isolation under out_dir/<stem>.
  std::vector<int> codes(configs.size(), kExitOk);
  std::vector<std::thread> pool;
  std::atomic<size_t> next{0};
  const int workers = std::max(1, jobs);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (size_t i = next.fetch_add(1); i < configs.size();
           i = next.fetch_add(1)) {
        const fs::path cfg_path(configs[i]);
        try {
          codes[i] = run_one_experiment(
              cfg_path, out_dir / cfg_path.stem(), seed_override);
        } catch (const ConfigError&) {
          codes[i] = kExitConfig;
        } catch (const std::exception&) {
          codes[i] = kExitNumerical;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  int worst = kExitOk;
  for (int c : codes) worst = std::max(worst, c);
  return worst;
}

int cmd_schedule(const std::string& spec_text, long t_max,
                 const std::string& out_path) {
  const schedulers::ScheduleSpec spec =
      io::schedule_from_json(json::parse(spec_text, nullptr, true));
  std::ostringstream body;
  body << "t,eta\n";
  for (const auto& [t, eta] : schedulers::schedule_table(spec, t_max)) {
    body << t << "," << io::format_double(eta) << "\n";
  }
  if (out_path.empty()) {
    std::cout << body.str();
  } else {
    std::ofstream out(out_path);
    out << body.str();
  }
  return kExitOk;
}

int cmd_range_test(const fs::path& config_path, double rate_min,
                   double rate_max, int count, int steps,
                   const std::string& out_path,
                   std::optional<std::uint64_t> seed_override) {
  if (rate_min <= 0 || rate_max < rate_min || count < 1) {
    throw ConfigError("range-test needs 0 < rate-min <= rate-max, count >= 1");
  }
  const ExperimentConfig cfg =
      parse_config(load_json_file(config_path), seed_override);

  std::ostringstream body;
  body << "rate,final_loss\n";
  for (int i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
    const double rate =
        rate_min * std::pow(rate_max / rate_min, frac);
    const schedulers::ScheduleSpec constant = schedulers::Constant{rate};

    double loss;
    if (cfg.quadratic.has_value()) {
      auto traj = optimizers::train(*cfg.quadratic, cfg.optimizer, constant,
                                    *cfg.x1, steps);
      loss = traj.diverged ? std::numeric_limits<double>::quiet_NaN()
                           : cfg.quadratic->value(traj.final_x);
    } else {
      const int batches =
          (cfg.task->sample_count() + cfg.batch_size - 1) / cfg.batch_size;
      const int epochs = std::max(1, steps / std::max(1, batches));
      auto traj = optimizers::train_mlp(*cfg.task, cfg.optimizer, constant,
                                        objective::init_weights(*cfg.task),
                                        epochs, cfg.batch_size, cfg.seed);
      loss = traj.diverged
                 ? std::numeric_limits<double>::quiet_NaN()
                 : objective::mlp_loss_and_grad(*cfg.task, traj.final_x,
                                                objective::full_batch(*cfg.task),
                                                false)
                       .first;
    }
    body << io::format_double(rate) << ",";
    if (std::isfinite(loss)) {
      body << io::format_double(loss) << "\n";
    } else {
      body << "diverged\n";
    }
  }
  if (out_path.empty()) {
    std::cout << body.str();
  } else {
    std::ofstream out(out_path);
    out << body.str();
  }
  return kExitOk;
}

int cmd_solve(const fs::path& matrix_path, const std::string& method,
              double tol, const std::string& out_path) {
  std::ifstream in(matrix_path);
  if (!in) throw ConfigError("cannot open " + matrix_path.string());
  auto [a, b] = io::read_matrix_file(in);
  linalg::require_symmetric(a, "solve");
  try {
    linalg::cholesky(a);
  } catch (const NotPositiveDefinite& e) {
    throw NotSpd(std::string("solve: ") + e.what());
  }
  const objective::QuadraticForm q(a, b, 0.0);
  const Vector x1 = Vector::Zero(a.rows());

  int iterations = 0;
  Vector x_final;
  if (method == "newton") {
    x_final = x1 + second_order::newton_step(q, x1);
    iterations = 1;
  } else {
    cg::CgRun run;
    if (method == "cg") {
      run = cg::cg_practical(q, x1, tol);
    } else if (method == "pcg-diag") {
      run = cg::pcg_untransformed(q, x1, cg::Preconditioner::diagonal(a), tol);
    } else if (method == "pcg-perfect") {
      run = cg::pcg_untransformed(q, x1, cg::Preconditioner::perfect(a), tol);
    } else {
      throw ConfigError("unknown method '" + method + "'");
    }
    iterations = run.terminated_at;
    x_final = run.iterates.back();
  }

  json out;
  out["schema"] = 1;
  out["method"] = method;
  out["iterations"] = iterations;
  out["residual_norm"] = q.residual(x_final).norm();
  const std::string text = out.dump(2) + "\n";
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(out_path);
    os << text;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Descent-method experiment harness"};
  app.require_subcommand(1);

  std::vector<std::string> config_paths;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed_override;
  std::uint64_t seed_value = 0;
  int jobs = 1;

  auto* run = app.add_subcommand("run", "Run a training experiment");
  run->add_option("--config", config_paths, "Experiment config JSON")
      ->required();
  run->add_option("--out", out_dir, "Output directory");
  auto* seed_opt = run->add_option("--seed", seed_value, "Seed override");
  run->add_option("--jobs", jobs, "Parallel experiments");

  std::string spec_text;
  long t_max = 100;
  std::string sched_out;
  auto* sched = app.add_subcommand("schedule", "Tabulate a schedule");
  sched->add_option("--spec", spec_text, "Schedule spec JSON")->required();
  sched->add_option("--t-max", t_max, "Last step index");
  sched->add_option("--out", sched_out, "Output CSV path (default stdout)");

  std::string rt_config;
  double rate_min = 1e-4;
  double rate_max = 1.0;
  int rate_count = 20;
  int rt_steps = 100;
  std::string rt_out;
  std::uint64_t rt_seed = 0;
  auto* rt = app.add_subcommand("range-test", "Learning-rate range test");
  rt->add_option("--config", rt_config, "Objective config JSON")->required();
  rt->add_option("--rate-min", rate_min, "Smallest rate");
  rt->add_option("--rate-max", rate_max, "Largest rate");
  rt->add_option("--count", rate_count, "Grid size (log-spaced)");
  rt->add_option("--steps", rt_steps, "Steps per rate");
  rt->add_option("--out", rt_out, "Output CSV path (default stdout)");
  auto* rt_seed_opt = rt->add_option("--seed", rt_seed, "Seed override");

  std::string matrix_path;
  std::string method = "cg";
  double solve_tol = 1e-10;
  std::string solve_out;
  auto* solve = app.add_subcommand("solve", "Solve an SPD system");
  solve->add_option("--matrix", matrix_path, "Matrix file")->required();
  solve->add_option("--method", method, "newton|cg|pcg-diag|pcg-perfect");
  solve->add_option("--tol", solve_tol, "Relative gradient tolerance");
  solve->add_option("--out", solve_out, "Output JSON path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (seed_opt->count() > 0) seed_override = seed_value;
      return cmd_run(config_paths, out_dir, seed_override, jobs);
    }
    if (sched->parsed()) return cmd_schedule(spec_text, t_max, sched_out);
    if (rt->parsed()) {
      if (rt_seed_opt->count() > 0) seed_override = rt_seed;
      return cmd_range_test(rt_config, rate_min, rate_max, rate_count,
                            rt_steps, rt_out, seed_override);
    }
    if (solve->parsed()) {
      return cmd_solve(matrix_path, method, solve_tol, solve_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
