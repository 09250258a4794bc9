#include "descent/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <set>

namespace descent::io {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, std::set<std::string> allowed,
                         const char* what) {
  allowed.insert("type");
  for (const auto& item : j.items()) {
    if (!allowed.contains(item.key())) {
      throw ConfigError(std::string(what) + ": unknown key '" + item.key() +
                        "'");
    }
  }
}

double num(const json& j, const char* key) {
  if (!j.contains(key)) {
    throw ConfigError(std::string("missing key '") + key + "'");
  }
  if (!j.at(key).is_number()) {
    throw ConfigError(std::string("key '") + key + "' must be a number");
  }
  return j.at(key).get<double>();
}

double num_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? num(j, key) : fallback;
}

long integer(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_integer()) {
    throw ConfigError(std::string("key '") + key + "' must be an integer");
  }
  return j.at(key).get<long>();
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

optimizers::OptimizerSpec optimizer_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ConfigError("optimizer spec needs a string 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  optimizers::OptimizerSpec spec;

  if (type == "sgd") {
    reject_unknown_keys(j, {}, "sgd");
    spec = optimizers::Sgd{};
  } else if (type == "momentum") {
    reject_unknown_keys(j, {"rho"}, "momentum");
    spec = optimizers::Momentum{num_or(j, "rho", 0.9)};
  } else if (type == "nag") {
    reject_unknown_keys(j, {"rho"}, "nag");
    spec = optimizers::Nag{num_or(j, "rho", 0.9)};
  } else if (type == "adagrad") {
    reject_unknown_keys(j, {"eps"}, "adagrad");
    spec = optimizers::AdaGrad{num_or(j, "eps", 1e-8)};
  } else if (type == "rmsprop") {
    reject_unknown_keys(j, {"rho", "eps"}, "rmsprop");
    spec = optimizers::RmsProp{num_or(j, "rho", 0.9), num_or(j, "eps", 1e-6)};
  } else if (type == "rmsprop_nesterov") {
    reject_unknown_keys(j, {"rho", "alpha", "eps"}, "rmsprop_nesterov");
    spec = optimizers::RmsPropNesterov{num_or(j, "rho", 0.9),
                                       num_or(j, "alpha", 0.9),
                                       num_or(j, "eps", 1e-6)};
  } else if (type == "adadelta") {
    reject_unknown_keys(j, {"rho", "eps"}, "adadelta");
    spec = optimizers::AdaDelta{num_or(j, "rho", 0.9), num_or(j, "eps", 1e-6)};
  } else if (type == "adasmooth") {
    reject_unknown_keys(j, {"rho1", "rho2", "eps"}, "adasmooth");
    spec = optimizers::AdaSmooth{num_or(j, "rho1", 0.5),
                                 num_or(j, "rho2", 0.99),
                                 num_or(j, "eps", 1e-6)};
  } else if (type == "adasmooth_delta") {
    reject_unknown_keys(j, {"rho1", "rho2", "eps"}, "adasmooth_delta");
    spec = optimizers::AdaSmoothDelta{num_or(j, "rho1", 0.5),
                                      num_or(j, "rho2", 0.99),
                                      num_or(j, "eps", 1e-6)};
  } else if (type == "adam") {
    reject_unknown_keys(j, {"rho1", "rho2", "eps"}, "adam");
    spec = optimizers::Adam{num_or(j, "rho1", 0.9), num_or(j, "rho2", 0.999),
                            num_or(j, "eps", 1e-8)};
  } else if (type == "adamax") {
    reject_unknown_keys(j, {"rho1", "rho2"}, "adamax");
    spec = optimizers::AdaMax{num_or(j, "rho1", 0.9), num_or(j, "rho2", 0.999)};
  } else if (type == "nadam") {
    reject_unknown_keys(j, {"rho1", "rho2", "eps"}, "nadam");
    spec = optimizers::Nadam{num_or(j, "rho1", 0.9), num_or(j, "rho2", 0.999),
                             num_or(j, "eps", 1e-8)};
  } else if (type == "nadam_prime") {
    reject_unknown_keys(j, {"rho1", "rho2", "eps"}, "nadam_prime");
    spec = optimizers::NadamPrime{num_or(j, "rho1", 0.9),
                                  num_or(j, "rho2", 0.999),
                                  num_or(j, "eps", 1e-8)};
  } else if (type == "noisy_sgd") {
    reject_unknown_keys(j, {"sigma", "seed"}, "noisy_sgd");
    optimizers::NoisySgd noisy;
    noisy.sigma = num_or(j, "sigma", 0.01);
    if (j.contains("seed")) {
      noisy.seed = j.at("seed").get<std::uint64_t>();
    }
    spec = noisy;
  } else {
    throw ConfigError("unknown optimizer type '" + type + "'");
  }

  try {
    optimizers::validate(spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

schedulers::ScheduleSpec schedule_from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw ConfigError("schedule spec needs a string 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  schedulers::ScheduleSpec spec;

  if (type == "step_decay") {
    reject_unknown_keys(j, {"eta0", "d", "n"}, "step_decay");
    spec = schedulers::StepDecay{num(j, "eta0"), num(j, "d"),
                                 static_cast<int>(integer(j, "n"))};
  } else if (type == "multi_step") {
    reject_unknown_keys(j, {"eta0", "d", "milestones"}, "multi_step");
    if (!j.contains("milestones") || !j.at("milestones").is_array()) {
      throw ConfigError("multi_step: 'milestones' must be an array");
    }
    spec = schedulers::MultiStep{num(j, "eta0"), num(j, "d"),
                                 j.at("milestones").get<std::vector<long>>()};
  } else if (type == "exponential") {
    reject_unknown_keys(j, {"eta0", "k"}, "exponential");
    spec = schedulers::Exponential{num(j, "eta0"), num(j, "k")};
  } else if (type == "inverse") {
    reject_unknown_keys(j, {"eta0", "k"}, "inverse");
    spec = schedulers::Inverse{num(j, "eta0"), num(j, "k")};
  } else if (type == "inverse_sqrt") {
    reject_unknown_keys(j, {"eta0", "w"}, "inverse_sqrt");
    spec = schedulers::InverseSqrt{num(j, "eta0"), integer(j, "w")};
  } else if (type == "annealing_poly") {
    reject_unknown_keys(j, {"eta0", "etaT", "m", "p"}, "annealing_poly");
    spec = schedulers::AnnealingPoly{num_or(j, "eta0", 0.001),
                                     num_or(j, "etaT", 1e-10), integer(j, "m"),
                                     num_or(j, "p", 2.0)};
  } else if (type == "stlr") {
    reject_unknown_keys(j, {"eta_max", "total", "frac", "ratio"}, "stlr");
    spec = schedulers::Stlr{num_or(j, "eta_max", 0.01), integer(j, "total"),
                            num_or(j, "frac", 0.1), num_or(j, "ratio", 32.0)};
  } else if (type == "noam") {
    reject_unknown_keys(j, {"alpha", "d_model", "w"}, "noam");
    spec = schedulers::Noam{num(j, "alpha"), integer(j, "d_model"),
                            integer(j, "w")};
  } else if (type == "warmup_noam") {
    reject_unknown_keys(j, {"alpha", "w"}, "warmup_noam");
    spec = schedulers::WarmupNoam{num(j, "alpha"), integer(j, "w")};
  } else if (type == "triangular") {
    reject_unknown_keys(j, {"eta0", "eta_max", "s"}, "triangular");
    spec = schedulers::Triangular{num(j, "eta0"), num(j, "eta_max"),
                                  integer(j, "s")};
  } else if (type == "triangular2") {
    reject_unknown_keys(j, {"eta0", "eta_max", "s"}, "triangular2");
    spec = schedulers::Triangular2{num(j, "eta0"), num(j, "eta_max"),
                                   integer(j, "s")};
  } else if (type == "exp_range") {
    reject_unknown_keys(j, {"eta0", "eta_max", "s", "gamma"}, "exp_range");
    spec = schedulers::ExpRange{num(j, "eta0"), num(j, "eta_max"),
                                integer(j, "s"), num(j, "gamma")};
  } else if (type == "cyclical_cosine") {
    reject_unknown_keys(j, {"eta0", "total", "m"}, "cyclical_cosine");
    spec = schedulers::CyclicalCosine{num(j, "eta0"), integer(j, "total"),
                                      integer(j, "m")};
  } else if (type == "cyclical_step") {
    reject_unknown_keys(j, {"eta_min", "eta_max", "m"}, "cyclical_step");
    spec = schedulers::CyclicalStep{num(j, "eta_min"), num(j, "eta_max"),
                                    integer(j, "m")};
  } else if (type == "cyclical_poly") {
    reject_unknown_keys(j, {"eta0", "etaT", "m", "p"}, "cyclical_poly");
    spec = schedulers::CyclicalPoly{num(j, "eta0"), num(j, "etaT"),
                                    integer(j, "m"), num_or(j, "p", 2.0)};
  } else if (type == "constant") {
    reject_unknown_keys(j, {"eta"}, "constant");
    spec = schedulers::Constant{num(j, "eta")};
  } else {
    throw ConfigError("unknown schedule type '" + type + "'");
  }

  try {
    schedulers::validate(spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

void write_trajectory_csv(const optimizers::TrainTrajectory& traj,
                          std::ostream& os) {
  const bool with_x =
      !traj.records.empty() && traj.records.front().x.has_value();
  os << "t,loss,grad_norm,eta";
  if (with_x) {
    for (Index i = 0; i < traj.records.front().x->size(); ++i) {
      os << ",x_" << i;
    }
  }
  os << "\n";
  for (const auto& rec : traj.records) {
    os << rec.t << "," << format_double(rec.loss) << ","
       << format_double(rec.grad_norm) << "," << format_double(rec.eta);
    if (with_x) {
      for (Index i = 0; i < rec.x->size(); ++i) {
        os << "," << format_double((*rec.x)(i));
      }
    }
    os << "\n";
  }
}

std::pair<Matrix, Vector> read_matrix_file(std::istream& is) {
  Index d = 0;
  if (!(is >> d) || d < 1) {
    throw ConfigError("matrix file: first token must be the dimension");
  }
  Matrix a(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      if (!(is >> a(i, j))) {
        throw ConfigError("matrix file: short row " + std::to_string(i));
      }
    }
  }
  Vector b = Vector::Ones(d);
  double first;
  if (is >> first) {
    b(0) = first;
    for (Index j = 1; j < d; ++j) {
      if (!(is >> b(j))) {
        throw ConfigError("matrix file: right-hand side row is short");
      }
    }
  }
  return {std::move(a), std::move(b)};
}

}  // namespace descent::io
