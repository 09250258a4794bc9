#include "descent/optimizers.hpp"

#include <cmath>

namespace descent::optimizers {

namespace {

void check(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void check_decay(double rho, const char* msg) {
  check(rho >= 0.0 && rho < 1.0, msg);
}

// Plain momentum carries no EMA normalization, so the marginal rho = 1 case
// (spectral radius exactly 1) is a legal, studyable configuration.
void check_momentum(double rho, const char* msg) {
  check(rho >= 0.0 && rho <= 1.0, msg);
}

struct Validator {
  void operator()(const Sgd&) const {}
  void operator()(const Momentum& s) const {
    check_momentum(s.rho, "momentum rho");
  }
  void operator()(const Nag& s) const { check_momentum(s.rho, "nag rho"); }
  void operator()(const AdaGrad& s) const { check(s.eps > 0, "adagrad eps"); }
  void operator()(const RmsProp& s) const {
    check_decay(s.rho, "rmsprop rho");
    check(s.eps > 0, "rmsprop eps");
  }
  void operator()(const RmsPropNesterov& s) const {
    check_decay(s.rho, "rmsprop_nesterov rho");
    check_decay(s.alpha, "rmsprop_nesterov alpha");
    check(s.eps > 0, "rmsprop_nesterov eps");
  }
  void operator()(const AdaDelta& s) const {
    check_decay(s.rho, "adadelta rho");
    check(s.eps > 0, "adadelta eps");
  }
  void operator()(const AdaSmooth& s) const {
    check_decay(s.rho1, "adasmooth rho1");
    check_decay(s.rho2, "adasmooth rho2");
    check(s.rho1 <= s.rho2, "adasmooth needs rho1 <= rho2");
    check(s.eps > 0, "adasmooth eps");
  }
  void operator()(const AdaSmoothDelta& s) const {
    check_decay(s.rho1, "adasmooth_delta rho1");
    check_decay(s.rho2, "adasmooth_delta rho2");
    check(s.rho1 <= s.rho2, "adasmooth_delta needs rho1 <= rho2");
    check(s.eps > 0, "adasmooth_delta eps");
  }
  void operator()(const Adam& s) const {
    check_decay(s.rho1, "adam rho1");
    check_decay(s.rho2, "adam rho2");
    check(s.eps > 0, "adam eps");
  }
  void operator()(const AdaMax& s) const {
    check_decay(s.rho1, "adamax rho1");
    check_decay(s.rho2, "adamax rho2");
  }
  void operator()(const Nadam& s) const {
    check_decay(s.rho1, "nadam rho1");
    check_decay(s.rho2, "nadam rho2");
    check(s.eps > 0, "nadam eps");
  }
  void operator()(const NadamPrime& s) const {
    check_decay(s.rho1, "nadam_prime rho1");
    check_decay(s.rho2, "nadam_prime rho2");
    check(s.eps > 0, "nadam_prime eps");
  }
  void operator()(const NoisySgd& s) const { check(s.sigma >= 0, "noisy sigma"); }
};

struct NameOf {
  const char* operator()(const Sgd&) const { return "sgd"; }
  const char* operator()(const Momentum&) const { return "momentum"; }
  const char* operator()(const Nag&) const { return "nag"; }
  const char* operator()(const AdaGrad&) const { return "adagrad"; }
  const char* operator()(const RmsProp&) const { return "rmsprop"; }
  const char* operator()(const RmsPropNesterov&) const {
    return "rmsprop_nesterov";
  }
  const char* operator()(const AdaDelta&) const { return "adadelta"; }
  const char* operator()(const AdaSmooth&) const { return "adasmooth"; }
  const char* operator()(const AdaSmoothDelta&) const {
    return "adasmooth_delta";
  }
  const char* operator()(const Adam&) const { return "adam"; }
  const char* operator()(const AdaMax&) const { return "adamax"; }
  const char* operator()(const Nadam&) const { return "nadam"; }
  const char* operator()(const NadamPrime&) const { return "nadam_prime"; }
  const char* operator()(const NoisySgd&) const { return "noisy_sgd"; }
};

// Advances the AdaSmooth window: record delta, restart at the cap.
void record_er(OptimizerState& st, const Vector& delta) {
  if (st.window_len >= st.window_cap) st.reset_window();
  st.er_signal_accum += delta;
  st.er_noise_accum += delta.cwiseAbs();
  ++st.window_len;
}

Vector adasmooth_denominator(OptimizerState& st, const Vector& g, double rho1,
                             double rho2) {
  const Vector c = scaled_smoothing(rho1, rho2, effective_ratio(st));
  const Vector c2 = c.cwiseProduct(c);
  st.accum_sq = c2.cwiseProduct(g.cwiseProduct(g)) +
                (Vector::Ones(g.size()) - c2).cwiseProduct(st.accum_sq);
  return c2;
}

struct Stepper {
  OptimizerState& st;
  const Vector& g;
  double eta;

  Vector operator()(const Sgd&) const { return -eta * g; }

  Vector operator()(const Momentum& s) const {
    return s.rho * st.prev_delta - eta * g;
  }

  Vector operator()(const Nag& s) const {
    // Gradient already evaluated at the lookahead point by the caller.
    return s.rho * st.prev_delta - eta * g;
  }

  Vector operator()(const AdaGrad& s) const {
    st.accum_sq += g.cwiseProduct(g);
    return -eta * g.cwiseQuotient(
                      (st.accum_sq.array() + s.eps).sqrt().matrix());
  }

  Vector operator()(const RmsProp& s) const {
    st.accum_sq = s.rho * st.accum_sq + (1.0 - s.rho) * g.cwiseProduct(g);
    return -eta * g.cwiseQuotient(
                      (st.accum_sq.array() + s.eps).sqrt().matrix());
  }

  Vector operator()(const RmsPropNesterov& s) const {
    st.accum_sq = s.rho * st.accum_sq + (1.0 - s.rho) * g.cwiseProduct(g);
    return s.alpha * st.prev_delta -
           eta * g.cwiseQuotient(
                     (st.accum_sq.array() + s.eps).sqrt().matrix());
  }

  Vector operator()(const AdaDelta& s) const {
    st.accum_sq = s.rho * st.accum_sq + (1.0 - s.rho) * g.cwiseProduct(g);
    // RMS[dx]_{t-1} in the numerator; eps in both roots (zero-start fix).
    const Vector delta =
        -eta * ((st.accum_dx_sq.array() + s.eps).sqrt() /
                (st.accum_sq.array() + s.eps).sqrt() * g.array())
                   .matrix();
    st.accum_dx_sq =
        s.rho * st.accum_dx_sq + (1.0 - s.rho) * delta.cwiseProduct(delta);
    return delta;
  }

  Vector operator()(const AdaSmooth& s) const {
    adasmooth_denominator(st, g, s.rho1, s.rho2);
    Vector delta = -eta * g.cwiseQuotient(
                              (st.accum_sq.array() + s.eps).sqrt().matrix());
    record_er(st, delta);
    return delta;
  }

  Vector operator()(const AdaSmoothDelta& s) const {
    const Vector c2 = adasmooth_denominator(st, g, s.rho1, s.rho2);
    const Vector delta =
        -eta * ((st.accum_dx_sq.array() + s.eps).sqrt() /
                (st.accum_sq.array() + s.eps).sqrt() * g.array())
                   .matrix();
    // E[dx^2] weights run opposite to E[g^2]: a small ER keeps a long memory
    // in the denominator but a short one in the numerator.
    st.accum_dx_sq =
        (Vector::Ones(g.size()) - c2).cwiseProduct(delta.cwiseProduct(delta)) +
        c2.cwiseProduct(st.accum_dx_sq);
    record_er(st, delta);
    return delta;
  }

  Vector operator()(const Adam& s) const {
    const long t = st.step_count + 1;
    st.first_moment = s.rho1 * st.first_moment + (1.0 - s.rho1) * g;
    st.accum_sq = s.rho2 * st.accum_sq + (1.0 - s.rho2) * g.cwiseProduct(g);
    const Vector mhat =
        st.first_moment / (1.0 - std::pow(s.rho1, static_cast<double>(t)));
    const Vector vhat =
        st.accum_sq / (1.0 - std::pow(s.rho2, static_cast<double>(t)));
    return -eta *
           mhat.cwiseQuotient((vhat.array().sqrt() + s.eps).matrix());
  }

  Vector operator()(const AdaMax& s) const {
    const long t = st.step_count + 1;
    st.first_moment = s.rho1 * st.first_moment + (1.0 - s.rho1) * g;
    st.inf_norm = (s.rho2 * st.inf_norm).cwiseMax(g.cwiseAbs());
    const Vector mhat =
        st.first_moment / (1.0 - std::pow(s.rho1, static_cast<double>(t)));
    Vector delta(g.size());
    for (Index i = 0; i < g.size(); ++i) {
      delta(i) = st.inf_norm(i) > 0.0 ? -eta * mhat(i) / st.inf_norm(i) : 0.0;
    }
    return delta;
  }

  Vector operator()(const Nadam& s) const {
    const long t = st.step_count + 1;
    st.first_moment = s.rho1 * st.first_moment + (1.0 - s.rho1) * g;
    st.accum_sq = s.rho2 * st.accum_sq + (1.0 - s.rho2) * g.cwiseProduct(g);
    // Nesterov-flavored bias correction: m_t looks one step ahead.
    const Vector mhat =
        s.rho1 * st.first_moment /
            (1.0 - std::pow(s.rho1, static_cast<double>(t + 1))) +
        (1.0 - s.rho1) / (1.0 - std::pow(s.rho1, static_cast<double>(t))) * g;
    const Vector vhat =
        st.accum_sq / (1.0 - std::pow(s.rho2, static_cast<double>(t)));
    return -eta *
           mhat.cwiseQuotient((vhat.array().sqrt() + s.eps).matrix());
  }

  Vector operator()(const NadamPrime& s) const {
    const long t = st.step_count + 1;
    st.first_moment = s.rho1 * st.first_moment + (1.0 - s.rho1) * g;
    st.accum_sq = s.rho2 * st.accum_sq + (1.0 - s.rho2) * g.cwiseProduct(g);
    const double corr1 = 1.0 - std::pow(s.rho1, static_cast<double>(t));
    const Vector mhat = st.first_moment / corr1;
    const Vector mhat_prime = s.rho1 * mhat + (1.0 - s.rho1) / corr1 * g;
    const Vector vhat =
        st.accum_sq / (1.0 - std::pow(s.rho2, static_cast<double>(t)));
    return -eta *
           mhat_prime.cwiseQuotient((vhat.array().sqrt() + s.eps).matrix());
  }

  Vector operator()(const NoisySgd& s) const {
    Vector delta = -eta * g;
    if (s.sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, s.sigma);
      for (Index i = 0; i < delta.size(); ++i) delta(i) += noise(st.rng);
    }
    return delta;
  }
};

}  // namespace

void validate(const OptimizerSpec& spec) { std::visit(Validator{}, spec); }

const char* name_of(const OptimizerSpec& spec) {
  return std::visit(NameOf{}, spec);
}

OptimizerState OptimizerState::init(const OptimizerSpec& spec, Index dim,
                                    int window_cap) {
  OptimizerState st;
  st.prev_delta = Vector::Zero(dim);
  st.accum_sq = Vector::Zero(dim);
  st.accum_dx_sq = Vector::Zero(dim);
  st.first_moment = Vector::Zero(dim);
  st.inf_norm = Vector::Zero(dim);
  st.er_signal_accum = Vector::Zero(dim);
  st.er_noise_accum = Vector::Zero(dim);
  st.window_cap = window_cap;
  if (const auto* noisy = std::get_if<NoisySgd>(&spec)) {
    st.rng.seed(noisy->seed);
  }
  return st;
}

void OptimizerState::reset_window() {
  er_signal_accum.setZero();
  er_noise_accum.setZero();
  window_len = 0;
}

Vector eval_point(const OptimizerSpec& spec, const OptimizerState& state,
                  const Vector& x) {
  if (x.size() != state.prev_delta.size()) {
    throw DimensionMismatch("eval_point: x has " + std::to_string(x.size()) +
                            ", state has " +
                            std::to_string(state.prev_delta.size()));
  }
  if (const auto* nag = std::get_if<Nag>(&spec)) {
    return x + nag->rho * state.prev_delta;
  }
  if (const auto* rpn = std::get_if<RmsPropNesterov>(&spec)) {
    return x + rpn->alpha * state.prev_delta;
  }
  return x;
}

Vector step(const OptimizerSpec& spec, OptimizerState& state, const Vector& g,
            double eta) {
  if (!g.allFinite()) throw NonFiniteGradient("optimizer step");
  if (g.size() != state.prev_delta.size()) {
    throw DimensionMismatch("step: g has " + std::to_string(g.size()));
  }
  Vector delta = std::visit(Stepper{state, g, eta}, spec);
  state.prev_delta = delta;
  ++state.step_count;
  return delta;
}

Vector effective_ratio(const OptimizerState& state) {
  Vector e = Vector::Zero(state.er_signal_accum.size());
  for (Index i = 0; i < e.size(); ++i) {
    const double noise = state.er_noise_accum(i);
    e(i) = noise > 0.0 ? std::abs(state.er_signal_accum(i)) / noise : 0.0;
  }
  return e;
}

Vector scaled_smoothing(double rho1, double rho2, const Vector& e) {
  return ((rho2 - rho1) * e.array() + (1.0 - rho2)).matrix();
}

}  // namespace descent::optimizers
