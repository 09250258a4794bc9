#include "descent/schedulers.hpp"

#include <algorithm>
#include <cmath>

namespace descent::schedulers {

namespace {

void check(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// Mathematical mod: result in [0, m) also for negative v.
long floor_mod(long v, long m) {
  long r = v % m;
  return r < 0 ? r + m : r;
}

long ceil_div(long a, long b) { return (a + b - 1) / b; }

// Shared triangular window: cycle index and max(0, 1-x). The in-cycle
// position t mod 2s makes the height bitwise periodic; it equals the
// textbook |t/s - 2 cycle + 1| form algebraically.
double triangle_height(long t, long s, long* cycle_out) {
  const long within = t % (2 * s);
  const double x =
      std::abs(static_cast<double>(within) / static_cast<double>(s) - 1.0);
  if (cycle_out != nullptr) *cycle_out = 1 + t / (2 * s);
  return std::max(0.0, 1.0 - x);
}

struct Validator {
  void operator()(const StepDecay& s) const {
    check(s.eta0 > 0 && s.d > 0 && s.d <= 1 && s.n > 0, "step_decay params");
  }
  void operator()(const MultiStep& s) const {
    check(s.eta0 > 0 && s.d > 0 && s.d <= 1, "multi_step params");
    check(std::is_sorted(s.milestones.begin(), s.milestones.end()),
          "multi_step milestones must be ascending");
  }
  void operator()(const Exponential& s) const {
    check(s.eta0 > 0 && s.k >= 0, "exponential params");
  }
  void operator()(const Inverse& s) const {
    check(s.eta0 > 0 && s.k >= 0, "inverse params");
  }
  void operator()(const InverseSqrt& s) const {
    check(s.eta0 > 0 && s.w > 0, "inverse_sqrt params");
  }
  void operator()(const AnnealingPoly& s) const {
    check(s.eta0 > 0 && s.etaT >= 0 && s.etaT <= s.eta0 && s.m > 0 && s.p >= 0,
          "annealing_poly params");
  }
  void operator()(const Stlr& s) const {
    check(s.eta_max > 0 && s.total > 0 && s.frac > 0 && s.frac < 1 &&
              s.ratio >= 1,
          "stlr params");
  }
  void operator()(const Noam& s) const {
    check(s.alpha > 0 && s.d_model > 0 && s.w > 0, "noam params");
  }
  void operator()(const WarmupNoam& s) const {
    check(s.alpha > 0 && s.w > 0, "warmup_noam params");
  }
  void operator()(const Triangular& s) const {
    check(s.eta0 > 0 && s.eta_max >= s.eta0 && s.s > 0, "triangular params");
  }
  void operator()(const Triangular2& s) const {
    check(s.eta0 > 0 && s.eta_max >= s.eta0 && s.s > 0, "triangular2 params");
  }
  void operator()(const ExpRange& s) const {
    check(s.eta0 > 0 && s.eta_max >= s.eta0 && s.s > 0 && s.gamma > 0 &&
              s.gamma <= 1,
          "exp_range params");
  }
  void operator()(const CyclicalCosine& s) const {
    check(s.eta0 > 0 && s.total > 0 && s.m > 0 && s.m <= s.total,
          "cyclical_cosine params");
  }
  void operator()(const CyclicalStep& s) const {
    check(s.eta_min > 0 && s.eta_max > 0 && s.m > 0, "cyclical_step params");
  }
  void operator()(const CyclicalPoly& s) const {
    check(s.eta0 > 0 && s.etaT >= 0 && s.etaT <= s.eta0 && s.m > 0 && s.p >= 0,
          "cyclical_poly params");
  }
  void operator()(const Constant& s) const {
    check(s.eta > 0, "constant params");
  }
};

struct Rate {
  long t;

  double operator()(const StepDecay& s) const {
    return s.eta0 * std::pow(s.d, static_cast<double>(t / s.n));
  }
  double operator()(const MultiStep& s) const {
    const auto stage = std::upper_bound(s.milestones.begin(),
                                        s.milestones.end(), t) -
                       s.milestones.begin();
    return s.eta0 * std::pow(s.d, static_cast<double>(stage));
  }
  double operator()(const Exponential& s) const {
    return s.eta0 * std::exp(-s.k * static_cast<double>(t));
  }
  double operator()(const Inverse& s) const {
    return s.eta0 / (1.0 + s.k * static_cast<double>(t));
  }
  double operator()(const InverseSqrt& s) const {
    return s.eta0 * std::sqrt(static_cast<double>(s.w)) /
           std::sqrt(static_cast<double>(std::max(t, s.w)));
  }
  double operator()(const AnnealingPoly& s) const {
    const double frac =
        static_cast<double>(std::min(t, s.m)) / static_cast<double>(s.m);
    return (s.eta0 - s.etaT) * std::pow(1.0 - frac, s.p) + s.etaT;
  }
  double operator()(const Stlr& s) const {
    const long cut = static_cast<long>(
        std::ceil(static_cast<double>(s.total) * s.frac));
    double p;
    if (t < cut) {
      p = static_cast<double>(t) / static_cast<double>(cut);
    } else {
      p = 1.0 - static_cast<double>(t - cut) /
                    (static_cast<double>(cut) * (1.0 / s.frac - 1.0));
    }
    p = std::clamp(p, 0.0, 1.0);
    return s.eta_max * (1.0 + p * (s.ratio - 1.0)) / s.ratio;
  }
  double operator()(const Noam& s) const {
    return s.alpha / std::sqrt(static_cast<double>(s.d_model)) * noam_min(s.w);
  }
  double operator()(const WarmupNoam& s) const {
    return s.alpha / std::sqrt(static_cast<double>(s.w)) * noam_min(s.w);
  }
  double operator()(const Triangular& s) const {
    return s.eta0 + (s.eta_max - s.eta0) * triangle_height(t, s.s, nullptr);
  }
  double operator()(const Triangular2& s) const {
    long cycle = 0;
    const double h = triangle_height(t, s.s, &cycle);
    return s.eta0 + (s.eta_max - s.eta0) * h *
                        std::pow(2.0, static_cast<double>(1 - cycle));
  }
  double operator()(const ExpRange& s) const {
    return s.eta0 + (s.eta_max - s.eta0) * triangle_height(t, s.s, nullptr) *
                        std::pow(s.gamma, static_cast<double>(t));
  }
  double operator()(const CyclicalCosine& s) const {
    const long period = ceil_div(s.total, s.m);
    const double phase =
        static_cast<double>(floor_mod(t - 1, period)) / period;
    return s.eta0 / 2.0 * (std::cos(M_PI * phase) + 1.0);
  }
  double operator()(const CyclicalStep& s) const {
    return s.eta_max - static_cast<double>(t % s.m) * s.eta_min;
  }
  double operator()(const CyclicalPoly& s) const {
    constexpr double kEps = 1e-10;  // conditions the t=0 case
    const double decay_batch =
        static_cast<double>(s.m) * static_cast<double>(ceil_div(t, s.m));
    const double base = 1.0 - static_cast<double>(t) / (decay_batch + kEps);
    return (s.eta0 - s.etaT) * std::pow(base, s.p) + s.etaT;
  }
  double operator()(const Constant& s) const { return s.eta; }

 private:
  double noam_min(long w) const {
    const double linear = static_cast<double>(t) /
                          std::pow(static_cast<double>(w), 1.5);
    if (t == 0) return 0.0;
    return std::min(1.0 / std::sqrt(static_cast<double>(t)), linear);
  }
};

}  // namespace

void validate(const ScheduleSpec& spec) { std::visit(Validator{}, spec); }

double rate_at(const ScheduleSpec& spec, long t) {
  if (t < 0) throw std::invalid_argument("rate_at: t must be >= 0");
  return std::visit(Rate{t}, spec);
}

std::vector<std::pair<long, double>> schedule_table(const ScheduleSpec& spec,
                                                    long t_max) {
  if (t_max < 1) throw std::invalid_argument("schedule_table: t_max >= 1");
  std::vector<std::pair<long, double>> rows;
  rows.reserve(static_cast<size_t>(t_max) + 1);
  for (long t = 0; t <= t_max; ++t) rows.emplace_back(t, rate_at(spec, t));
  return rows;
}

}  // namespace descent::schedulers
