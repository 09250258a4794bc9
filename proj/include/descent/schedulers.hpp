#pragma once

#include <variant>
#include <vector>

#include "descent/types.hpp"

namespace descent::schedulers {

// Step-indexed learning-rate schedules. All are pure functions of t >= 0;
// construction invariants are enforced by validate() (the JSON parser and the
// CLI call it; rate_at assumes a valid spec).

struct StepDecay {        // eta0 * d^floor(t/n)
  double eta0;
  double d;
  int n;
};
struct MultiStep {        // eta0 * d^(#milestones <= t)
  double eta0;
  double d;
  std::vector<long> milestones;
};
struct Exponential {      // eta0 * exp(-k t)
  double eta0;
  double k;
};
struct Inverse {          // eta0 / (1 + k t)
  double eta0;
  double k;
};
struct InverseSqrt {      // eta0 * sqrt(w) / sqrt(max(t, w))
  double eta0;
  long w;
};
struct AnnealingPoly {    // (eta0-etaT) (1 - min(t,m)/m)^p + etaT
  double eta0 = 0.001;
  double etaT = 1e-10;
  long m = 1;
  double p = 2.0;
};
struct Stlr {             // slanted triangular warmup over total steps
  double eta_max = 0.01;
  long total = 1;
  double frac = 0.1;
  double ratio = 32.0;
};
struct Noam {             // alpha d_model^-1/2 min(t^-1/2, t w^-3/2)
  double alpha;
  long d_model;
  long w;
};
struct WarmupNoam {       // alpha w^-1/2 min(t^-1/2, t w^-3/2)
  double alpha;
  long w;
};
struct Triangular {       // linear up/down with half-cycle s
  double eta0;
  double eta_max;
  long s;
};
struct Triangular2 {      // triangular, amplitude halved each cycle
  double eta0;
  double eta_max;
  long s;
};
struct ExpRange {         // triangular, amplitude scaled by gamma^t
  double eta0;
  double eta_max;
  long s;
  double gamma;
};
struct CyclicalCosine {   // eta0/2 (cos(pi mod(t-1, ceil(T/M)) / ceil(T/M)) + 1)
  double eta0;
  long total;
  long m;
};
struct CyclicalStep {     // eta_max - (t mod M) eta_min
  double eta_min;
  double eta_max;
  long m;
};
struct CyclicalPoly {     // polynomial decay restarted every M steps
  double eta0;
  double etaT;
  long m;
  double p = 2.0;
};
struct Constant {
  double eta;
};

using ScheduleSpec =
    std::variant<StepDecay, MultiStep, Exponential, Inverse, InverseSqrt,
                 AnnealingPoly, Stlr, Noam, WarmupNoam, Triangular, Triangular2,
                 ExpRange, CyclicalCosine, CyclicalStep, CyclicalPoly, Constant>;

// Throws std::invalid_argument on out-of-range parameters.
void validate(const ScheduleSpec& spec);

// Exact per-family formula; finite and >= 0 for all t >= 0.
double rate_at(const ScheduleSpec& spec, long t);

// (t, rate_at(t)) for t in 0..t_max.
std::vector<std::pair<long, double>> schedule_table(const ScheduleSpec& spec,
                                                    long t_max);

}  // namespace descent::schedulers
