#pragma once

#include "bianchi/curvature.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace bianchi {

/// Body-velocity form of the geodesic equation: g(v', w) = g(v, [v, w]).
inline Vec3 euler_arnold_rhs(const LieAlgebra& a, const Metric& g, const Vec3& v) {
  return g.inverse() * (ad(a, v).transpose() * (g.matrix() * v));
}

enum class ProbeOutcome { Bounded, Blowup, Inconclusive };
const char* outcome_name(ProbeOutcome o);

struct ProbeSample {
  double t;
  Vec3 v;
  double energy;
};

struct ProbeVerdict {
  ProbeOutcome outcome = ProbeOutcome::Inconclusive;
  double horizon = 0.0;
  double max_speed = 0.0;
  std::optional<double> blowup_time;  // negative when found backward in time
  double energy_drift = 0.0;          // max |g(v,v) - g(v0,v0)| over the accepted steps
  long steps = 0;
};

struct ProbeRun {
  ProbeVerdict verdict;
  std::vector<ProbeSample> samples;  // sorted by t, filled only when recording
};

struct ProbeOptions {
  double horizon = 1e3;
  double tol = 1e-9;
  bool record = false;
  long max_steps = 2'000'000;  // per time direction
};

/// Dormand-Prince 5(4) integration forward and backward to +-horizon.
/// Throws ToleranceUnachievable unless tol is in [1e-12, 1e-6].
ProbeRun integrate(const LieAlgebra& a, const Metric& g, const Vec3& v0, const ProbeOptions& opt = {});

/// Fixed set of 64 unit directions (Fibonacci sphere).
const std::vector<Vec3>& probe_directions();

struct SweepResult {
  std::vector<ProbeVerdict> verdicts;  // one per probe direction
  int bounded = 0, blowups = 0, inconclusive = 0;
  ProbeOutcome overall() const;  // Blowup if any direction blows up
};

/// Probes every grid direction with |v0| = reach / horizon, which by
/// homogeneity of the flow covers unit speed up to time `reach`.
SweepResult sweep(const LieAlgebra& a, const Metric& g, const ProbeOptions& opt = {}, double reach = 8.0);

void write_csv(std::ostream& os, const std::vector<ProbeSample>& samples);

}  // namespace bianchi
