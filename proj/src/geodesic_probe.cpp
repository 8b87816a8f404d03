#include "bianchi/geodesic_probe.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace bianchi {

namespace {

constexpr double kBlowupSpeed = 1e12;
constexpr double kCollapse = 1e-14;

// Dormand-Prince tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b*, the error weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

struct HalfRun {
  ProbeVerdict v;
  std::vector<ProbeSample> samples;
};

// Integrates v' = dir * rhs(v) on [0, T].
HalfRun half(const LieAlgebra& a, const Metric& g, const Vec3& v0, double dir, const ProbeOptions& opt) {
  auto f = [&](const Vec3& v) -> Vec3 { return dir * euler_arnold_rhs(a, g, v); };
  const double T = opt.horizon;
  const double e0 = g(v0, v0);
  const double atol = opt.tol * std::max(v0.norm(), 1e-300);
  HalfRun out;
  out.v.horizon = T;
  out.v.max_speed = v0.norm();

  Vec3 v = v0, k1 = f(v);
  double t = 0.0;
  double h = std::min(T, 0.01 * T);
  if (k1.norm() > 0) h = std::min(h, std::pow(opt.tol, 0.2) * v.norm() / k1.norm());
  if (opt.record) out.samples.push_back({0.0, v, e0});

  while (t < T) {
    if (out.v.steps >= opt.max_steps) return out;  // inconclusive
    h = std::min(h, T - t);
    const Vec3 k2 = f(v + h * a21 * k1);
    const Vec3 k3 = f(v + h * (a31 * k1 + a32 * k2));
    const Vec3 k4 = f(v + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec3 k5 = f(v + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec3 k6 = f(v + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec3 vn = v + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec3 k7 = f(vn);
    const Vec3 err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double en = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double sc = atol + opt.tol * std::max(std::abs(v(i)), std::abs(vn(i)));
      en = std::max(en, std::abs(err(i)) / sc);
    }
    if (!std::isfinite(en)) en = 1e10;

    if (en <= 1.0) {
      t += h;
      v = vn;
      k1 = k7;
      ++out.v.steps;
      const double speed = v.norm();
      out.v.max_speed = std::max(out.v.max_speed, speed);
      out.v.energy_drift = std::max(out.v.energy_drift, std::abs(g(v, v) - e0));
      if (opt.record) out.samples.push_back({dir * t, v, g(v, v)});
    }
    const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
    h *= fac;

    const double speed = v.norm();
    if (speed > kBlowupSpeed && h < kCollapse * T) {
      out.v.outcome = ProbeOutcome::Blowup;
      // v ~ 1/(t* - t) near a quadratic singularity
      const double rate = f(v).norm();
      out.v.blowup_time = dir * (t + (rate > 0 ? speed / rate : 0.0));
      return out;
    }
    if (!std::isfinite(speed) || h < 1e-300) return out;  // inconclusive
  }
  const double budget = 100.0 * opt.tol * std::max(1.0, std::abs(e0));
  out.v.outcome = out.v.energy_drift <= budget ? ProbeOutcome::Bounded : ProbeOutcome::Inconclusive;
  return out;
}

}  // namespace

const char* outcome_name(ProbeOutcome o) {
  switch (o) {
    case ProbeOutcome::Bounded: return "bounded-to-horizon";
    case ProbeOutcome::Blowup: return "blowup-detected";
    case ProbeOutcome::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

ProbeRun integrate(const LieAlgebra& a, const Metric& g, const Vec3& v0, const ProbeOptions& opt) {
  if (!(opt.tol >= 1e-12 && opt.tol <= 1e-6))
    throw Error(ErrorCode::ToleranceUnachievable, "probe tolerance must lie in [1e-12, 1e-6]");
  if (!(opt.horizon > 0) || !std::isfinite(opt.horizon))
    throw Error(ErrorCode::DegenerateInput, "probe horizon must be positive");

  HalfRun fw = half(a, g, v0, 1.0, opt);
  HalfRun bw = half(a, g, v0, -1.0, opt);

  ProbeRun run;
  ProbeVerdict& r = run.verdict;
  r.horizon = opt.horizon;
  r.max_speed = std::max(fw.v.max_speed, bw.v.max_speed);
  r.energy_drift = std::max(fw.v.energy_drift, bw.v.energy_drift);
  r.steps = fw.v.steps + bw.v.steps;
  if (fw.v.outcome == ProbeOutcome::Blowup || bw.v.outcome == ProbeOutcome::Blowup) {
    r.outcome = ProbeOutcome::Blowup;
    r.blowup_time = fw.v.outcome == ProbeOutcome::Blowup ? fw.v.blowup_time : bw.v.blowup_time;
  } else if (fw.v.outcome == ProbeOutcome::Bounded && bw.v.outcome == ProbeOutcome::Bounded) {
    r.outcome = ProbeOutcome::Bounded;
  }
  if (opt.record) {
    run.samples.assign(bw.samples.rbegin(), bw.samples.rend());
    if (!fw.samples.empty()) run.samples.pop_back();  // t = 0 appears in both halves
    run.samples.insert(run.samples.end(), fw.samples.begin(), fw.samples.end());
  }
  return run;
}

const std::vector<Vec3>& probe_directions() {
  static const std::vector<Vec3> dirs = [] {
    std::vector<Vec3> d;
    const int n = 64;
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / n;
      const double r = std::sqrt(1.0 - z * z);
      d.emplace_back(r * std::cos(golden * i), r * std::sin(golden * i), z);
    }
    return d;
  }();
  return dirs;
}

ProbeOutcome SweepResult::overall() const {
  if (blowups > 0) return ProbeOutcome::Blowup;
  if (inconclusive > 0) return ProbeOutcome::Inconclusive;
  return ProbeOutcome::Bounded;
}

SweepResult sweep(const LieAlgebra& a, const Metric& g, const ProbeOptions& opt, double reach) {
  ProbeOptions o = opt;
  o.record = false;
  SweepResult s;
  for (const Vec3& d : probe_directions()) {
    const ProbeVerdict v = integrate(a, g, (reach / opt.horizon) * d, o).verdict;
    s.bounded += v.outcome == ProbeOutcome::Bounded;
    s.blowups += v.outcome == ProbeOutcome::Blowup;
    s.inconclusive += v.outcome == ProbeOutcome::Inconclusive;
    s.verdicts.push_back(v);
  }
  return s;
}

void write_csv(std::ostream& os, const std::vector<ProbeSample>& samples) {
  os << "t,v1,v2,v3,energy\n" << std::setprecision(17);
  for (const auto& s : samples) os << s.t << ',' << s.v(0) << ',' << s.v(1) << ',' << s.v(2) << ',' << s.energy << '\n';
}

}  // namespace bianchi
