#include "support.hpp"

#include "bianchi/atlas.hpp"
#include "bianchi/geodesic_probe.hpp"

#include <doctest.h>

#include <sstream>

using namespace testing_support;

namespace {

Metric form_metric(const std::string& id, const ParamMap& p = {}) { return Metric(atlas().form(id).metric.evaluate(p)); }

}  // namespace

TEST_CASE("euler-arnold right-hand side") {
  std::mt19937_64 rng(8);
  SUBCASE("abelian algebra has straight geodesics") {
    const LieAlgebra r3 = preferred_algebra<double>(Family::R3);
    for (int i = 0; i < 20; ++i)
      CHECK(euler_arnold_rhs(r3, Metric(random_metric(rng, i % 2)), random_matrix(rng).col(0)).norm() == 0.0);
  }
  SUBCASE("bi-invariant so3 metric") {
    const LieAlgebra so3 = preferred_algebra<double>(Family::so3);
    const Metric id(Mat3::Identity());
    CHECK(euler_arnold_rhs(so3, id, Vec3::UnitX()).norm() == 0.0);
    for (int i = 0; i < 20; ++i) CHECK(euler_arnold_rhs(so3, id, random_matrix(rng).col(0)).norm() <= 1e-15);
  }
  SUBCASE("so3 with diag(1,1,2) and v = e1 + e3") {
    // g(rhs, e_k) = g(v, [v, e_k]) evaluated by hand: (0, 1, 0).
    const LieAlgebra so3 = preferred_algebra<double>(Family::so3);
    const Metric g(Vec3(1, 1, 2).asDiagonal());
    const Vec3 v(1, 0, 1);
    const Vec3 rhs = euler_arnold_rhs(so3, g, v);
    CHECK((rhs - Vec3(0, 1, 0)).norm() <= 1e-15);
    CHECK((rhs + levi_civita(so3, g).apply(v, v)).norm() <= 1e-15);
  }
  SUBCASE("agrees with the Levi-Civita connection") {
    int n = 0;
    for (const auto& c : fuzz_corpus(500, 123)) {
      const Metric g(c.metric);
      const auto conn = levi_civita(c.algebra, g);
      const Vec3 v = random_matrix(rng).col(0);
      const Vec3 lhs = euler_arnold_rhs(c.algebra, g, v);
      CHECK((lhs + conn.apply(v, v)).norm() <= 1e-9 * std::max(1.0, lhs.norm()));
      ++n;
    }
    CHECK(n == 500);
  }
}

TEST_CASE("probe tolerance range") {
  const LieAlgebra a = preferred_algebra<double>(Family::so3);
  const Metric g(Mat3::Identity());
  for (double bad : {1e-13, 1e-5, 0.0, -1e-9}) {
    ProbeOptions o;
    o.tol = bad;
    try {
      integrate(a, g, Vec3::UnitX(), o);
      FAIL("expected ToleranceUnachievable");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ToleranceUnachievable);
    }
  }
  for (double ok : {1e-12, 1e-6}) {
    ProbeOptions o;
    o.tol = ok;
    o.horizon = 10.0;
    CHECK(integrate(a, g, Vec3::UnitX(), o).verdict.outcome == ProbeOutcome::Bounded);
  }
}

TEST_CASE("energy conservation and time symmetry") {
  std::mt19937_64 rng(9);
  const LieAlgebra so3 = preferred_algebra<double>(Family::so3);
  const Metric g(Vec3(1, 2, 3).asDiagonal());
  for (double tol : {1e-6, 1e-9, 1e-12}) {
    ProbeOptions o;
    o.horizon = 50.0;
    o.tol = tol;
    o.record = true;
    const Vec3 v0 = random_matrix(rng).col(0);
    const ProbeRun fw = integrate(so3, g, v0, o);
    REQUIRE(fw.verdict.outcome == ProbeOutcome::Bounded);
    const double e0 = g(v0, v0);
    for (const auto& s : fw.samples) CHECK(std::abs(s.energy - e0) <= 100 * tol * std::max(1.0, std::abs(e0)));
    // Integrate back from v(T) and compare v(-T) with v0.
    const ProbeSample end = fw.samples.back();
    CHECK(end.t == o.horizon);
    const ProbeRun back = integrate(so3, g, end.v, o);
    CHECK(back.samples.front().t == -o.horizon);
    CHECK((back.samples.front().v - v0).norm() <= 1000 * tol * std::max(1.0, v0.norm()));
  }
}

TEST_CASE("trajectory export") {
  const LieAlgebra so3 = preferred_algebra<double>(Family::so3);
  ProbeOptions o;
  o.horizon = 5.0;
  o.record = true;
  const ProbeRun run = integrate(so3, Metric(Vec3(1, 2, 3).asDiagonal()), Vec3(1, 1, 1), o);
  for (std::size_t i = 1; i < run.samples.size(); ++i) CHECK(run.samples[i].t > run.samples[i - 1].t);
  std::ostringstream os;
  write_csv(os, run.samples);
  const std::string csv = os.str();
  CHECK(csv.rfind("t,v1,v2,v3,energy\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(run.samples.size()) + 1);
}

TEST_CASE("probe directions") {
  const auto& d = probe_directions();
  REQUIRE(d.size() == 64);
  for (const Vec3& v : d) CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("space forms stay bounded to the horizon") {
  std::mt19937_64 rng(1000);
  ProbeOptions o;  // T = 1e3
  for (const auto& row : atlas().table2) {
    const double p = row.family == Family::e_mu ? 1.0 : 0.0;
    const LieAlgebra a = preferred_algebra(row.family, p);
    const Metric g = form_metric(row.form, row.instance);
    for (int i = 0; i < 20; ++i) {
      const Vec3 v0 = random_matrix(rng).col(0).normalized() * (8.0 / o.horizon);
      const ProbeVerdict v = integrate(a, g, v0, o).verdict;
      INFO(row.id);
      CHECK(v.outcome == ProbeOutcome::Bounded);
    }
  }
}

TEST_CASE("known complete and incomplete Lorentzian metrics") {
  SUBCASE("heis Lorentzian forms are complete") {
    const LieAlgebra a = preferred_algebra<double>(Family::heis);
    for (auto [id, p] : std::vector<std::pair<std::string, ParamMap>>{
             {"heis.1", {{"eps", -1.0}}}, {"heis.2", {}}, {"heis.3", {}}}) {
      const SweepResult s = sweep(a, form_metric(id, p));
      INFO(id);
      CHECK(s.bounded == 64);
    }
  }
  SUBCASE("euc2 flat Lorentzian form is complete") {
    const SweepResult s = sweep(preferred_algebra<double>(Family::euc2), form_metric("emu.2", {{"alpha2", 1.0}}));
    CHECK(s.bounded == 64);
  }
  SUBCASE("h1 flat Lorentzian form blows up") {
    const SweepResult s = sweep(preferred_algebra<double>(Family::h1), form_metric("h1.3"));
    CHECK(s.blowups >= 1);
    for (const auto& v : s.verdicts)
      if (v.outcome == ProbeOutcome::Blowup) CHECK(std::abs(*v.blowup_time) < v.horizon);
  }
  SUBCASE("sol plane wave blows up") {
    const SweepResult s = sweep(preferred_algebra<double>(Family::sol), form_metric("sol.7"));
    CHECK(s.blowups >= 1);
    CHECK(s.overall() == ProbeOutcome::Blowup);
  }
  SUBCASE("flat R3 is trivially bounded") {
    const SweepResult s = sweep(preferred_algebra<double>(Family::R3), Metric(Mat3::Identity()));
    CHECK(s.bounded == 64);
    for (const auto& v : s.verdicts) CHECK(v.energy_drift == 0.0);
  }
}
