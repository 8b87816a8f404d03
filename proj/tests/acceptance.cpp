// Acceptance suite: one PASS/FAIL line per criterion.
#include "support.hpp"

#include "bianchi/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>

using namespace testing_support;

namespace {

struct Criterion {
  int id;
  std::string name;
  std::vector<std::string> failures, warnings;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && failures.size() < 20) failures.push_back(what);
    if (!ok) ++failed;
  }
  void warn(bool ok, const std::string& what) {
    if (!ok) warnings.push_back(what);
  }
  int failed = 0;
};

bool report(Criterion& c) {
  const bool ok = c.failed == 0;
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << ": " << c.detail.str();
  if (!c.warnings.empty()) std::cout << " (" << c.warnings.size() << " warning(s))";
  std::cout << '\n';
  for (const auto& f : c.failures) std::cout << "       fail: " << f << '\n';
  for (const auto& w : c.warnings) std::cout << "       warn: " << w << '\n';
  std::cout.flush();
  return ok;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::string text(const ParamMap& p) {
  std::string s;
  for (const auto& [k, v] : p) s += (s.empty() ? "" : ",") + k + "=" + fmt(v);
  return s.empty() ? "-" : s;
}

// Independent connection: nabla_x y = (1/2)([x,y] - ad*_x y - ad*_y x), ad*_x = g^-1 ad_x^T g.
Vec3 nab(const LieAlgebra& a, const Mat3& g, const Vec3& x, const Vec3& y) {
  auto adj = [&](const Vec3& u) -> Mat3 {
    Mat3 m;
    for (int j = 0; j < 3; ++j) m.col(j) = bracket(a, u, Vec3(Vec3::Unit(j)));
    return g.inverse() * m.transpose() * g;
  };
  return 0.5 * (bracket(a, x, y) - adj(x) * y - adj(y) * x);
}

// K(x,y) = g(R(x,y)y, x) / gram with R(x,y) = [nabla_x, nabla_y] - nabla_[x,y].
double oracle_sectional(const LieAlgebra& a, const Mat3& g, const Vec3& x, const Vec3& y) {
  const Vec3 r = nab(a, g, x, nab(a, g, y, y)) - nab(a, g, y, nab(a, g, x, y)) - nab(a, g, bracket(a, x, y), y);
  const double gram = x.dot(g * x) * y.dot(g * y) - std::pow(x.dot(g * y), 2);
  return r.dot(g * x) / gram;
}

// Dimension of {D : D derivation, g D + D^T g = 0} by a direct SVD.
int oracle_skew_dim(const LieAlgebra& a, const Mat3& g) {
  Eigen::MatrixXd sys(27 + 9, 9);
  sys.setZero();
  for (int p = 0; p < 9; ++p) {
    Mat3 d = Mat3::Zero();
    d(p % 3, p / 3) = 1.0;
    int row = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const Vec3 ei = Vec3::Unit(i), ej = Vec3::Unit(j);
        const Vec3 r = d * bracket(a, ei, ej) - bracket(a, Vec3(d * ei), ej) - bracket(a, ei, Vec3(d * ej));
        for (int k = 0; k < 3; ++k) sys(row++, p) = r(k);
      }
    const Mat3 s = g * d + d.transpose() * g;
    for (int k = 0; k < 9; ++k) sys(27 + k, p) = s(k % 3, k / 3);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys);
  const auto sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) rank += sv(i) > 1e-9 * std::max(1.0, sv(0));
  return 9 - rank;
}

int curvature_sign(const LieAlgebra& a, const Mat3& g, std::mt19937_64& rng) {
  // Every well-conditioned plane must give the same sign.
  std::set<int> signs;
  for (int n = 0; n < 20; ++n) {
    const Vec3 x = random_matrix(rng).col(0), y = random_matrix(rng).col(0);
    const double gram = x.dot(g * x) * y.dot(g * y) - std::pow(x.dot(g * y), 2);
    if (std::abs(gram) < 1e-2 * x.squaredNorm() * y.squaredNorm()) continue;
    const double k = oracle_sectional(a, g, x, y);
    signs.insert(std::abs(k) <= 1e-9 ? 0 : (k > 0 ? 1 : -1));
  }
  return signs.size() == 1 ? *signs.begin() : 99;
}

const char* sign_text(int s) { return s > 0 ? "+" : s < 0 ? "-" : "0"; }

// --- criteria --------------------------------------------------------------

bool table2() {
  Criterion c{1, "space-form table reproduction"};
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  int rows = 0, runs = 0;
  for (const auto& row : atlas().table2) {
    ++rows;
    const Mat3 g = atlas().form(row.form).metric.evaluate(row.instance);
    for (double p : atlas().params_for(row.family)) {
      ++runs;
      const LieAlgebra a = preferred_algebra(row.family, p);
      const std::string where = row.id + (has_param(row.family) ? "(" + fmt(p) + ")" : "");
      try {
        const Analysis an = analyze(a, g);
        const KillingReport& k = an.killing;
        c.require(k.killing_dim == 6, where + " killing_dim " + std::to_string(k.killing_dim));
        c.require(k.constant_k.has_value(), where + " curvature not constant");
        c.require(an.curvature.ricci_residual <= 1e-8, where + " Ricci residual " + fmt(an.curvature.ricci_residual));
        c.require(k.completeness == Completeness::Complete, where + " completeness " + completeness_name(k.completeness));
        const int expected = row.curvature_sign;
        const int oracle = curvature_sign(a, g, rng);
        c.require(oracle == expected, where + " oracle sign " + std::to_string(oracle) + " vs " + sign_text(expected));
        if (k.constant_k) {
          const int s = std::abs(*k.constant_k) <= 1e-9 ? 0 : (*k.constant_k > 0 ? 1 : -1);
          c.require(s == expected, where + " reported K " + fmt(*k.constant_k));
        }
      } catch (const Error& e) {
        c.require(false, where + " " + error_name(e.code()) + ": " + e.what());
      }
    }
  }
  const double dt = seconds_since(t0);
  c.require(dt < 5.0, "runtime " + fmt(dt) + " s");
  c.require(rows == 11, "row count " + std::to_string(rows));
  c.detail << rows << " metric rows, " << runs << " runs, " << fmt(dt) << " s";
  return report(c);
}

bool table3() {
  Criterion c{2, "isotropy table reproduction"};
  const auto t0 = std::chrono::steady_clock::now();
  int runs = 0, excluded = 0;
  for (const auto& row : atlas().table3) {
    for (double p : atlas().params_for(row.family)) {
      const LieAlgebra a = preferred_algebra(row.family, p);
      const std::string fam = has_param(row.family) ? "(" + fmt(p) + ")" : "";
      for (const auto& s : row.samples) {
        ++runs;
        const std::string where = row.id + fam + " " + text(s);
        try {
          const KillingReport k = analyze(a, row.metric.evaluate(s)).killing;
          c.require(k.killing_dim == 4, where + " killing_dim " + std::to_string(k.killing_dim));
          c.require(k.isotropy_type == row.isotropy, where + " isotropy " + k.isotropy_type.value_or("-"));
          c.require(k.g_ideal_in_L == row.ideal, where + " ideal flag");
          c.require(k.derived_killing == row.derived, where + " derived " + k.derived_killing.value_or("-"));
        } catch (const Error& e) {
          c.require(false, where + " " + error_name(e.code()) + ": " + e.what());
        }
      }
      for (const auto& s : row.excluded) {
        ++excluded;
        const std::string where = row.id + fam + " excluded " + text(s);
        try {
          c.require(analyze(a, row.metric.evaluate(s)).killing.killing_dim != 4, where + " reports dim 4");
        } catch (const Error& e) {
          // a degenerate metric cannot report dimension 4 either
          c.require(e.code() == ErrorCode::DegenerateMetric, where + " " + error_name(e.code()));
        }
      }
    }
  }
  const double dt = seconds_since(t0);
  c.require(dt < 30.0, "runtime " + fmt(dt) + " s");
  c.detail << atlas().table3.size() << " rows, " << runs << " interior samples, " << excluded << " exclusions, "
           << fmt(dt) << " s";
  return report(c);
}

bool euc2_negative() {
  Criterion c{3, "euc2 has no 1-dimensional isotropy"};
  std::mt19937_64 rng(303);
  const LieAlgebra a = preferred_algebra<double>(Family::euc2);
  const AutomorphismGroup grp = automorphism_group(Family::euc2, 0.0);
  std::set<int> dims;
  int runs = 0;
  for (const NormalFormSpec* spec : atlas().forms_for(Family::euc2)) {
    std::vector<ParamMap> sweep = spec->samples;
    for (double x = -4.0; x <= 4.0; x += 0.25)
      for (const auto& signs : spec->metric.sign_choices()) {
        ParamMap p = signs;
        for (const auto& [name, sign] : spec->metric.params)
          if (!sign) p[name] = x;
        if (spec->in_domain(p, 1e-6)) sweep.push_back(p);
      }
    for (const auto& p : sweep) {
      const Mat3 g0 = spec->metric.evaluate(p);
      // the canonical metric and a random point of its orbit
      for (const Mat3& q : {Mat3(Mat3::Identity()), grp.sample(rng)}) {
        ++runs;
        try {
          const int d = analyze(a, q.transpose() * g0 * q).killing.killing_dim;
          dims.insert(d);
          c.require(d == 3 || d == 6, spec->id + " " + text(p) + " killing_dim " + std::to_string(d));
        } catch (const Error& e) {
          c.require(e.code() == ErrorCode::DegenerateMetric, spec->id + " " + text(p) + " " + error_name(e.code()));
        }
      }
    }
  }
  c.detail << runs << " metrics, dims seen {";
  for (int d : dims) c.detail << (d == *dims.begin() ? "" : ",") << d;
  c.detail << "}";
  return report(c);
}

bool skew_cross_check() {
  Criterion c{4, "skew-derivation cross-check"};
  int ideal = 0, non_ideal = 0;
  for (const auto& row : atlas().table3) {
    for (double p : atlas().params_for(row.family)) {
      const LieAlgebra a = preferred_algebra(row.family, p);
      for (const auto& s : row.samples) {
        const Mat3 m = row.metric.evaluate(s);
        const std::string where = row.id + " " + text(s);
        const Metric g(m);
        const SkewDerivationSpace sk = skew_derivations(a, g);
        const int oracle = oracle_skew_dim(a, m);
        c.require(sk.dim() == oracle, where + " dim " + std::to_string(sk.dim()) + " vs oracle " + std::to_string(oracle));
        if (row.ideal) {
          ++ideal;
          c.require(sk.dim() == 1, where + " expected one skew derivation");
          if (sk.dim() == 1)
            c.require(table_isotropy_name(classify_type(sk.basis[0], g).type) == row.isotropy,
                      where + " generator type " + isotropy_name(classify_type(sk.basis[0], g).type));
        } else {
          ++non_ideal;
          c.require(sk.dim() == 0, where + " expected no skew derivation");
        }
      }
    }
  }
  c.detail << ideal << " ideal samples with dim 1, " << non_ideal << " non-ideal samples with dim 0";
  return report(c);
}

bool structure_theory() {
  Criterion c{5, "structure-theory invariants"};
  std::mt19937_64 rng(505);
  int maps = 0, riemannian = 0;
  auto check_map = [&](const Mat3& u, const Metric& g, const std::string& where) {
    if (u.norm() == 0.0) return;
    ++maps;
    const Mat3 v = u / u.norm();
    Eigen::JacobiSVD<Mat3> svd(v);
    const Vec3 sv = svd.singularValues();
    c.require(sv(1) > 1e-8 && sv(2) <= 1e-8, where + " rank is not 2");
    c.require(std::abs(v.trace()) <= 1e-9, where + " trace " + fmt(v.trace()));
    if (g.definite()) {
      ++riemannian;
      c.require(classify_type(u, g).type == IsotropyType::Elliptic, where + " Riemannian map not elliptic");
    }
  };
  int n = 0;
  for (const auto& fc : fuzz_corpus(500, 2024)) {
    const Metric g(fc.metric);
    const std::string where = std::string(family_name(fc.family)) + " case " + std::to_string(n++);
    for (const Mat3& u : skew_derivations(fc.algebra, g).basis) check_map(u, g, where + " skew derivation");
    Mat3 s = random_matrix(rng);
    s = (s - s.transpose()).eval();
    check_map(g.inverse() * s, g, where + " random skew map");
  }
  c.detail << "500 fuzz cases, " << maps << " skew maps, " << riemannian << " Riemannian";
  return report(c);
}

bool curvature_identities() {
  Criterion c{6, "curvature-engine identities"};
  std::mt19937_64 rng(606);
  double worst_ea = 0.0;
  for (const auto& fc : fuzz_corpus(500, 6060)) {
    const Metric g(fc.metric);
    const CurvatureReport<double> rep = curvature_report(fc.algebra, g);
    const double scale = std::max(1.0, fc.metric.norm());
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const Vec3 ei = Vec3::Unit(i), ej = Vec3::Unit(j);
        const Vec3 tor = rep.connection.nabla[i].col(j) - rep.connection.nabla[j].col(i) - fc.algebra.bracket_basis(i, j);
        c.require(tor.norm() <= 1e-9 * scale, "torsion");
        const Vec3 ref = nab(fc.algebra, fc.metric, ei, ej);
        c.require((rep.connection.nabla[i].col(j) - ref).norm() <= 1e-9 * scale, "connection differs from oracle");
        for (int k = 0; k < 3; ++k) {
          const Vec3 ek = Vec3::Unit(k);
          const double compat = g(Vec3(rep.connection.nabla[i].col(j)), ek) + g(ej, Vec3(rep.connection.nabla[i].col(k)));
          c.require(std::abs(compat) <= 1e-9 * scale, "metric compatibility");
          const Vec3 b1 = rep.riemann.r[i][j] * ek + rep.riemann.r[j][k] * ei + rep.riemann.r[k][i] * ej;
          c.require(b1.norm() <= 1e-8 * scale * scale, "first Bianchi identity");
          for (int l = 0; l < 3; ++l) {
            const double r = rep.riemann.lowered(g, i, j, k, l), tol = 1e-9 * scale * scale * scale;
            c.require(std::abs(r + rep.riemann.lowered(g, j, i, k, l)) <= tol, "antisymmetry in (i,j)");
            c.require(std::abs(r + rep.riemann.lowered(g, i, j, l, k)) <= tol, "antisymmetry in (k,l)");
            c.require(std::abs(r - rep.riemann.lowered(g, k, l, i, j)) <= tol, "pair symmetry");
          }
        }
      }
    c.require(std::abs(rep.scalar - (g.inverse() * rep.ricci).trace()) <= 1e-10 * scale, "scalar is not tr Ric");
    const Vec3 v = random_matrix(rng).col(0);
    const Vec3 ea = euler_arnold_rhs(fc.algebra, g, v);
    const double err = (ea + rep.connection.apply(v, v)).norm() / std::max(1.0, ea.norm());
    worst_ea = std::max(worst_ea, err);
    c.require(err <= 1e-9, "Euler-Arnold rhs differs from -Gamma(v,v) by " + fmt(err));
  }
  c.detail << "500 fuzz cases, worst Euler-Arnold mismatch " << fmt(worst_ea);
  return report(c);
}

bool classifier_round_trip() {
  Criterion c{7, "classifier round trip"};
  std::mt19937_64 rng(707);
  int runs = 0;
  for (const auto& fs : family_samples()) {
    const LieAlgebra a0 = preferred_algebra(fs.family, fs.param);
    for (int i = 0; i < 100; ++i) {
      ++runs;
      const Mat3 t = random_transport(rng, 50.0);
      const LieAlgebra a = transport(a0, t);
      const std::string where = std::string(family_name(fs.family)) + "(" + fmt(fs.param) + ")";
      try {
        const BianchiClass b = classify(a);
        c.require(b.tag == fs.family, where + " classified as " + std::string(family_name(b.tag)));
        if (has_param(fs.family))
          c.require(b.param && std::abs(*b.param - fs.param) <= 1e-6 * std::abs(fs.param), where + " parameter");
        // oracle: the reported basis must carry the brackets to their preferred form
        const LieAlgebra back = transport(a, b.basis_change);
        const LieAlgebra want = preferred_algebra(b.tag, b.param.value_or(0.0));
        c.require(structure_distance(back, want) <= 1e-8 * std::max(1.0, structure_norm(want)), where + " basis change");
      } catch (const Error& e) {
        c.require(false, where + " " + error_name(e.code()));
      }
    }
  }
  c.detail << runs << " random presentations over " << family_samples().size() << " family samples";
  return report(c);
}

bool completeness_probe() {
  Criterion c{8, "completeness corroboration"};
  std::mt19937_64 rng(808);
  ProbeOptions o;  // T = 1e3
  int bounded_runs = 0;
  for (const auto& row : atlas().table2) {
    const Metric g(atlas().form(row.form).metric.evaluate(row.instance));
    for (double p : atlas().params_for(row.family)) {
      const LieAlgebra a = preferred_algebra(row.family, p);
      for (int i = 0; i < 20; ++i) {
        ++bounded_runs;
        const Vec3 v0 = random_matrix(rng).col(0).normalized() * (8.0 / o.horizon);
        const ProbeVerdict v = integrate(a, g, v0, o).verdict;
        c.require(v.outcome == ProbeOutcome::Bounded, row.id + " " + outcome_name(v.outcome));
      }
    }
  }
  // heuristic corroboration: disagreements are warnings
  const LieAlgebra heis = preferred_algebra<double>(Family::heis);
  for (auto [id, p] : std::vector<std::pair<std::string, ParamMap>>{{"heis.1", {{"eps", -1.0}}}, {"heis.2", {}}, {"heis.3", {}}}) {
    const SweepResult s = sweep(heis, Metric(atlas().form(id).metric.evaluate(p)), o);
    c.warn(s.bounded == 64, id + ": " + std::to_string(s.bounded) + "/64 bounded");
  }
  const SweepResult h1 = sweep(preferred_algebra<double>(Family::h1), Metric(atlas().form("h1.3").metric.evaluate({})), o);
  const SweepResult sol = sweep(preferred_algebra<double>(Family::sol), Metric(atlas().form("sol.7").metric.evaluate({})), o);
  c.warn(h1.blowups >= 1, "h1 flat Lorentzian form: no blow-up direction");
  c.warn(sol.blowups >= 1, "sol plane wave: no blow-up direction");
  c.detail << bounded_runs << " space-form probes bounded; heis Lorentzian sweeps checked; blow-up directions: h1 "
           << h1.blowups << "/64, sol plane wave " << sol.blowups << "/64";
  return report(c);
}

bool plane_wave() {
  Criterion c{9, "plane-wave parameter"};
  int grid = 0;
  for (int k = -64; k <= 72; ++k) {
    const double alpha = k / 16.0;
    if (alpha == 0.0 || alpha == 1.0 || alpha == 0.5) continue;
    ++grid;
    const PlaneWave w = plane_wave_parameter(alpha);
    c.require(w.sigma == alpha * (alpha - 1.0), "sigma at alpha " + fmt(alpha));
    c.require(plane_wave_parameter(1.0 - alpha).sigma == w.sigma, "symmetry at alpha " + fmt(alpha));
    c.require(w.sigma > -0.25, "sigma bound at alpha " + fmt(alpha));
  }
  for (double bad : {0.5, 0.0, 1.0}) {
    bool rejected = false;
    try {
      plane_wave_parameter(bad);
    } catch (const Error& e) {
      rejected = e.code() == ErrorCode::InvalidAlpha;
    }
    c.require(rejected, "alpha " + fmt(bad) + " accepted");
  }
  c.require(plane_wave_parameter(2.0).sigma == 2.0 && plane_wave_parameter(-1.0).sigma == 2.0, "sigma(2), sigma(-1)");
  c.detail << grid << " dyadic alphas, sigma <= -1/4 and alpha in {0,1} rejected";
  return report(c);
}

}  // namespace

int main() {
  bool ok = true;
  ok &= table2();
  ok &= table3();
  ok &= euc2_negative();
  ok &= skew_cross_check();
  ok &= structure_theory();
  ok &= curvature_identities();
  ok &= classifier_round_trip();
  ok &= completeness_probe();
  ok &= plane_wave();
  return ok ? 0 : 1;
}
