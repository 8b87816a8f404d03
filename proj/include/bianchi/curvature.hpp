#pragma once

#include "bianchi/lie_algebra.hpp"

#include <optional>
#include <random>
#include <vector>

namespace bianchi {

/// Non-degenerate symmetric bilinear form on the algebra.
template <typename Scalar>
class MetricForm {
public:
  explicit MetricForm(const Mat3T<Scalar>& g, double eps_rank = 1e-8) : g_(g) {
    using std::abs;
    Scalar scale = g.cwiseAbs().maxCoeff();
    if (scale == Scalar(0) || (g - g.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
      throw Error(ErrorCode::DegenerateMetric, "metric is not symmetric");
    Eigen::SelfAdjointEigenSolver<Mat3T<Scalar>> es(g);
    auto ev = es.eigenvalues();
    for (int i = 0; i < 3; ++i) {
      if (static_cast<double>(abs(ev(i)) / scale) <= eps_rank)
        throw Error(ErrorCode::DegenerateMetric, "metric is degenerate");
      negative_ += ev(i) < Scalar(0);
    }
    inv_ = g.inverse();
  }

  const Mat3T<Scalar>& matrix() const { return g_; }
  const Mat3T<Scalar>& inverse() const { return inv_; }
  Scalar operator()(const Vec3T<Scalar>& x, const Vec3T<Scalar>& y) const { return x.dot(g_ * y); }

  /// Number of negative directions.
  int index() const { return negative_; }
  bool definite() const { return negative_ == 0 || negative_ == 3; }

private:
  Mat3T<Scalar> g_, inv_;
  int negative_ = 0;
};

using Metric = MetricForm<double>;

/// nabla[i] is the matrix of y -> nabla_{e_i} y, so nabla[i](k, j) = Gamma^k_{ij}.
template <typename Scalar>
struct Connection {
  std::array<Mat3T<Scalar>, 3> nabla;

  Vec3T<Scalar> apply(const Vec3T<Scalar>& x, const Vec3T<Scalar>& y) const {
    Vec3T<Scalar> out = Vec3T<Scalar>::Zero();
    for (int i = 0; i < 3; ++i) out += x(i) * (nabla[i] * y);
    return out;
  }
};

/// Koszul formula for left-invariant fields.
template <typename Scalar>
Connection<Scalar> levi_civita(const LieAlgebra3<Scalar>& a, const MetricForm<Scalar>& g) {
  // c_low[i][j](l) = g([e_i, e_j], e_l)
  auto c_low = [&](int i, int j, int l) {
    return g(a.bracket_basis(i, j), Vec3T<Scalar>(Vec3T<Scalar>::Unit(l)));
  };
  Connection<Scalar> conn;
  for (int i = 0; i < 3; ++i) {
    Mat3T<Scalar> lowered;  // lowered(l, j) = g(nabla_i e_j, e_l)
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l)
        lowered(l, j) = (c_low(i, j, l) - c_low(j, l, i) + c_low(l, i, j)) / Scalar(2);
    conn.nabla[i] = g.inverse() * lowered;
  }
  return conn;
}

/// r[i][j] is the matrix of z -> R(e_i, e_j) z.
template <typename Scalar>
struct RiemannTensor {
  std::array<std::array<Mat3T<Scalar>, 3>, 3> r;

  Mat3T<Scalar> operator()(const Vec3T<Scalar>& x, const Vec3T<Scalar>& y) const {
    Mat3T<Scalar> out = Mat3T<Scalar>::Zero();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) out += x(i) * y(j) * r[i][j];
    return out;
  }

  /// R(e_i, e_j, e_k, e_l) = g(R(e_i, e_j) e_k, e_l).
  Scalar lowered(const MetricForm<Scalar>& g, int i, int j, int k, int l) const {
    return g.matrix().row(l).dot(r[i][j].col(k));
  }
};

template <typename Scalar>
RiemannTensor<Scalar> riemann(const LieAlgebra3<Scalar>& a, const Connection<Scalar>& conn) {
  RiemannTensor<Scalar> t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Mat3T<Scalar> m = conn.nabla[i] * conn.nabla[j] - conn.nabla[j] * conn.nabla[i];
      for (int k = 0; k < 3; ++k) m -= a.c(i, j, k) * conn.nabla[k];
      t.r[i][j] = m;
    }
  return t;
}

template <typename Scalar>
Mat3T<Scalar> ricci(const RiemannTensor<Scalar>& t) {
  Mat3T<Scalar> ric = Mat3T<Scalar>::Zero();
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 3; ++i) ric(j, k) += t.r[i][j](i, k);
  return ric;
}

template <typename Scalar>
Scalar gram(const MetricForm<Scalar>& g, const Vec3T<Scalar>& x, const Vec3T<Scalar>& y) {
  return g(x, x) * g(y, y) - g(x, y) * g(x, y);
}

/// Sectional curvature of span(x, y); throws DegeneratePlane on (near-)null planes.
template <typename Scalar>
Scalar sectional(const MetricForm<Scalar>& g, const RiemannTensor<Scalar>& t, const Vec3T<Scalar>& x,
                 const Vec3T<Scalar>& y, double eps_rank = 1e-8) {
  using std::abs;
  Scalar d = gram(g, x, y);
  Scalar scale = x.squaredNorm() * y.squaredNorm() * g.matrix().squaredNorm();
  if (static_cast<double>(abs(d) / scale) <= eps_rank) throw Error(ErrorCode::DegeneratePlane, "degenerate plane");
  return g(Vec3T<Scalar>(t(x, y) * y), x) / d;
}

template <typename Scalar>
struct PlaneSample {
  Vec3T<Scalar> x, y;
  Scalar k;
};

template <typename Scalar>
struct CurvatureReport {
  Connection<Scalar> connection;
  RiemannTensor<Scalar> riemann;
  Mat3T<Scalar> ricci;
  Scalar scalar;
  std::vector<PlaneSample<Scalar>> sectional_samples;
  int skipped_planes = 0;
  Scalar ricci_residual;            // |Ric - (scalar/3) g| / max(1, |Ric|)
  bool samples_agree = true;        // sampled planes consistent with the Ricci verdict
  std::optional<Scalar> constant_k;
};

/// Ricci-proportionality and plane-sampling tests for constant curvature.
template <typename Scalar>
CurvatureReport<Scalar> curvature_report(const LieAlgebra3<Scalar>& a, const MetricForm<Scalar>& g,
                                         std::uint64_t seed = 0x5eedULL, double eps_rank = 1e-8,
                                         double ricci_tol = 1e-8) {
  using std::abs;
  CurvatureReport<Scalar> rep;
  rep.connection = levi_civita(a, g);
  rep.riemann = riemann(a, rep.connection);
  rep.ricci = ricci(rep.riemann);
  rep.scalar = (g.inverse() * rep.ricci).trace();

  const Scalar k0 = rep.scalar / Scalar(6);
  const Scalar ric_norm = rep.ricci.norm();
  rep.ricci_residual = (rep.ricci - Scalar(2) * k0 * g.matrix()).norm() / std::max<Scalar>(Scalar(1), ric_norm);
  const bool einstein = static_cast<double>(rep.ricci_residual) <= ricci_tol;

  std::vector<std::pair<Vec3T<Scalar>, Vec3T<Scalar>>> planes{
      {Vec3T<Scalar>::Unit(0), Vec3T<Scalar>::Unit(1)},
      {Vec3T<Scalar>::Unit(0), Vec3T<Scalar>::Unit(2)},
      {Vec3T<Scalar>::Unit(1), Vec3T<Scalar>::Unit(2)}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 64; ++n) {
    Vec3T<Scalar> x(Scalar(u(rng)), Scalar(u(rng)), Scalar(u(rng)));
    Vec3T<Scalar> y(Scalar(u(rng)), Scalar(u(rng)), Scalar(u(rng)));
    planes.emplace_back(x, y);
  }

  // Near-null planes amplify round-off, so the agreement test only uses planes
  // whose Gram determinant is comfortably away from zero.
  const Scalar kscale = std::max<Scalar>(Scalar(1), abs(k0));
  for (const auto& [x, y] : planes) {
    Scalar k;
    try {
      k = sectional(g, rep.riemann, x, y, eps_rank);
    } catch (const Error&) {
      ++rep.skipped_planes;
      continue;
    }
    rep.sectional_samples.push_back({x, y, k});
    Scalar rel_gram = abs(gram(g, x, y)) / (x.squaredNorm() * y.squaredNorm() * g.matrix().squaredNorm());
    if (einstein && static_cast<double>(rel_gram) > 1e-4 && abs(k - k0) > Scalar(1e-8) * kscale)
      rep.samples_agree = false;
  }
  if (einstein) rep.constant_k = k0;
  return rep;
}

template <typename Scalar>
std::optional<Scalar> constant_curvature_check(const LieAlgebra3<Scalar>& a, const MetricForm<Scalar>& g) {
  return curvature_report(a, g).constant_k;
}

}  // namespace bianchi
