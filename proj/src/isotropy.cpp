#include "bianchi/isotropy.hpp"

#include <cmath>

namespace bianchi {

const char* isotropy_name(IsotropyType t) {
  switch (t) {
    case IsotropyType::Elliptic: return "elliptic";
    case IsotropyType::Hyperbolic: return "hyperbolic";
    case IsotropyType::Parabolic: return "parabolic";
  }
  return "";
}

const char* causal_name(Causal c) {
  switch (c) {
    case Causal::Spacelike: return "spacelike";
    case Causal::Timelike: return "timelike";
    case Causal::Lightlike: return "lightlike";
  }
  return "";
}

double skewness_residual(const Mat3& u, const Metric& g) {
  return (g.matrix() * u + u.transpose() * g.matrix()).cwiseAbs().maxCoeff();
}

IsotropyElement classify_type(const Mat3& u, const Metric& g, const Tolerances& tol) {
  const double un = u.norm();
  if (un <= 1e-12) throw Error(ErrorCode::ZeroMatrix, "isotropy candidate is zero");
  if (skewness_residual(u, g) > 1e-9 * un * g.matrix().norm())
    throw Error(ErrorCode::NotSkew, "endomorphism is not skew for the metric");

  IsotropyElement out;
  out.matrix = u;
  const Mat3 v = u / un;
  // Trace and determinant vanish, so the spectrum is {0, l, -l} with l^2 = tr(U^2)/2.
  const double l2 = (v * v).trace() / 2.0;
  const double l = std::sqrt(std::abs(l2));

  if (g.definite()) {
    out.type = IsotropyType::Elliptic;
  } else if (l <= tol.eig) {
    out.type = IsotropyType::Parabolic;
  } else {
    out.type = l2 > 0 ? IsotropyType::Hyperbolic : IsotropyType::Elliptic;
  }

  if (out.type == IsotropyType::Parabolic) {
    Mat3 sq = v * v;
    Eigen::Index best = 0;
    sq.colwise().norm().maxCoeff(&best);
    out.invariant_line = sq.col(best).normalized();
  } else {
    Eigen::JacobiSVD<Mat3> svd(v, Eigen::ComputeFullV);
    out.invariant_line = svd.matrixV().col(2);
  }

  const double q = g(out.invariant_line, out.invariant_line) / g.matrix().norm();
  if (g.definite() || q > tol.eig)
    out.causal = Causal::Spacelike;
  else if (q < -tol.eig)
    out.causal = Causal::Timelike;
  else
    out.causal = Causal::Lightlike;
  if (g.index() == 3) out.causal = Causal::Spacelike;
  return out;
}

SkewDerivationSpace skew_derivations(const LieAlgebra& a, const Metric& g, const Tolerances& tol) {
  Eigen::Matrix<double, 33, 9> sys;
  const double cs = std::max(1.0, structure_norm(a));
  sys.topRows<27>() = derivation_system(a) / cs;
  const double gs = g.matrix().norm();
  for (int unknown = 0; unknown < 9; ++unknown) {
    Mat3 d = Mat3::Zero();
    d(unknown % 3, unknown / 3) = 1.0;
    Mat3 s = g.matrix() * d + d.transpose() * g.matrix();
    int row = 27;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) sys(row++, unknown) = s(i, j) / gs;
  }
  SkewDerivationSpace out;
  Eigen::MatrixXd ns = null_space(sys, tol.rank);
  for (Eigen::Index c = 0; c < ns.cols(); ++c) out.basis.push_back(unflatten<double>(ns.col(c)));
  return out;
}

std::vector<Mat3> metric_constraints_from_isotropy(const Mat3& u, double eps_rank) {
  // unknowns: q00 q01 q02 q11 q12 q22
  const std::array<std::pair<int, int>, 6> slots{{{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}}};
  auto sym = [&](int s) {
    Mat3 q = Mat3::Zero();
    q(slots[s].first, slots[s].second) = 1.0;
    q(slots[s].second, slots[s].first) = 1.0;
    return q;
  };
  Eigen::Matrix<double, 6, 6> sys;
  for (int s = 0; s < 6; ++s) {
    Mat3 q = sym(s);
    Mat3 e = q * u + u.transpose() * q;
    for (int r = 0; r < 6; ++r) sys(r, s) = e(slots[r].first, slots[r].second);
  }
  std::vector<Mat3> out;
  if (sys.norm() == 0) {
    for (int s = 0; s < 6; ++s) out.push_back(sym(s));
    return out;
  }
  Eigen::MatrixXd ns = null_space(sys, eps_rank);
  for (Eigen::Index c = 0; c < ns.cols(); ++c) {
    Mat3 q = Mat3::Zero();
    for (int s = 0; s < 6; ++s) {
      q(slots[s].first, slots[s].second) += ns(s, c);
      if (slots[s].first != slots[s].second) q(slots[s].second, slots[s].first) += ns(s, c);
    }
    out.push_back(q);
  }
  return out;
}

}  // namespace bianchi
