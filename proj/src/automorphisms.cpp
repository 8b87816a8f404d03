#include "bianchi/automorphisms.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <vector>

namespace bianchi {

namespace {

Mat3 skew(double x, double y, double z) {
  Mat3 s;
  s << 0, -z, y, z, 0, -x, -y, x, 0;
  return s;
}

// e1 -> s e1 + u, N = span(e2, e3) -> V.
Mat3 affine_block(double s, double u2, double u3, const Eigen::Matrix2d& v) {
  Mat3 p = Mat3::Zero();
  p(0, 0) = s;
  p(1, 0) = u2;
  p(2, 0) = u3;
  p.block<2, 2>(1, 1) = v;
  return p;
}

double cond(const Mat3& m) {
  const Vec3 s = Eigen::JacobiSVD<Mat3>(m).singularValues();
  return s(2) > 0 ? s(0) / s(2) : 1e300;
}

}  // namespace

Mat3 sl2_kappa() {
  Mat3 k;
  k << 1, 0, 0, 0, 0, 1, 0, 1, 0;
  return k;
}

double automorphism_residual(const LieAlgebra& a, const Mat3& p) {
  return structure_distance(transport(a, p), a) / std::max(1.0, structure_norm(a));
}

AutomorphismGroup automorphism_group(Family f, double param) {
  AutomorphismGroup g;
  g.family = f;
  g.param = param;
  switch (f) {
    case Family::R3: g.dim = 9; g.components = 2; g.description = "GL(3,R)"; break;
    case Family::so3: g.dim = 3; g.description = "SO(3)"; break;
    case Family::sl2: g.dim = 3; g.components = 2; g.description = "SO(kappa), both components"; break;
    case Family::heis: g.dim = 6; g.description = "[[a,b,0],[c,d,0],[e,f,ad-bc]]"; break;
    case Family::h1: g.dim = 6; g.description = "e1 -> e1+u, span(e2,e3) -> GL(2,R)"; break;
    case Family::psh: g.dim = 4; g.description = "e1 -> e1+u, e2 -> a e2, e3 -> b e2 + a e3"; break;
    case Family::sol:
      g.dim = 4;
      g.components = 2;
      g.description = "e1 -> e1+u with diagonal action on span(e2,e3), or e1 -> -e1+u swapping e2, e3";
      break;
    case Family::euc2:
      g.dim = 4;
      g.components = 2;
      g.description = "e1 -> +-e1+u with conformal action on span(e2,e3)";
      break;
    case Family::e_mu: g.dim = 4; g.description = "e1 -> e1+u, span(e2,e3) -> rotation-scaling"; break;
    case Family::affR_plus_R:
    case Family::h_lambda: g.dim = 4; g.description = "e1 -> e1+u, diagonal on span(e2,e3)"; break;
  }
  return g;
}

Mat3 AutomorphismGroup::element(const Eigen::VectorXd& x, int component) const {
  auto at = [&](int i) { return i < x.size() ? x(i) : 0.0; };
  Eigen::Matrix2d v;
  switch (family) {
    case Family::R3: {
      Mat3 p = Mat3::Identity();
      for (int i = 0; i < 9; ++i) p(i / 3, i % 3) += at(i);
      if (component == 1) p.row(0) *= -1.0;
      return p;
    }
    case Family::so3: return skew(at(0), at(1), at(2)).exp();
    case Family::sl2: {
      Mat3 k = sl2_kappa();
      Mat3 p = (k.inverse() * skew(at(0), at(1), at(2))).exp();
      if (component == 1) {
        Mat3 flip;
        flip << -1, 0, 0, 0, 0, 1, 0, 1, 0;
        p = flip * p;
      }
      return p;
    }
    case Family::heis: {
      double a = 1 + at(0), b = at(1), c = at(2), d = 1 + at(3);
      Mat3 p;
      p << a, b, 0, c, d, 0, at(4), at(5), a * d - b * c;
      return p;
    }
    case Family::h1:
      v << 1 + at(2), at(3), at(4), 1 + at(5);
      return affine_block(1, at(0), at(1), v);
    case Family::psh:
      v << 1 + at(2), at(3), 0, 1 + at(2);
      return affine_block(1, at(0), at(1), v);
    case Family::sol:
      if (component == 1) {
        v << 0, 1 + at(3), 1 + at(2), 0;
        return affine_block(-1, at(0), at(1), v);
      }
      v << 1 + at(2), 0, 0, 1 + at(3);
      return affine_block(1, at(0), at(1), v);
    case Family::euc2:
      if (component == 1) {
        v << 1 + at(2), at(3), at(3), -(1 + at(2));
        return affine_block(-1, at(0), at(1), v);
      }
      [[fallthrough]];
    case Family::e_mu:
      v << 1 + at(2), -at(3), at(3), 1 + at(2);
      return affine_block(1, at(0), at(1), v);
    case Family::affR_plus_R:
    case Family::h_lambda:
      v << 1 + at(2), 0, 0, 1 + at(3);
      return affine_block(1, at(0), at(1), v);
  }
  return Mat3::Identity();
}

Mat3 AutomorphismGroup::sample(std::mt19937_64& rng, double max_cond) const {
  // Entries entering as 1 + x are drawn as +-r - 1 so both signs of every
  // scaling are reached.
  std::vector<int> scales;
  switch (family) {
    case Family::R3: scales = {0, 4, 8}; break;
    case Family::heis: scales = {0, 3}; break;
    case Family::h1: scales = {2, 5}; break;
    case Family::psh:
    case Family::euc2:
    case Family::e_mu: scales = {2}; break;
    case Family::sol:
    case Family::affR_plus_R:
    case Family::h_lambda: scales = {2, 3}; break;
    default: break;
  }
  std::uniform_real_distribution<double> u(-0.8, 0.8), r(0.5, 2.0);
  std::uniform_int_distribution<int> comp(0, components - 1);
  for (;;) {
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = u(rng);
    for (int i : scales) x(i) = ((rng() & 1U) ? r(rng) : -r(rng)) - 1.0;
    Mat3 p = element(x, comp(rng));
    if (cond(p) <= max_cond) return p;
  }
}

}  // namespace bianchi
