#include "bianchi/normal_form.hpp"

#include "bianchi/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace bianchi {

namespace {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

constexpr double kZero = 1e-8;  // relative size below which an entry counts as zero

double sgn(double x) { return x < 0 ? -1.0 : 1.0; }

/// Closed-form outcome in the preferred basis: c * q^T g q is the form.
struct Reduction {
  Mat3 q = Mat3::Identity();
  double c = 1.0;
  std::string form;
  ParamMap signs;
};

/// Zero tests that remember whether any decision was close.
struct Decider {
  bool boundary = false;
  bool zero(double x, double scale) {
    const double r = std::abs(x) / std::max(scale, 1e-300);
    if (r > kZero && r <= 100 * kZero) boundary = true;
    return r <= kZero;
  }
};

Mat3 affine(double s, const Vec2& u, const Mat2& v) {
  Mat3 p = Mat3::Zero();
  p(0, 0) = s;
  p.block<2, 1>(1, 0) = u;
  p.block<2, 2>(1, 1) = v;
  return p;
}

struct Blocks {
  double g11;
  Vec2 b;
  Mat2 h;
};

Blocks blocks(const Mat3& g) { return {g(0, 0), g.block<2, 1>(1, 0), g.block<2, 2>(1, 1)}; }

bool singular_block(const Mat2& h, double scale, Decider& dec) {
  Eigen::JacobiSVD<Mat2> svd(h);
  return dec.zero(svd.singularValues()(1), scale);
}

/// e1 -> e1 - h^{-1} b, making e1 orthogonal to span(e2, e3).
Mat3 perp_translation(const Mat3& g) {
  auto [g11, b, h] = blocks(g);
  return affine(1.0, -h.inverse() * b, Mat2::Identity());
}

struct RankOne {
  double k;
  Vec2 w, n;  // h ~ k w w^T, n spans the kernel
};

RankOne rank_one(const Mat2& h) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(h);
  const int i = std::abs(es.eigenvalues()(1)) >= std::abs(es.eigenvalues()(0)) ? 1 : 0;
  return {es.eigenvalues()(i), es.eigenvectors().col(i), es.eigenvectors().col(1 - i)};
}

// With c V^T h V already at its target, pick e1 -> e1 + u so that the first
// row becomes (0, bstar).
Mat3 null_completion(const Mat3& g, const Mat2& v, double c, const Vec2& bstar) {
  auto [g11, b, h] = blocks(g);
  auto [k, w, n] = rank_one(h);
  const Vec2 target = v.transpose().inverse() * bstar / c;
  const double t = w.dot(target - b) / k;
  const double r = -(g11 + 2 * t * b.dot(w) + t * t * k) / (2 * b.dot(n));
  return affine(1.0, t * w + r * n, v);
}

Reduction make(const Mat3& q, double c, std::string form, ParamMap signs = {}) {
  return {q, c, std::move(form), std::move(signs)};
}

// h(lambda), including lambda = 0: diagonal action on span(e2, e3).
Reduction reduce_hl(const Mat3& g, Decider& dec) {
  auto [g11, b, h] = blocks(g);
  if (singular_block(h, g.norm(), dec)) {
    auto [k, w, n] = rank_one(h);
    const double nb = n.dot(b);
    if (dec.zero(w(1), 1.0)) {  // kernel along e3
      const double c = 1.0 / (k * w(0) * w(0));
      Mat2 v = Vec2(1.0, n(1) / (c * nb)).asDiagonal();
      return make(null_completion(g, v, c, Vec2(0, 1)), c, "hl.9");
    }
    if (dec.zero(w(0), 1.0)) {  // kernel along e2
      const double c = 1.0 / (k * w(1) * w(1));
      Mat2 v = Vec2(n(0) / (c * nb), 1.0).asDiagonal();
      return make(null_completion(g, v, c, Vec2(1, 0)), c, "hl.10");
    }
    const double alpha = (w(0) * b(1) - w(1) * b(0)) / (k * w(0) * w(0) * w(1));
    const double c = 1.0 / (k * alpha * alpha * w(0) * w(0));
    Mat2 v = Vec2(alpha, alpha * w(0) / w(1)).asDiagonal();
    return make(null_completion(g, v, c, Vec2(0, 1)), c, "hl.8");
  }
  const Mat3 t = perp_translation(g);
  const Mat3 gt = t.transpose() * g * t;
  const double q0 = gt(0, 0);
  const Mat2 ht = gt.block<2, 2>(1, 1);
  if (dec.zero(ht(0, 1), ht.norm())) {
    const int pos = (q0 > 0) + (ht(0, 0) > 0) + (ht(1, 1) > 0);
    const double sigma = pos >= 2 ? 1.0 : -1.0;
    const double c = sigma / std::abs(q0);
    Mat2 v = Vec2(1 / std::sqrt(std::abs(c * ht(0, 0))), 1 / std::sqrt(std::abs(c * ht(1, 1)))).asDiagonal();
    const Mat3 q = t * affine(1, Vec2::Zero(), v);
    const bool s1 = c * ht(0, 0) > 0, s2 = c * ht(1, 1) > 0;
    if (c * q0 < 0) return make(q, c, "hl.7");
    if (!s1) return make(q, c, "hl.6");
    return make(q, c, "hl.5", {{"eps", s2 ? 1.0 : -1.0}});
  }
  const double c = 1.0 / q0;
  const Mat2 hp = c * ht;
  double alpha, beta;
  std::string form;
  ParamMap signs;
  if (dec.zero(hp(0, 0), hp.norm())) {
    if (dec.zero(hp(1, 1), hp.norm())) {
      alpha = 1 / hp(0, 1);
      beta = 1;
      form = "hl.4";
    } else {
      beta = 1 / std::sqrt(std::abs(hp(1, 1)));
      alpha = 1 / (beta * hp(0, 1));
      form = "hl.3";
      signs["eps"] = sgn(hp(1, 1));
    }
  } else {
    alpha = 1 / std::sqrt(std::abs(hp(0, 0)));
    beta = 1 / (alpha * hp(0, 1));
    form = hp(0, 0) > 0 ? "hl.1" : "hl.2";
  }
  return make(t * affine(1, Vec2::Zero(), Vec2(alpha, beta).asDiagonal()), c, form, signs);
}

// sol: the h(-1) reduction plus the component e1 -> -e1, e2 <-> e3.
Reduction reduce_sol(const Mat3& g, Decider& dec) {
  Reduction r = reduce_hl(g, dec);
  auto needs_swap = [&](const Reduction& x) {
    if (x.form == "hl.3" || x.form == "hl.6" || x.form == "hl.10") return true;
    if (x.form != "hl.2") return false;
    const Mat3 m = x.c * x.q.transpose() * g * x.q;
    return m(2, 2) > 0;
  };
  if (needs_swap(r)) {
    Mat2 v;
    v << 0, 1, 1, 0;
    const Mat3 s = affine(-1, Vec2::Zero(), v);
    Reduction r2 = reduce_hl(s.transpose() * g * s, dec);
    r2.q = s * r2.q;
    r = r2;
  }
  static const std::map<std::string, std::string> ids{{"hl.1", "sol.1"}, {"hl.2", "sol.2"}, {"hl.4", "sol.3"},
                                                      {"hl.5", "sol.4"}, {"hl.7", "sol.5"}, {"hl.8", "sol.6"},
                                                      {"hl.9", "sol.7"}};
  auto it = ids.find(r.form);
  if (it == ids.end()) throw Error(ErrorCode::ReductionFailed, "sol reduction left " + r.form);
  r.form = it->second;
  return r;
}

Reduction reduce_h1(const Mat3& g, Decider& dec) {
  auto [g11, b, h] = blocks(g);
  if (singular_block(h, g.norm(), dec)) {
    auto [k, w, n] = rank_one(h);
    const double c = 1.0 / k;
    const double rho = 1.0 / (c * n.dot(b));
    Mat2 v;
    v.col(0) = rho * n;
    v.col(1) = w;
    return make(null_completion(g, v, c, Vec2(1, 0)), c, "h1.3");
  }
  const Mat3 t = perp_translation(g);
  const Mat3 gt = t.transpose() * g * t;
  const double q0 = gt(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat2> es(gt.block<2, 2>(1, 1));
  const Vec2 l = es.eigenvalues();
  Mat2 r = es.eigenvectors();
  double c;
  std::string form = "h1.1";
  ParamMap signs{{"eps", 1.0}};
  if (l(0) * l(1) > 0) {
    if (sgn(q0) == sgn(l(0))) {
      c = 1.0 / q0;
    } else {
      c = sgn(l(0)) / std::abs(q0);
      form = "h1.2";
      signs.clear();
    }
  } else {
    c = 1.0 / q0;
    if (c * l(0) < 0) r.col(0).swap(r.col(1));
    signs["eps"] = -1.0;
  }
  const Vec2 lc = (r.transpose() * gt.block<2, 2>(1, 1) * r).diagonal() * c;
  Mat2 v = r * Vec2(1 / std::sqrt(std::abs(lc(0))), 1 / std::sqrt(std::abs(lc(1)))).asDiagonal();
  return make(t * affine(1, Vec2::Zero(), v), c, form, signs);
}

// psh: V = [[a, b], [0, a]] on span(e2, e3).
Reduction reduce_psh(const Mat3& g, Decider& dec) {
  auto [g11, bv, h] = blocks(g);
  if (singular_block(h, g.norm(), dec)) {
    if (dec.zero(h(0, 0), h.norm())) {
      const double a = bv(0) / h(1, 1);
      const double c = 1.0 / (a * a * h(1, 1));
      return make(null_completion(g, a * Mat2::Identity(), c, Vec2(1, 0)), c, "psh.5");
    }
    const double p = h(0, 0), r = h(0, 1);
    const double a = (bv(1) - bv(0) * r / p) / p;
    const double c = 1.0 / (a * a * p);
    Mat2 v;
    v << a, -a * r / p, 0, a;
    return make(null_completion(g, v, c, Vec2(0, 1)), c, "psh.4");
  }
  const Mat3 t = perp_translation(g);
  const Mat3 gt = t.transpose() * g * t;
  const double c = 1.0 / gt(0, 0);
  const Mat2 hp = c * gt.block<2, 2>(1, 1);
  const double p = hp(0, 0), r = hp(0, 1), s = hp(1, 1);
  Mat2 v;
  if (!dec.zero(p, hp.norm())) {
    const double a = 1 / std::sqrt(std::abs(p));
    v << a, -a * r / p, 0, a;
    return make(t * affine(1, Vec2::Zero(), v), c, p > 0 ? "psh.1" : "psh.2");
  }
  const double a = 1 / std::sqrt(std::abs(r));
  v << a, -a * s / (2 * r), 0, a;
  return make(t * affine(1, Vec2::Zero(), v), c, "psh.3", {{"eps", sgn(r)}});
}

// e(mu), mu >= 0: rotation-scalings on span(e2, e3).
Reduction reduce_emu(const Mat3& g, Decider& dec) {
  auto [g11, b, h] = blocks(g);
  if (singular_block(h, g.norm(), dec)) {
    auto [k, w, n0] = rank_one(h);
    const Vec2 n(w(1), -w(0));
    const double rho = n.dot(b) / k;
    Mat2 v;
    v.col(0) = rho * n;
    v.col(1) = rho * w;
    const double c = 1.0 / (k * rho * rho);
    return make(null_completion(g, v, c, Vec2(1, 0)), c, "emu.3");
  }
  const Mat3 t = perp_translation(g);
  const Mat3 gt = t.transpose() * g * t;
  const double q0 = gt(0, 0);
  Eigen::SelfAdjointEigenSolver<Mat2> es(gt.block<2, 2>(1, 1));
  Vec2 l = es.eigenvalues();
  Mat2 r = es.eigenvectors();
  double c;
  std::string form = "emu.1";
  if (l(0) * l(1) > 0) {
    if (sgn(q0) == sgn(l(0))) {
      c = 1.0 / q0;
    } else {
      c = sgn(l(0)) / std::abs(q0);
      form = "emu.2";
    }
    if (std::abs(l(1)) > std::abs(l(0))) {  // the larger one goes to e2
      r.col(0).swap(r.col(1));
      std::swap(l(0), l(1));
    }
  } else {
    c = 1.0 / q0;
    if (c * l(0) < 0) {
      r.col(0).swap(r.col(1));
      std::swap(l(0), l(1));
    }
  }
  if (r.determinant() < 0) r.col(1) *= -1.0;
  const Mat2 v = r / std::sqrt(std::abs(c * l(0)));
  return make(t * affine(1, Vec2::Zero(), v), c, form);
}

Reduction reduce_heis(const Mat3& g, Decider& dec) {
  const double g33 = g(2, 2);
  if (!dec.zero(g33, g.norm())) {
    Mat3 t = Mat3::Identity();
    t(2, 0) = -g(0, 2) / g33;
    t(2, 1) = -g(1, 2) / g33;
    const Mat3 gt = t.transpose() * g * t;
    Eigen::SelfAdjointEigenSolver<Mat2> es(gt.block<2, 2>(0, 0));
    Vec2 l = es.eigenvalues();
    Mat2 r = es.eigenvectors();
    double sigma;
    std::string form;
    if (l(0) * l(1) > 0) {
      sigma = sgn(l(0));
      form = "heis.1";
    } else {
      sigma = sgn(g33);
      if (sigma * l(0) < 0) {
        r.col(0).swap(r.col(1));
        std::swap(l(0), l(1));
      }
      form = "heis.2";
    }
    Mat2 m0 = r * Vec2(1 / std::sqrt(std::abs(l(0))), 1 / std::sqrt(std::abs(l(1)))).asDiagonal();
    const double s = 1.0 / std::sqrt(m0.determinant() * m0.determinant() * std::abs(g33));
    const Mat2 m = s * m0;
    Mat3 blk = Mat3::Zero();
    blk.block<2, 2>(0, 0) = m;
    blk(2, 2) = m.determinant();
    const double c = sigma / (s * s);
    ParamMap signs;
    if (form == "heis.1") signs["eps"] = sgn(c * g33);
    return make(t * blk, c, form, signs);
  }
  // Null centre.
  const double g13 = g(0, 2), g23 = g(1, 2);
  Vec3 f1(-g23, g13, 0), f2(g13, g23, 0);
  const double phi = f1.dot(g * f1);
  f2 -= (f1.dot(g * f2) / phi) * f1;
  const double gz = f2.dot(g.col(2));
  f2(2) -= f2.dot(g * f2) / (2 * gz);
  const double c = 1.0 / phi;
  double d = f1(0) * f2(1) - f1(1) * f2(0);
  if (c * d * gz < 0) {
    f1 = -f1;
    d = -d;
  }
  const double rho = 1.0 / std::sqrt(c * d * gz);
  f2 *= rho;
  Mat3 q;
  q.col(0) = f1;
  q.col(1) = f2;
  q.col(2) = Vec3(0, 0, f1(0) * f2(1) - f1(1) * f2(0));
  return make(q, c, "heis.3");
}

Reduction reduce_r3(const Mat3& g) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(g);
  Vec3 l = es.eigenvalues();
  const int pos = (l.array() > 0).count();
  const double sigma = pos >= 2 ? 1.0 : -1.0;
  std::vector<int> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sigma * l(a) > sigma * l(b); });
  Mat3 q;
  for (int i = 0; i < 3; ++i) q.col(i) = es.eigenvectors().col(order[i]) / std::sqrt(std::abs(l(order[i])));
  return make(q, sigma, "R3.1", {{"eps", sigma * l(order[2]) > 0 ? 1.0 : -1.0}});
}

// so(3): rotations only. Majority sign positive; a repeated value comes first,
// otherwise positive values ascending and then the negative one.
Reduction reduce_so3(const Mat3& g, Decider& dec) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(g);
  const Vec3 l = es.eigenvalues();
  const double sigma = (l.array() > 0).count() >= 2 ? 1.0 : -1.0;
  const Vec3 m = sigma * l;
  std::vector<int> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if ((m(a) > 0) != (m(b) > 0)) return m(a) > 0;
    return m(a) < m(b);
  });
  const double s = m.cwiseAbs().maxCoeff();
  // positives occupy order[0..1] at least
  for (int i = 0; i < 2; ++i) {
    const int a = order[i], b = order[i + 1];
    if ((m(a) > 0) == (m(b) > 0) && dec.zero(m(a) - m(b), s)) {
      if (i == 1) std::rotate(order.begin(), order.begin() + 1, order.end());
      break;
    }
  }
  Mat3 q;
  for (int i = 0; i < 3; ++i) q.col(i) = es.eigenvectors().col(order[i]);
  if (q.determinant() < 0) q.col(2) *= -1.0;
  return make(q, 1.0 / l(order[0]), "so3.1");
}

// sl(2,R): frames orthonormal for kappa = (e1)^2 + 2(e2e3), sorted by the
// Segre type of B = kappa^{-1} g.
Vec3 null_vector(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullV);
  return svd.matrixV().col(2);
}

Mat3 sl2_frame(const Vec3& s1, const Vec3& s2, const Vec3& t) {
  Mat3 p;
  p.col(0) = s1;
  p.col(1) = (s2 + t) / std::sqrt(2.0);
  p.col(2) = (s2 - t) / std::sqrt(2.0);
  if (p.determinant() < 0) p.col(0) *= -1.0;
  return p;
}

Eigen::Matrix<double, 3, 2> kappa_complement(const Vec3& s1) {
  const Mat3 k = sl2_kappa();
  Eigen::Matrix<double, 1, 3> row = (k * s1).transpose();
  Eigen::JacobiSVD<Eigen::Matrix<double, 1, 3>> svd(row, Eigen::ComputeFullV);
  return svd.matrixV().rightCols<2>();
}

Reduction reduce_sl2(const Mat3& g, Decider& dec) {
  const Mat3 k = sl2_kappa();
  const Mat3 bm = k * g;  // kappa^{-1} = kappa
  const double scale = bm.norm();
  const Spectrum sp = eigen3(bm);
  auto kq = [&](const Vec3& x, const Vec3& y) { return x.dot(k * y); };
  auto unit = [&](Vec3 v) { return Vec3(v / std::sqrt(std::abs(kq(v, v)))); };

  // A 2-block splits its double root by about sqrt(machine eps).
  if (sp.kind == Spectrum::Kind::RealAndComplexPair && sp.im > 1e-6 * scale) {
    const Vec3 s1 = unit(null_vector(bm - sp.real * Mat3::Identity()));
    const auto pl = kappa_complement(s1);
    Mat2 gram = pl.transpose() * k * pl;
    Eigen::SelfAdjointEigenSolver<Mat2> es(gram);
    Vec3 sp2 = unit(pl * es.eigenvectors().col(1)), tp = unit(pl * es.eigenvectors().col(0));
    const double x = sp2.dot(g * sp2), y = sp2.dot(g * tp), z = tp.dot(g * tp);
    const double phi = 0.5 * std::atanh(-(x + z) / (2 * y));
    Vec3 s2 = std::cosh(phi) * sp2 + std::sinh(phi) * tp;
    const Vec3 t = std::sinh(phi) * sp2 + std::cosh(phi) * tp;
    const double c = 1.0 / s1.dot(g * s1);
    if (c * s2.dot(g * t) < 0) s2 = -s2;
    return make(sl2_frame(s1, s2, t), c, "sl2.3");
  }

  Vec3 r = sp.kind == Spectrum::Kind::ThreeReal ? Vec3(sp.values[0], sp.values[1], sp.values[2])
                                                  : Vec3(sp.real, sp.re, sp.re);
  std::sort(r.data(), r.data() + 3);
  const Mat3 id = Mat3::Identity();

  auto jordan_two = [&](const Vec3& s1raw, double b1, const Vec3& m, double b) {
    const Vec3 s1 = unit(s1raw);
    const auto pl = kappa_complement(s1);
    Vec3 y = pl.col(0);
    if (std::abs(kq(y, m)) < 0.5 * std::abs(kq(pl.col(1), m))) y = pl.col(1);
    Vec3 kk = y - (kq(y, y) / (2 * kq(y, m))) * m;
    kk /= kq(kk, m);
    const double c = 1.0 / b1;
    const double alpha = b / b1;
    const Mat3 n = c * bm - alpha * id;
    const double gamma = kq(n * kk, kk);
    const double lam = std::sqrt(std::abs(gamma));
    Mat3 p;
    p.col(0) = s1;
    p.col(1) = kk / lam;
    p.col(2) = lam * m;
    if (p.determinant() < 0) p.col(0) *= -1.0;
    return make(p, c, "sl2.4", {{"eps", sgn(gamma)}});
  };

  // Triple eigenvalue: scalar, one 2-block, or a 3-block.
  if (r(2) - r(0) <= 1e-4 * scale) {
    const double b = bm.trace() / 3;
    const Mat3 n = bm - b * id;
    if (n.norm() > 1e-6 * scale) {
      if ((n * n).norm() <= 1e-6 * scale * scale) {
        Eigen::JacobiSVD<Mat3> svd(n, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Vec3 m = svd.matrixU().col(0);
        Eigen::Matrix<double, 3, 2> ker = svd.matrixV().rightCols<2>();
        Mat2 gram = ker.transpose() * k * ker;
        Eigen::SelfAdjointEigenSolver<Mat2> es(gram);
        return jordan_two(ker * es.eigenvectors().col(1), b, m, b);
      }
      const double c = 1.0 / b;
      const Mat3 nn = c * bm - id;
      const Mat3 n2 = nn * nn;
      Vec3 u = Vec3::Unit(0);
      double best = 0;
      for (int i = 0; i < 3; ++i) {
        const double v = kq(n2 * Vec3::Unit(i), Vec3::Unit(i));
        if (std::abs(v) > std::abs(best)) best = v, u = Vec3::Unit(i);
      }
      if (std::abs(best) < 1e-6) {
        const Vec3 w = (Vec3::Unit(0) + Vec3::Unit(1) + Vec3::Unit(2)).normalized();
        u = w;
        best = kq(n2 * w, w);
      }
      if (best <= 0) throw Error(ErrorCode::ReductionFailed, "sl2 three-block with negative square form");
      const double k0 = kq(u, u), k1 = kq(nn * u, u), k2 = best;
      const double a = -k1 / (2 * k2);
      const double bb = -(k0 + 2 * a * k1 + a * a * k2) / (2 * k2);
      Vec3 e3 = std::sqrt(2.0 / k2) * (u + a * nn * u + bb * n2 * u);
      Mat3 p;
      p.col(2) = e3;
      p.col(0) = nn * e3 / std::sqrt(2.0);
      p.col(1) = nn * p.col(0) / std::sqrt(2.0);
      if (p.determinant() < 0) p = -p;
      return make(p, c, "sl2.5");
    }
  }

  // Collect a kappa-orthonormal eigenframe, or detect a 2-block.
  std::vector<std::pair<Vec3, double>> frame;  // vector, eigenvalue
  const bool scalar = r(2) - r(0) <= 1e-4 * scale;
  if (scalar) {
    frame = {{Vec3::Unit(0), r.mean()},
             {(Vec3::Unit(1) + Vec3::Unit(2)) / std::sqrt(2.0), r.mean()},
             {(Vec3::Unit(1) - Vec3::Unit(2)) / std::sqrt(2.0), r.mean()}};
  } else {
    int pair = -1;
    if (r(1) - r(0) <= 1e-6 * scale) pair = 0;
    if (r(2) - r(1) <= 1e-6 * scale) pair = 1;
    if (pair >= 0) {
      dec.boundary = dec.boundary || (r(pair + 1) - r(pair) > 1e-8 * scale);
      const double b = 0.5 * (r(pair) + r(pair + 1));
      const double b1 = r(pair == 0 ? 2 : 0);
      const Mat3 n = bm - b * id;
      Eigen::JacobiSVD<Mat3> svd(n, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vec3 s1 = null_vector(bm - b1 * id);
      if (svd.singularValues()(1) > 1e-6 * scale) {
        return jordan_two(s1, b1, svd.matrixV().col(2), b);
      }
      Eigen::Matrix<double, 3, 2> ker = svd.matrixV().rightCols<2>();
      Mat2 gram = ker.transpose() * k * ker;
      Eigen::SelfAdjointEigenSolver<Mat2> es(gram);
      frame = {{s1, b1}, {ker * es.eigenvectors().col(0), b}, {ker * es.eigenvectors().col(1), b}};
    } else {
      for (int i = 0; i < 3; ++i) frame.push_back({null_vector(bm - r(i) * id), r(i)});
    }
  }
  std::vector<std::pair<Vec3, double>> space;  // unit spacelike vector, g-value
  Vec3 t = Vec3::Zero();
  double mt = 0;
  for (auto& [v, b] : frame) {
    const double kv = kq(v, v);
    const Vec3 u = unit(v);
    if (kv > 0)
      space.push_back({u, b});
    else
      t = u, mt = -b;
  }
  if (space.size() != 2) throw Error(ErrorCode::ReductionFailed, "sl2 eigenframe has wrong causal type");
  auto [va, ma] = space[0];
  auto [vb, mb] = space[1];
  if (sgn(ma) == sgn(mb)) {
    if (std::abs(ma) > std::abs(mb)) std::swap(va, vb), std::swap(ma, mb);
    return make(sl2_frame(va, vb, t), 1.0 / ma, "sl2.1");
  }
  if (sgn(ma) == sgn(mt)) std::swap(va, vb), std::swap(ma, mb);
  return make(sl2_frame(va, vb, t), 1.0 / ma, "sl2.2");
}

Reduction closed_form(Family f, const Mat3& g, Decider& dec) {
  switch (f) {
    case Family::R3: return reduce_r3(g);
    case Family::so3: return reduce_so3(g, dec);
    case Family::sl2: return reduce_sl2(g, dec);
    case Family::heis: return reduce_heis(g, dec);
    case Family::sol: return reduce_sol(g, dec);
    case Family::h1: return reduce_h1(g, dec);
    case Family::psh: return reduce_psh(g, dec);
    case Family::euc2:
    case Family::e_mu: return reduce_emu(g, dec);
    case Family::affR_plus_R:
    case Family::h_lambda: return reduce_hl(g, dec);
  }
  throw Error(ErrorCode::ReductionFailed, "no reduction for family");
}

struct Fitted {
  ParamMap params;
  Mat3 canonical;
  double residual;  // max entry, relative to max(1, |canonical|)
};

Fitted fit_form(const NormalFormSpec& spec, const Mat3& m, const ParamMap& signs) {
  Fitted f;
  f.params = spec.metric.fit(m, signs);
  f.canonical = spec.metric.evaluate(f.params);
  f.residual = (m - f.canonical).cwiseAbs().maxCoeff() / std::max(1.0, f.canonical.cwiseAbs().maxCoeff());
  return f;
}

// Simplex search; returns the best value and leaves the minimizer in x.
double nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd& x, double step,
                   int max_iter, double ftol) {
  const int n = static_cast<int>(x.size());
  std::vector<Eigen::VectorXd> s(n + 1, x);
  std::vector<double> v(n + 1);
  for (int i = 0; i < n; ++i) s[i + 1](i) += step;
  for (int i = 0; i <= n; ++i) v[i] = f(s[i]);
  std::vector<int> idx(n + 1);
  for (int it = 0; it < max_iter; ++it) {
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
    const int lo = idx[0], hi = idx[n], nh = idx[n - 1];
    if (v[hi] - v[lo] <= ftol) break;
    Eigen::VectorXd cen = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) cen += s[idx[i]];
    cen /= n;
    Eigen::VectorXd xr = cen + (cen - s[hi]);
    const double fr = f(xr);
    if (fr < v[lo]) {
      Eigen::VectorXd xe = cen + 2.0 * (cen - s[hi]);
      const double fe = f(xe);
      if (fe < fr) s[hi] = xe, v[hi] = fe;
      else s[hi] = xr, v[hi] = fr;
    } else if (fr < v[nh]) {
      s[hi] = xr, v[hi] = fr;
    } else {
      Eigen::VectorXd xc = fr < v[hi] ? Eigen::VectorXd(cen + 0.5 * (xr - cen)) : Eigen::VectorXd(cen + 0.5 * (s[hi] - cen));
      const double fc = f(xc);
      if (fc < std::min(fr, v[hi])) {
        s[hi] = xc, v[hi] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == lo) continue;
          s[i] = s[lo] + 0.5 * (s[i] - s[lo]);
          v[i] = f(s[i]);
        }
      }
    }
  }
  const int best = static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
  x = s[best];
  return v[best];
}

struct SearchResult {
  Reduction red;
  double residual = 1e300;
};

// Orbit-distance minimization over automorphism parameters and log|c|.
SearchResult orbit_search(Family fam, double param, const Mat3& g, const ReduceOptions& opt) {
  const AutomorphismGroup grp = automorphism_group(fam, param);
  struct Combo {
    const NormalFormSpec* spec;
    ParamMap signs;
    int component;
    double csign;
  };
  std::vector<Combo> combos;
  for (const NormalFormSpec* s : atlas().forms_for(fam))
    for (const auto& signs : s->metric.sign_choices())
      for (int comp = 0; comp < grp.components; ++comp)
        for (double cs : {1.0, -1.0}) combos.push_back({s, signs, comp, cs});

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SearchResult best;
  for (int restart = 0; restart < opt.restarts; ++restart) {
    const Combo& cb = combos[restart % combos.size()];
    auto objective = [&](const Eigen::VectorXd& x) {
      const Mat3 p = grp.element(x.head(grp.dim), cb.component);
      const double c = cb.csign * std::exp(x(grp.dim));
      const Mat3 m = c * p.transpose() * g * p;
      const ParamMap params = cb.spec->metric.fit(m, cb.signs);
      double val = (m - cb.spec->metric.evaluate(params)).squaredNorm();
      if (!cb.spec->in_domain(params, opt.tol.param)) val += 1.0;
      return val;
    };
    Eigen::VectorXd x(grp.dim + 1);
    for (int i = 0; i < x.size(); ++i) x(i) = u(rng);
    double val = nelder_mead(objective, x, 0.3, 4000, 1e-26);
    val = nelder_mead(objective, x, 0.01, 4000, 1e-28);
    const Mat3 p = grp.element(x.head(grp.dim), cb.component);
    const double c = cb.csign * std::exp(x(grp.dim));
    const Fitted fit = fit_form(*cb.spec, c * p.transpose() * g * p, cb.signs);
    if (val < 1.0 && fit.residual < best.residual) {
      best.residual = fit.residual;
      best.red = make(p, c, cb.spec->id, cb.signs);
    }
    if (best.residual < 1e-10) break;
  }
  return best;
}

// Constraints the matched parameters are compared against.
bool near_boundary(const NormalFormMatch& m, double tol) {
  auto close = [&](const Constraint& c) {
    const double d = std::abs(c.lhs(m.params) - c.value);
    return d > tol && d <= 100 * tol;
  };
  const Atlas& at = atlas();
  for (const auto& clause : at.form(m.form_id).domain)
    for (const auto& c : clause)
      if (close(c)) return true;
  for (const auto& row : at.table2)
    if (row.family == m.family && row.form == m.form_id)
      for (const auto& c : row.where)
        if (close(c)) return true;
  for (const auto& row : at.table3)
    if (row.family == m.family)
      for (const auto& cl : row.match)
        if (cl.form == m.form_id)
          for (const auto& c : cl.where)
            if (close(c)) return true;
  return false;
}

}  // namespace

NormalFormMatch reduce(const LieAlgebra& a, const Mat3& g, const BianchiClass& cls, const ReduceOptions& opt) {
  const Mat3 p = cls.basis_change;
  const Mat3 gp = p.transpose() * (0.5 * (g + g.transpose())) * p;
  const double scale = gp.norm();
  if (!(scale > 0)) throw Error(ErrorCode::DegenerateMetric, "zero metric");
  const Mat3 gn = gp / scale;
  const double param = cls.param.value_or(0.0);
  const Atlas& at = atlas();

  NormalFormMatch out;
  out.family = cls.tag;
  out.family_param = cls.param;

  auto accept = [&](const Reduction& r, bool boundary, bool fallback) {
    const NormalFormSpec& spec = at.form(r.form);
    const Fitted fit = fit_form(spec, r.c * r.q.transpose() * gn * r.q, r.signs);
    out.form_id = spec.id;
    out.display = spec.display;
    out.canonical = fit.canonical;
    out.params = fit.params;
    out.scale = r.c / scale;
    out.witness = p * r.q;
    out.residual = fit.residual;
    out.fallback = fallback;
    out.boundary = boundary || near_boundary(out, opt.tol.param);
    // Inputs already in normal form keep the classifier's basis and scale 1.
    if ((gp - fit.canonical).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, scale)) {
      out.witness = p;
      out.scale = 1.0;
      out.residual = 0.0;
    }
    const LieAlgebra target = preferred_algebra(cls.tag, param);
    const double aut = structure_distance(transport(a, out.witness), target) / std::max(1.0, structure_norm(target));
    return spec.in_domain(fit.params, opt.tol.param) && fit.residual <= opt.tol.witness && aut <= 1e-7;
  };

  if (!opt.force_fallback) {
    try {
      Decider dec;
      const Reduction r = closed_form(cls.tag, gn, dec);
      if (accept(r, dec.boundary || cls.boundary, false)) return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ReductionFailed) throw;
    }
  }
  const SearchResult s = orbit_search(cls.tag, param, gn, opt);
  if (s.residual > 1e-5) {
    std::string msg = "orbit search residual " + std::to_string(s.residual);
    if (!s.red.form.empty()) msg += " (best form " + s.red.form + ")";
    throw Error(ErrorCode::ReductionFailed, msg);
  }
  if (!opt.force_fallback) {
    // Pick the same representative the closed form would.
    try {
      const Mat3 g1 = s.red.c * s.red.q.transpose() * gn * s.red.q;
      const double n1 = g1.norm();
      Decider dec;
      Reduction r = closed_form(cls.tag, g1 / n1, dec);
      r.q = s.red.q * r.q;
      r.c = s.red.c * r.c / n1;
      if (accept(r, true, true)) return out;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ReductionFailed) throw;
    }
  }
  accept(s.red, true, true);
  return out;
}

double witness_residual(const LieAlgebra& a, const Mat3& g, const NormalFormMatch& m) {
  const Mat3 moved = m.scale * m.witness.transpose() * g * m.witness;
  const double metric = (moved - m.canonical).cwiseAbs().maxCoeff() / std::max(1.0, m.canonical.cwiseAbs().maxCoeff());
  const LieAlgebra target = preferred_algebra(m.family, m.family_param.value_or(0.0));
  const double brackets = structure_distance(transport(a, m.witness), target) / std::max(1.0, structure_norm(target));
  return std::max(metric, brackets);
}

const char* completeness_name(Completeness c) {
  switch (c) {
    case Completeness::Complete: return "complete";
    case Completeness::Incomplete: return "incomplete";
    case Completeness::Unknown: return "unknown";
  }
  return "unknown";
}

KillingReport lookup_tables(const NormalFormMatch& nf, const Tolerances& tol) {
  const Atlas& at = atlas();
  KillingReport k;
  for (const auto& row : at.table2) {
    if (row.family == nf.family && row.form == nf.form_id && all_hold(row.where, nf.params, tol.param)) {
      k.killing_dim = 6;
      k.table_row = row.id;
      break;
    }
  }
  if (k.killing_dim == 3) {
    for (const auto& row : at.table3) {
      if (row.family != nf.family) continue;
      const bool hit = std::any_of(row.match.begin(), row.match.end(), [&](const MatchClause& c) {
        return c.form == nf.form_id && all_hold(c.where, nf.params, tol.param);
      });
      if (!hit) continue;
      k.killing_dim = 4;
      k.table_row = row.id;
      k.isotropy_type = row.isotropy;
      k.g_ideal_in_L = row.ideal;
      k.derived_killing = row.derived;
      break;
    }
  }
  const bool definite = Metric(nf.canonical).definite();
  for (const auto& fact : at.completeness) {
    if (fact.definite_only && !definite) continue;
    if (fact.families && std::find(fact.families->begin(), fact.families->end(), nf.family) == fact.families->end())
      continue;
    if (fact.form && *fact.form != nf.form_id) continue;
    if (!all_hold(fact.where, nf.params, tol.param)) continue;
    k.completeness = fact.value == "complete" ? Completeness::Complete : Completeness::Incomplete;
    k.completeness_reason = fact.reason;
    break;
  }
  if (k.killing_dim == 6 && k.completeness != Completeness::Complete) {
    k.completeness = Completeness::Complete;
    k.completeness_reason = "space form";
  }
  return k;
}

KillingReport match_tables(const NormalFormMatch& nf, const CurvatureReport<double>& curv, const Tolerances& tol) {
  KillingReport k = lookup_tables(nf, tol);
  k.constant_k = curv.constant_k;
  if (k.killing_dim != 6) return k;
  const Atlas& at = atlas();
  const auto row = std::find_if(at.table2.begin(), at.table2.end(), [&](const Table2Row& r) { return r.id == *k.table_row; });
  if (!curv.constant_k || !curv.samples_agree)
    throw Error(ErrorCode::InconsistentCurvature, *k.table_row + " requires constant curvature");
  // Curvature of the canonical metric c*g is K/c.
  const double kc = *curv.constant_k / nf.scale;
  const double zero = 1e-8 * std::max(1.0, std::abs(curv.scalar / nf.scale));
  const int sign = std::abs(kc) <= zero ? 0 : (kc > 0 ? 1 : -1);
  if (sign != row->curvature_sign)
    throw Error(ErrorCode::InconsistentCurvature, *k.table_row + " curvature sign mismatch (K = " + std::to_string(kc) + ")");
  return k;
}

PlaneWave plane_wave_parameter(double alpha) {
  if (alpha == 0.0 || alpha == 1.0) throw Error(ErrorCode::InvalidAlpha, "alpha must differ from 0 and 1");
  const double sigma = alpha * (alpha - 1.0);
  if (!(sigma > -0.25)) throw Error(ErrorCode::InvalidAlpha, "sigma = alpha(alpha-1) must exceed -1/4");
  PlaneWave w;
  w.sigma = sigma;
  w.d_sigma << 1, 0, 0, 0, 0, 1, 0, sigma, 1;
  const double lambda = 1.0 / (1.0 - alpha);
  w.generator << 1, 0, 0, lambda;
  const double l = std::abs(lambda) <= 1.0 ? lambda : 1.0 / lambda;
  w.group = l == -1.0 ? Family::sol : Family::h_lambda;
  w.group_param = l;
  return w;
}

}  // namespace bianchi
