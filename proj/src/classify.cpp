#include "bianchi/classify.hpp"

#include <algorithm>
#include <cmath>

namespace bianchi {

namespace {

Vec3 sign_fixed(Vec3 v) {
  Eigen::Index i;
  v.cwiseAbs().maxCoeff(&i);
  return v(i) < 0 ? Vec3(-v) : v;
}

// Coordinate vectors lying in the subspace come first, so inputs that are
// already in a preferred basis are handed back unchanged.
std::vector<Vec3> candidates(const Subspace<double>& s) {
  std::vector<Vec3> out;
  Eigen::MatrixXd q = s.matrix();
  for (int i = 0; i < 3; ++i) {
    Vec3 e = Vec3::Unit(i);
    if ((e - q * (q.transpose() * e)).norm() < 1e-12) out.push_back(e);
  }
  for (const auto& b : s.basis) out.push_back(sign_fixed(b));
  return out;
}

Eigen::Matrix<double, 3, 2> plane_basis(const Subspace<double>& s) {
  auto c = candidates(s);
  Eigen::Matrix<double, 3, 2> b;
  b.col(0) = c[0];
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i].cross(c[0]).norm() > 0.5) {
      b.col(1) = c[i];
      return b;
    }
  }
  b.col(1) = s.basis[1];
  return b;
}

Eigen::Vector2d coords(const Eigen::Matrix<double, 3, 2>& b, const Vec3& v) {
  return b.colPivHouseholderQr().solve(v);
}

double scale_of(const LieAlgebra& a) { return std::max(1e-300, structure_norm(a)); }

BianchiClass finish(const LieAlgebra& a, BianchiClass c, const Tolerances& tol) {
  LieAlgebra target = preferred_algebra(c.tag, c.param.value_or(0.0));
  if (structure_distance(a, target) <= 1e-12) {
    c.basis_change = Mat3::Identity();
    return c;
  }
  LieAlgebra moved = transport(a, c.basis_change);
  double err = structure_distance(moved, target);
  if (err > 1e-7 * std::max(1.0, structure_norm(moved)))
    throw Error(ErrorCode::DegenerateInput, "classification of " + std::string(family_name(c.tag)) +
                                                " did not verify (residual " + std::to_string(err) + ")");
  (void)tol;
  return c;
}

BianchiClass classify_semisimple(const LieAlgebra& a, const Tolerances& tol) {
  Mat3 k = killing_form(a);
  Eigen::SelfAdjointEigenSolver<Mat3> es(k);
  Vec3 ev = es.eigenvalues();
  double top = ev.cwiseAbs().maxCoeff();
  for (int i = 0; i < 3; ++i)
    if (std::abs(ev(i)) <= 100 * tol.rank * top)
      throw Error(ErrorCode::DegenerateInput, "Killing form is numerically degenerate");

  BianchiClass c;
  if (ev.maxCoeff() < 0) {
    c.tag = Family::so3;
    Mat3 b = -k / 2.0;
    Vec3 f1 = Vec3::UnitX() / std::sqrt(b(0, 0));
    Vec3 f2 = Vec3::UnitY() - (f1.dot(b * Vec3::UnitY())) * f1;
    f2 /= std::sqrt(f2.dot(b * f2));
    Vec3 f3 = bracket(a, f1, f2);
    c.basis_change << f1, f2, f3;
    return finish(a, c, tol);
  }

  c.tag = Family::sl2;
  std::vector<Vec3> space;
  for (int i = 0; i < 3; ++i)
    if (ev(i) > 0) space.push_back(es.eigenvectors().col(i) / std::sqrt(ev(i) / 2.0));
  if (space.size() != 2) throw Error(ErrorCode::DegenerateInput, "Killing form has unexpected signature");
  const Vec3 sa = space[0], sb = space[1];
  const std::array<std::pair<Vec3, Vec3>, 4> tries{
      {{sa, sb}, {sb, sa}, {sa, Vec3(-sb)}, {Vec3(-sa), sb}}};
  LieAlgebra target = preferred_algebra<double>(Family::sl2);
  for (const auto& [s1, s2] : tries) {
    Vec3 t = bracket(a, s1, s2);
    Mat3 p;
    p << s1, (s2 + t) / std::sqrt(2.0), (s2 - t) / std::sqrt(2.0);
    LieAlgebra moved = transport(a, p);
    if (structure_distance(moved, target) <= 1e-7 * std::max(1.0, structure_norm(moved))) {
      c.basis_change = p;
      return finish(a, c, tol);
    }
  }
  throw Error(ErrorCode::DegenerateInput, "no sl2 frame found");
}

BianchiClass classify_line(const LieAlgebra& a, const Subspace<double>& d, const Tolerances& tol) {
  Vec3 n = sign_fixed(d.basis[0]);
  BianchiClass c;
  double adn = ad(a, n).norm();
  double scale = scale_of(a);
  if (adn > tol.rank * scale && adn <= 100 * tol.rank * scale)
    throw Error(ErrorCode::DegenerateInput, "derived line is nearly central");

  if (adn <= tol.rank * scale) {
    c.tag = Family::heis;
    int bi = 0, bj = 1;
    double best = -1;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        double v = a.bracket_basis(i, j).norm();
        if (v > best) best = v, bi = i, bj = j;
      }
    Vec3 x = Vec3::Unit(bi), y = Vec3::Unit(bj);
    c.basis_change << x, y, bracket(a, x, y);
    return finish(a, c, tol);
  }

  c.tag = Family::affR_plus_R;
  int bi = 0;
  double best = -1;
  for (int i = 0; i < 3; ++i) {
    double v = bracket(a, Vec3(Vec3::Unit(i)), n).norm();
    if (v > best) best = v, bi = i;
  }
  Vec3 x = Vec3::Unit(bi);
  double coef = n.dot(bracket(a, x, n));
  auto z = center(a, tol.rank);
  if (z.dim() != 1) throw Error(ErrorCode::DegenerateInput, "centre of aff(R)+R candidate is not a line");
  c.basis_change << x / coef, n, sign_fixed(z.basis[0]);
  return finish(a, c, tol);
}

BianchiClass classify_plane(const LieAlgebra& a, const Subspace<double>& d, const Tolerances& tol) {
  Eigen::MatrixXd q = d.matrix();
  int ti = 0;
  double far = -1;
  for (int i = 0; i < 3; ++i) {
    Vec3 e = Vec3::Unit(i);
    double dist = (e - q * (q.transpose() * e)).norm();
    if (dist > far + 1e-12) far = dist, ti = i;
  }
  AdNormalization an = normalize_ad_scaling(a, Vec3::Unit(ti), d, tol);
  BianchiClass c;
  c.boundary = an.boundary;
  c.basis_change << an.t, an.n1, an.n2;
  switch (an.shape) {
    case AdNormalization::Shape::Jordan: c.tag = Family::psh; break;
    case AdNormalization::Shape::RotationDilation: {
      double mu = an.block(0, 0);
      if (mu <= tol.param) {
        c.tag = Family::euc2;
        if (mu > 1e-9) c.boundary = true, c.note = "mu within tolerance of 0";
      } else {
        c.tag = Family::e_mu;
        c.param = mu;
      }
      break;
    }
    case AdNormalization::Shape::Diagonal: {
      double l = an.block(1, 1);
      if (l == 1.0) {
        c.tag = Family::h1;
      } else if (std::abs(l + 1.0) <= tol.param) {
        c.tag = Family::sol;
        if (std::abs(l + 1.0) > 1e-9) c.boundary = true, c.note = "lambda within tolerance of -1";
      } else if (std::abs(l) <= tol.param) {
        throw Error(ErrorCode::DegenerateInput, "lambda within tolerance of 0");
      } else {
        c.tag = Family::h_lambda;
        c.param = l;
      }
      break;
    }
  }
  return finish(a, c, tol);
}

}  // namespace

AdNormalization normalize_ad_scaling(const LieAlgebra& a, const Vec3& t, const Subspace<double>& n,
                                     const Tolerances& tol) {
  if (n.dim() != 2) throw Error(ErrorCode::DegenerateInput, "ideal is not 2-dimensional");
  Eigen::Matrix<double, 3, 2> b = plane_basis(n);
  Mat3 adt = ad(a, t);
  Eigen::Matrix2d m;
  for (int j = 0; j < 2; ++j) m.col(j) = coords(b, adt * b.col(j));
  const double s = m.norm();
  if (s <= tol.rank * std::max(1e-300, scale_of(a) * t.norm()))
    throw Error(ErrorCode::DegenerateInput, "ad_T vanishes on the derived algebra");

  const double tr = m.trace();
  const double disc = tr * tr - 4.0 * m.determinant();
  const double gap = std::sqrt(std::abs(disc)) / 2.0;

  AdNormalization out;
  auto cand = candidates(n);
  if (gap <= tol.param * s) {
    out.boundary = gap > 1e-7 * s;
    const double l = tr / 2.0;
    out.t = t / l;
    Eigen::Matrix2d k = m / l - Eigen::Matrix2d::Identity();
    if (k.norm() <= tol.param) {
      out.shape = AdNormalization::Shape::Diagonal;
      out.boundary = out.boundary || k.norm() > 1e-9;
      out.n1 = b.col(0);
      out.n2 = b.col(1);
      out.block = Eigen::Matrix2d::Identity();
      return out;
    }
    out.shape = AdNormalization::Shape::Jordan;
    Vec3 best = cand[0];
    double bestn = -1;
    for (const auto& v : cand) {
      double nv = (k * coords(b, v)).norm() / v.norm();
      if (nv > bestn * (1 + 1e-9)) bestn = nv, best = v;
    }
    out.n2 = best;
    out.n1 = b * (k * coords(b, best));
    out.block << 1, 1, 0, 1;
    return out;
  }

  if (disc < 0) {
    out.shape = AdNormalization::Shape::RotationDilation;
    double mu = tr / 2.0 / gap;
    out.t = t / gap;
    Eigen::Matrix2d mp = m / gap;
    if (mu < 0) {
      mu = -mu;
      out.t = -out.t;
      mp = -mp;
    }
    out.n1 = cand[0];
    out.n2 = b * ((mp - mu * Eigen::Matrix2d::Identity()) * coords(b, cand[0]));
    out.block << mu, -1, 1, mu;
    return out;
  }

  out.shape = AdNormalization::Shape::Diagonal;
  double l1 = tr / 2.0 + gap, l2 = tr / 2.0 - gap;
  if (std::abs(l2) > std::abs(l1)) std::swap(l1, l2);
  const double ratio = l2 / l1;
  auto eigvec = [&](double other) {
    Eigen::Matrix2d r = m - other * Eigen::Matrix2d::Identity();
    Eigen::Vector2d col = r.col(0).norm() >= r.col(1).norm() ? r.col(0) : r.col(1);
    Vec3 v = b * col;
    return sign_fixed(v / v.norm());
  };
  out.t = t / l1;
  out.n1 = eigvec(l2);
  out.n2 = eigvec(l1);
  if (std::abs(ratio + 1.0) <= tol.param) {
    // sol: the two eigenvalues have equal modulus, the choice of which is "1" is free
    out.boundary = std::abs(ratio + 1.0) > 1e-9;
  }
  out.block << 1, 0, 0, ratio;
  return out;
}

BianchiClass classify(const LieAlgebra& a, const Tolerances& tol) {
  require_jacobi(a, tol.jacobi);
  auto d = derived_algebra(a, tol.rank);
  if (d.ambiguous) throw Error(ErrorCode::DegenerateInput, "derived algebra rank is within the tolerance band");
  switch (d.dim()) {
    case 0: return BianchiClass{};
    case 1: return classify_line(a, d, tol);
    case 2: return classify_plane(a, d, tol);
    default: return classify_semisimple(a, tol);
  }
}

}  // namespace bianchi
