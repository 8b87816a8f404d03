#pragma once

#include "bianchi/types.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bianchi {

template <typename Scalar> using MatXT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Structure constants of a real 3-dimensional Lie algebra, c(i,j,k) = c^k_{ij}.
template <typename Scalar>
class LieAlgebra3 {
public:
  using Structure = std::array<std::array<std::array<Scalar, 3>, 3>, 3>;

  LieAlgebra3() {
    for (auto& plane : c_)
      for (auto& row : plane) row.fill(Scalar(0));
  }

  /// Throws Schema if the tensor is not antisymmetric in (i,j).
  static LieAlgebra3 from_structure(const Structure& c, Scalar tol = Scalar(1e-12)) {
    LieAlgebra3 a;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          using std::abs;
          if (abs(c[i][j][k] + c[j][i][k]) > tol)
            throw Error(ErrorCode::Schema, "structure constants are not antisymmetric");
          a.c_[i][j][k] = c[i][j][k];
        }
    return a;
  }

  /// Sets [e_i, e_j] = v (and [e_j, e_i] = -v).
  LieAlgebra3& set(int i, int j, const Vec3T<Scalar>& v) {
    for (int k = 0; k < 3; ++k) {
      c_[i][j][k] = v(k);
      c_[j][i][k] = -v(k);
    }
    return *this;
  }

  Scalar c(int i, int j, int k) const { return c_[i][j][k]; }
  const Structure& structure() const { return c_; }

  Vec3T<Scalar> bracket_basis(int i, int j) const {
    return Vec3T<Scalar>(c_[i][j][0], c_[i][j][1], c_[i][j][2]);
  }

private:
  Structure c_;
};

using LieAlgebra = LieAlgebra3<double>;

template <typename Scalar>
Vec3T<Scalar> bracket(const LieAlgebra3<Scalar>& a, const Vec3T<Scalar>& x, const Vec3T<Scalar>& y) {
  Vec3T<Scalar> out = Vec3T<Scalar>::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j) out += x(i) * y(j) * a.bracket_basis(i, j);
  return out;
}

/// Matrix of y -> [x, y].
template <typename Scalar>
Mat3T<Scalar> ad(const LieAlgebra3<Scalar>& a, const Vec3T<Scalar>& x) {
  Mat3T<Scalar> m;
  for (int j = 0; j < 3; ++j) m.col(j) = bracket(a, x, Vec3T<Scalar>(Vec3T<Scalar>::Unit(j)));
  return m;
}

template <typename Scalar>
Mat3T<Scalar> ad_basis(const LieAlgebra3<Scalar>& a, int i) {
  return ad(a, Vec3T<Scalar>(Vec3T<Scalar>::Unit(i)));
}

template <typename Scalar>
struct JacobiCheck {
  bool ok;
  Scalar residual;
};

template <typename Scalar>
Scalar jacobi_residual(const LieAlgebra3<Scalar>& a) {
  using std::abs;
  Scalar worst(0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 3; ++l)
        for (int m = 0; m < 3; ++m) {
          Scalar s(0);
          for (int k = 0; k < 3; ++k)
            s += a.c(i, j, k) * a.c(k, l, m) + a.c(j, l, k) * a.c(k, i, m) + a.c(l, i, k) * a.c(k, j, m);
          if (abs(s) > worst) worst = abs(s);
        }
  return worst;
}

template <typename Scalar>
JacobiCheck<Scalar> check_jacobi(const LieAlgebra3<Scalar>& a, Scalar eps_jac = Scalar(1e-9)) {
  Scalar r = jacobi_residual(a);
  return {r <= eps_jac, r};
}

/// Throws NotJacobi when the Jacobi identity fails.
template <typename Scalar>
void require_jacobi(const LieAlgebra3<Scalar>& a, Scalar eps_jac = Scalar(1e-9)) {
  auto check = check_jacobi(a, eps_jac);
  if (!check.ok)
    throw Error(ErrorCode::NotJacobi,
                "Jacobi identity fails, residual " + std::to_string(static_cast<double>(check.residual)));
}

/// Structure constants in the basis given by the columns of p.
template <typename Scalar>
LieAlgebra3<Scalar> transport(const LieAlgebra3<Scalar>& a, const Mat3T<Scalar>& p) {
  Mat3T<Scalar> pinv = p.inverse();
  LieAlgebra3<Scalar> out;
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      Vec3T<Scalar> b = bracket(a, Vec3T<Scalar>(p.col(i)), Vec3T<Scalar>(p.col(j)));
      out.set(i, j, pinv * b);
    }
  return out;
}

template <typename Scalar>
Scalar structure_distance(const LieAlgebra3<Scalar>& a, const LieAlgebra3<Scalar>& b) {
  using std::abs;
  Scalar worst(0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) worst = std::max<Scalar>(worst, abs(a.c(i, j, k) - b.c(i, j, k)));
  return worst;
}

template <typename Scalar>
Scalar structure_norm(const LieAlgebra3<Scalar>& a) {
  return structure_distance(a, LieAlgebra3<Scalar>());
}

/// Rank with a flag for singular values that sit in the ambiguity band (eps, 100 eps].
struct RankDecision {
  int rank;
  bool ambiguous;
};

template <typename Derived>
RankDecision numerical_rank(const Eigen::MatrixBase<Derived>& m, double eps_rank) {
  using Scalar = typename Derived::Scalar;
  MatXT<Scalar> dense = m;
  if (dense.size() == 0) return {0, false};
  Eigen::JacobiSVD<MatXT<Scalar>> svd(dense);
  auto s = svd.singularValues();
  if (s.size() == 0 || s(0) == Scalar(0)) return {0, false};
  int r = 0;
  bool ambiguous = false;
  for (int i = 0; i < s.size(); ++i) {
    double rel = static_cast<double>(s(i) / s(0));
    if (rel > eps_rank) ++r;
    if (rel > eps_rank && rel <= 100 * eps_rank) ambiguous = true;
  }
  return {r, ambiguous};
}

/// Orthonormal basis (columns) of the kernel of m, relative singular value threshold eps_rank.
template <typename Derived>
MatXT<typename Derived::Scalar> null_space(const Eigen::MatrixBase<Derived>& m, double eps_rank) {
  using Scalar = typename Derived::Scalar;
  MatXT<Scalar> dense = m;
  const Eigen::Index n = dense.cols();
  Eigen::JacobiSVD<MatXT<Scalar>> svd(dense, Eigen::ComputeFullV);
  auto s = svd.singularValues();
  Scalar top = s.size() > 0 ? s(0) : Scalar(0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (top > Scalar(0) && static_cast<double>(s(i) / top) > eps_rank) ++r;
  return svd.matrixV().rightCols(n - r);
}

/// Orthonormal basis (columns) of the column space of m.
template <typename Derived>
MatXT<typename Derived::Scalar> column_space(const Eigen::MatrixBase<Derived>& m, double eps_rank) {
  using Scalar = typename Derived::Scalar;
  MatXT<Scalar> dense = m;
  Eigen::JacobiSVD<MatXT<Scalar>> svd(dense, Eigen::ComputeFullU);
  auto s = svd.singularValues();
  Scalar top = s.size() > 0 ? s(0) : Scalar(0);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (top > Scalar(0) && static_cast<double>(s(i) / top) > eps_rank) ++r;
  return svd.matrixU().leftCols(r);
}

template <typename Scalar>
struct Subspace {
  std::vector<Vec3T<Scalar>> basis;
  int dim() const { return static_cast<int>(basis.size()); }
  bool ambiguous = false;

  MatXT<Scalar> matrix() const {
    MatXT<Scalar> m(3, basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) m.col(i) = basis[i];
    return m;
  }
};

template <typename Scalar>
Subspace<Scalar> subspace_from_columns(const MatXT<Scalar>& cols) {
  Subspace<Scalar> s;
  for (Eigen::Index i = 0; i < cols.cols(); ++i) s.basis.push_back(cols.col(i));
  return s;
}

template <typename Scalar>
Subspace<Scalar> derived_algebra(const LieAlgebra3<Scalar>& a, double eps_rank = 1e-8) {
  Mat3T<Scalar> m;
  m.col(0) = a.bracket_basis(1, 2);
  m.col(1) = a.bracket_basis(2, 0);
  m.col(2) = a.bracket_basis(0, 1);
  // The scale is that of the structure constants, not of m alone, so that an
  // abelian algebra has an empty derived algebra.
  Subspace<Scalar> s;
  if (m.norm() == Scalar(0)) return s;
  s = subspace_from_columns<Scalar>(column_space(m, eps_rank));
  s.ambiguous = numerical_rank(m, eps_rank).ambiguous;
  return s;
}

template <typename Scalar>
Subspace<Scalar> center(const LieAlgebra3<Scalar>& a, double eps_rank = 1e-8) {
  Eigen::Matrix<Scalar, 9, 3> stacked;
  for (int i = 0; i < 3; ++i) stacked.template block<3, 3>(3 * i, 0) = -ad_basis(a, i);
  if (stacked.norm() == Scalar(0)) return subspace_from_columns<Scalar>(MatXT<Scalar>::Identity(3, 3));
  return subspace_from_columns<Scalar>(null_space(stacked, eps_rank));
}

template <typename Scalar>
bool unimodular(const LieAlgebra3<Scalar>& a, double eps_rank = 1e-8) {
  using std::abs;
  Scalar scale = std::max<Scalar>(Scalar(1), structure_norm(a));
  for (int i = 0; i < 3; ++i)
    if (static_cast<double>(abs(ad_basis(a, i).trace()) / scale) > eps_rank) return false;
  return true;
}

/// K(x,y) = tr(ad_x ad_y).
template <typename Scalar>
Mat3T<Scalar> killing_form(const LieAlgebra3<Scalar>& a) {
  std::array<Mat3T<Scalar>, 3> ads{ad_basis(a, 0), ad_basis(a, 1), ad_basis(a, 2)};
  Mat3T<Scalar> k;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k(i, j) = (ads[i] * ads[j]).trace();
  return k;
}

/// Residual of D[x,y] = [Dx,y] + [x,Dy] over basis pairs.
template <typename Scalar>
Scalar derivation_residual(const LieAlgebra3<Scalar>& a, const Mat3T<Scalar>& d) {
  Scalar worst(0);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Vec3T<Scalar> ei = Vec3T<Scalar>::Unit(i), ej = Vec3T<Scalar>::Unit(j);
      Vec3T<Scalar> r = d * a.bracket_basis(i, j) - bracket(a, Vec3T<Scalar>(d * ei), ej) -
                        bracket(a, ei, Vec3T<Scalar>(d * ej));
      worst = std::max<Scalar>(worst, r.cwiseAbs().maxCoeff());
    }
  return worst;
}

/// Rows of the linear system in the 9 entries of D (column-major) expressing the derivation law.
template <typename Scalar>
Eigen::Matrix<Scalar, 27, 9> derivation_system(const LieAlgebra3<Scalar>& a) {
  Eigen::Matrix<Scalar, 27, 9> sys = Eigen::Matrix<Scalar, 27, 9>::Zero();
  for (int unknown = 0; unknown < 9; ++unknown) {
    Mat3T<Scalar> d = Mat3T<Scalar>::Zero();
    d(unknown % 3, unknown / 3) = Scalar(1);
    int row = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Vec3T<Scalar> ei = Vec3T<Scalar>::Unit(i), ej = Vec3T<Scalar>::Unit(j);
        Vec3T<Scalar> r = d * a.bracket_basis(i, j) - bracket(a, Vec3T<Scalar>(d * ei), ej) -
                          bracket(a, ei, Vec3T<Scalar>(d * ej));
        sys.template block<3, 1>(row, unknown) = r;
        row += 3;
      }
  }
  return sys;
}

template <typename Scalar>
Mat3T<Scalar> unflatten(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& v) {
  Mat3T<Scalar> d;
  for (int u = 0; u < 9; ++u) d(u % 3, u / 3) = v(u);
  return d;
}

template <typename Scalar>
struct DerivationSpace {
  std::vector<Mat3T<Scalar>> basis;
  int dim() const { return static_cast<int>(basis.size()); }
};

template <typename Scalar>
DerivationSpace<Scalar> derivation_space(const LieAlgebra3<Scalar>& a, double eps_rank = 1e-8) {
  auto sys = derivation_system(a);
  DerivationSpace<Scalar> out;
  if (sys.norm() == Scalar(0)) {
    for (int u = 0; u < 9; ++u) {
      Mat3T<Scalar> d = Mat3T<Scalar>::Zero();
      d(u % 3, u / 3) = Scalar(1);
      out.basis.push_back(d);
    }
    return out;
  }
  MatXT<Scalar> ns = null_space(sys, eps_rank);
  for (Eigen::Index c = 0; c < ns.cols(); ++c)
    out.basis.push_back(unflatten<Scalar>(ns.col(c)));
  return out;
}

/// The eleven families of real 3-dimensional Lie algebras.
enum class Family { R3, so3, sl2, heis, euc2, sol, affR_plus_R, h1, psh, h_lambda, e_mu };

inline constexpr std::array<Family, 11> all_families{Family::R3,   Family::so3, Family::sl2,
                                                     Family::heis, Family::euc2, Family::sol,
                                                     Family::affR_plus_R, Family::h1, Family::psh,
                                                     Family::h_lambda, Family::e_mu};

std::string_view family_name(Family f);
std::optional<Family> family_from_name(std::string_view name);

inline bool has_param(Family f) { return f == Family::h_lambda || f == Family::e_mu; }

/// Brackets in the preferred basis.
template <typename Scalar = double>
LieAlgebra3<Scalar> preferred_algebra(Family f, Scalar p = Scalar(0)) {
  using V = Vec3T<Scalar>;
  LieAlgebra3<Scalar> a;
  const Scalar o(1), z(0);
  switch (f) {
    case Family::R3: break;
    case Family::so3: a.set(0, 1, V(z, z, o)).set(1, 2, V(o, z, z)).set(2, 0, V(z, o, z)); break;
    case Family::sl2: a.set(0, 1, V(z, o, z)).set(2, 0, V(z, z, o)).set(1, 2, V(o, z, z)); break;
    case Family::heis: a.set(0, 1, V(z, z, o)); break;
    case Family::euc2: a.set(0, 1, V(z, z, o)).set(2, 0, V(z, o, z)); break;
    case Family::sol: a.set(0, 1, V(z, o, z)).set(2, 0, V(z, z, o)); break;
    case Family::affR_plus_R: a.set(0, 1, V(z, o, z)); break;
    case Family::h1: a.set(0, 1, V(z, o, z)).set(0, 2, V(z, z, o)); break;
    case Family::psh: a.set(0, 1, V(z, o, z)).set(0, 2, V(z, o, o)); break;
    case Family::h_lambda: a.set(0, 1, V(z, o, z)).set(0, 2, V(z, z, p)); break;
    case Family::e_mu: a.set(0, 1, V(z, p, o)).set(0, 2, V(z, -o, p)); break;
  }
  return a;
}

}  // namespace bianchi
