#pragma once

#include "bianchi/lie_algebra.hpp"

#include <optional>
#include <string>

namespace bianchi {

/// Family, parameter and the basis (columns of basis_change, in input
/// coordinates) in which the brackets take their preferred form.
struct BianchiClass {
  Family tag = Family::R3;
  std::optional<double> param;
  Mat3 basis_change = Mat3::Identity();
  bool boundary = false;  // a decision was taken within a tolerance band
  std::string note;
};

BianchiClass classify(const LieAlgebra& a, const Tolerances& tol = {});

/// Canonical shape of ad_t restricted to a 2-dimensional abelian ideal.
struct AdNormalization {
  enum class Shape { Diagonal, Jordan, RotationDilation };
  Shape shape = Shape::Diagonal;
  Vec3 t;
  Vec3 n1, n2;
  Eigen::Matrix2d block;  // ad_t on (n1, n2): diag(1, l), [[1,1],[0,1]] or [[mu,-1],[1,mu]]
  bool boundary = false;
};

AdNormalization normalize_ad_scaling(const LieAlgebra& a, const Vec3& t, const Subspace<double>& n,
                                     const Tolerances& tol = {});

}  // namespace bianchi
