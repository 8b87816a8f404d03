#pragma once

#include "bianchi/lie_algebra.hpp"

#include <random>
#include <string>

namespace bianchi {

/// Automorphisms of a family's preferred brackets as an explicit matrix
/// family. Columns of an element are the images of e1, e2, e3.
struct AutomorphismGroup {
  Family family = Family::R3;
  double param = 0.0;
  std::string description;
  int dim = 0;         // continuous parameters
  int components = 1;  // discrete components reachable by element()

  /// x near zero gives elements near the identity of the chosen component.
  Mat3 element(const Eigen::VectorXd& x, int component = 0) const;

  /// A random element with bounded condition number.
  Mat3 sample(std::mt19937_64& rng, double max_cond = 30.0) const;
};

AutomorphismGroup automorphism_group(Family f, double param = 0.0);

/// Killing form of the preferred sl(2,R) basis, halved: (e1)^2 + 2(e2 e3).
Mat3 sl2_kappa();

/// Largest deviation of P from being an automorphism of a.
double automorphism_residual(const LieAlgebra& a, const Mat3& p);

}  // namespace bianchi
