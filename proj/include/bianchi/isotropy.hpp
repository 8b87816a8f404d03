#pragma once

#include "bianchi/curvature.hpp"

#include <vector>

namespace bianchi {

enum class IsotropyType { Elliptic, Hyperbolic, Parabolic };
enum class Causal { Spacelike, Timelike, Lightlike };

const char* isotropy_name(IsotropyType t);
const char* causal_name(Causal c);

/// A metric-skew endomorphism with its type and fixed line.
struct IsotropyElement {
  Mat3 matrix;
  IsotropyType type;
  Vec3 invariant_line;
  Causal causal;
};

struct SkewDerivationSpace {
  std::vector<Mat3> basis;
  int dim() const { return static_cast<int>(basis.size()); }
};

/// max |g(Ux,y) + g(x,Uy)| over basis pairs.
double skewness_residual(const Mat3& u, const Metric& g);

IsotropyElement classify_type(const Mat3& u, const Metric& g, const Tolerances& tol = {});

SkewDerivationSpace skew_derivations(const LieAlgebra& a, const Metric& g, const Tolerances& tol = {});

/// Basis of the symmetric forms q with q(Ux,y) + q(x,Uy) = 0.
std::vector<Mat3> metric_constraints_from_isotropy(const Mat3& u, double eps_rank = 1e-8);

}  // namespace bianchi
