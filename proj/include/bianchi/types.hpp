#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace bianchi {

template <typename Scalar> using Vec3T = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Mat3T = Eigen::Matrix<Scalar, 3, 3>;

using Vec3 = Vec3T<double>;
using Mat3 = Mat3T<double>;

/// Numerical thresholds shared by the whole pipeline.
struct Tolerances {
  double jacobi = 1e-9;   // absolute, on Jacobi residuals
  double rank = 1e-8;     // singular values relative to the largest one
  double eig = 1e-7;      // zero-eigenvalue decisions for skew maps
  double param = 1e-6;    // table parameter matching
  double witness = 1e-7;  // normal-form witness check
  double ricci = 1e-8;    // Ricci proportionality, relative
};

enum class ErrorCode {
  Schema,
  NotJacobi,
  DegenerateInput,
  DegenerateMetric,
  DegeneratePlane,
  NotSkew,
  ZeroMatrix,
  ReductionFailed,
  InconsistentCurvature,
  InvalidAlpha,
  ToleranceUnachievable,
  AtlasMismatch,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

}  // namespace bianchi
