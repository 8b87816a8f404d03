#pragma once

#include "bianchi/atlas.hpp"
#include "bianchi/automorphisms.hpp"
#include "bianchi/classify.hpp"
#include "bianchi/curvature.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace bianchi {

/// c * W^T g W equals `canonical`, where W (the witness) is a basis change in
/// input coordinates taking the brackets to their preferred form.
struct NormalFormMatch {
  Family family = Family::R3;
  std::optional<double> family_param;
  std::string form_id;
  std::string display;
  Mat3 canonical = Mat3::Identity();
  ParamMap params;
  double scale = 1.0;
  Mat3 witness = Mat3::Identity();
  double residual = 0.0;
  bool boundary = false;  // a parameter sits within tolerance of a domain or table boundary
  bool fallback = false;  // found by the orbit search rather than in closed form
};

struct ReduceOptions {
  std::uint64_t seed = 0x0b17ULL;
  int restarts = 200;
  bool force_fallback = false;
  Tolerances tol;
};

NormalFormMatch reduce(const LieAlgebra& a, const Mat3& g, const BianchiClass& cls, const ReduceOptions& opt = {});

/// Witness check: max entry of |c W^T g W - canonical| and automorphism residual.
double witness_residual(const LieAlgebra& a, const Mat3& g, const NormalFormMatch& m);

enum class Completeness { Complete, Incomplete, Unknown };
const char* completeness_name(Completeness c);

struct KillingReport {
  int killing_dim = 3;
  std::optional<std::string> isotropy_type;
  std::optional<bool> g_ideal_in_L;
  std::optional<std::string> derived_killing;
  Completeness completeness = Completeness::Unknown;
  std::string completeness_reason;
  std::optional<double> constant_k;
  std::optional<std::string> table_row;
};

KillingReport match_tables(const NormalFormMatch& nf, const CurvatureReport<double>& curv, const Tolerances& tol = {});

/// Table lookup alone, without the curvature cross-check.
KillingReport lookup_tables(const NormalFormMatch& nf, const Tolerances& tol = {});

/// sigma = alpha (alpha - 1) and the group R x_rho R^2 acting simply
/// transitively on the plane wave.
struct PlaneWave {
  double sigma;
  Mat3 d_sigma;               // ad of the extending element on heis, basis (Z, X, Y)
  Eigen::Matrix2d generator;  // rho_sigma(t) = exp(t * generator)
  Family group = Family::h_lambda;
  double group_param = 0.0;   // lambda of h(lambda) after normalizing |lambda| <= 1
};

PlaneWave plane_wave_parameter(double alpha);

}  // namespace bianchi
