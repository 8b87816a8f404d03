#pragma once

#include "bianchi/lie_algebra.hpp"

#include <random>

namespace testing_support {

using namespace bianchi;

inline Mat3 random_matrix(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = u(rng);
  return m;
}

inline double condition(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m);
  auto s = svd.singularValues();
  return s(0) / s(2);
}

/// Random invertible matrix with condition number at most max_cond.
inline Mat3 random_transport(std::mt19937_64& rng, double max_cond = 100.0) {
  for (;;) {
    Mat3 m = random_matrix(rng, -2.0, 2.0);
    if (condition(m) <= max_cond) return m;
  }
}

inline Mat3 random_orthogonal(std::mt19937_64& rng) {
  Eigen::HouseholderQR<Mat3> qr(random_matrix(rng));
  return qr.householderQ();
}

/// Random metric with eigenvalue moduli in [1, max_cond] and the given number of negative directions.
inline Mat3 random_metric(std::mt19937_64& rng, int negatives, double max_cond = 50.0) {
  std::uniform_real_distribution<double> u(1.0, max_cond);
  Vec3 d(u(rng), u(rng), u(rng));
  d(0) = 1.0;
  for (int i = 0; i < negatives; ++i) d(i) = -d(i);
  Mat3 q = random_orthogonal(rng);
  return q * d.asDiagonal() * q.transpose();
}

struct FamilySample {
  Family family;
  double param;
};

inline std::vector<FamilySample> family_samples() {
  std::vector<FamilySample> out;
  for (Family f : all_families) {
    if (f == Family::h_lambda)
      for (double l : {0.5, -0.5, 0.25, -0.25}) out.push_back({f, l});
    else if (f == Family::e_mu)
      for (double m : {0.5, 1.0, 2.0}) out.push_back({f, m});
    else
      out.push_back({f, 0.0});
  }
  return out;
}

inline LieAlgebra from_table(std::initializer_list<std::tuple<int, int, Vec3>> brackets) {
  LieAlgebra a;
  for (const auto& [i, j, v] : brackets) a.set(i, j, v);
  return a;
}

}  // namespace testing_support

namespace testing_support {

struct FuzzCase {
  LieAlgebra algebra;
  Mat3 metric;
  Family family;
};

/// Preferred-basis algebras from every family paired with random metrics of either signature.
inline std::vector<FuzzCase> fuzz_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto samples = family_samples();
  std::vector<FuzzCase> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = samples[i % samples.size()];
    int negatives = (rng() % 2 == 0) ? 0 : 1;
    out.push_back({preferred_algebra<double>(s.family, s.param), random_metric(rng, negatives), s.family});
  }
  return out;
}

}  // namespace testing_support
