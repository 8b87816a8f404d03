#include "support.hpp"

#include <doctest.h>

using namespace bianchi;
using namespace testing_support;

namespace {

// Jacobi sum evaluated through brackets of basis vectors.
double jacobi_oracle(const LieAlgebra& a) {
  double worst = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        Vec3 x = Vec3::Unit(i), y = Vec3::Unit(j), z = Vec3::Unit(k);
        Vec3 s = bracket(a, bracket(a, x, y), z) + bracket(a, bracket(a, y, z), x) +
                 bracket(a, bracket(a, z, x), y);
        worst = std::max(worst, s.cwiseAbs().maxCoeff());
      }
  return worst;
}

// Derivation law as a Kronecker-product system on vec(D).
int derivation_dim_oracle(const LieAlgebra& a) {
  Eigen::MatrixXd sys(27, 9);
  int row = 0;
  auto kron = [](const Eigen::RowVector3d& r, const Mat3& m) {
    Eigen::Matrix<double, 3, 9> out;
    for (int c = 0; c < 3; ++c) out.block<3, 3>(0, 3 * c) = r(c) * m;
    return out;
  };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      Eigen::RowVector3d bij = a.bracket_basis(i, j).transpose();
      Eigen::RowVector3d ei = Vec3::Unit(i).transpose(), ej = Vec3::Unit(j).transpose();
      sys.block<3, 9>(row, 0) = kron(bij, Mat3::Identity()) + kron(ei, ad_basis(a, j)) - kron(ej, ad_basis(a, i));
      row += 3;
    }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(sys);
  lu.setThreshold(1e-10);
  return 9 - static_cast<int>(lu.rank());
}

}  // namespace

TEST_CASE("brackets of preferred bases") {
  auto heis = preferred_algebra<double>(Family::heis);
  CHECK((bracket(heis, Vec3(Vec3::UnitX()), Vec3(Vec3::UnitY())) - Vec3::UnitZ()).norm() == 0);
  auto sl2 = preferred_algebra<double>(Family::sl2);
  CHECK((bracket(sl2, Vec3(Vec3::UnitY()), Vec3(Vec3::UnitZ())) - Vec3::UnitX()).norm() == 0);
  for (Family f : all_families) {
    auto a = preferred_algebra<double>(f, 0.5);
    CHECK(bracket(a, Vec3(Vec3::UnitX()), Vec3(Vec3::UnitX())).norm() == 0);
  }
}

TEST_CASE("Jacobi check agrees with the bracket oracle") {
  for (const auto& s : family_samples()) {
    auto a = preferred_algebra<double>(s.family, s.param);
    auto r = check_jacobi(a);
    CHECK(r.ok);
    CHECK(r.residual == doctest::Approx(jacobi_oracle(a)));
  }
  // Flipping one sign of so(3) still gives a Lie algebra (it is sl(2,R)).
  LieAlgebra flipped;
  flipped.set(0, 1, Vec3(0, 0, 1)).set(1, 2, Vec3(1, 0, 0)).set(2, 0, Vec3(0, -1, 0));
  CHECK(check_jacobi(flipped).ok);
  CHECK(jacobi_oracle(flipped) == 0.0);

  LieAlgebra bad;
  bad.set(0, 1, Vec3(1, 0, 0)).set(1, 2, Vec3(0, 1, 0));
  CHECK_FALSE(check_jacobi(bad).ok);
  CHECK(jacobi_oracle(bad) == doctest::Approx(1.0));
  CHECK(check_jacobi(bad).residual == doctest::Approx(1.0));
  CHECK_THROWS_AS(require_jacobi(bad), Error);
}

TEST_CASE("antisymmetry is enforced on construction") {
  LieAlgebra::Structure c{};
  c[0][1][2] = 1.0;
  CHECK_THROWS_AS(LieAlgebra::from_structure(c), Error);
  c[1][0][2] = -1.0;
  CHECK_NOTHROW(LieAlgebra::from_structure(c));
}

TEST_CASE("derived algebra, centre, unimodularity") {
  auto aff = preferred_algebra<double>(Family::affR_plus_R);
  auto d = derived_algebra(aff);
  REQUIRE(d.dim() == 1);
  CHECK(std::abs(std::abs(d.basis[0](1)) - 1.0) < 1e-12);
  CHECK(derived_algebra(preferred_algebra<double>(Family::R3)).dim() == 0);
  CHECK(derived_algebra(preferred_algebra<double>(Family::h_lambda, 0.5)).dim() == 2);
  CHECK(derived_algebra(preferred_algebra<double>(Family::so3)).dim() == 3);

  auto z = center(preferred_algebra<double>(Family::heis));
  REQUIRE(z.dim() == 1);
  CHECK(std::abs(std::abs(z.basis[0](2)) - 1.0) < 1e-12);
  CHECK(center(preferred_algebra<double>(Family::R3)).dim() == 3);
  CHECK(center(preferred_algebra<double>(Family::sl2)).dim() == 0);

  CHECK(unimodular(preferred_algebra<double>(Family::sol)));
  CHECK_FALSE(unimodular(preferred_algebra<double>(Family::h1)));
  CHECK(ad_basis(preferred_algebra<double>(Family::h1), 0).trace() == doctest::Approx(2.0));
  CHECK(unimodular(preferred_algebra<double>(Family::R3)));
}

TEST_CASE("Killing form") {
  Mat3 k = killing_form(preferred_algebra<double>(Family::sl2));
  Mat3 expect;
  expect << 2, 0, 0, 0, 0, 2, 0, 2, 0;
  CHECK((k - expect).norm() < 1e-14);
  CHECK((killing_form(preferred_algebra<double>(Family::so3)) + 2 * Mat3::Identity()).norm() < 1e-14);
  CHECK(killing_form(preferred_algebra<double>(Family::R3)).norm() == 0);

  std::mt19937_64 rng(7);
  for (const auto& s : family_samples())
    for (int n = 0; n < 5; ++n) {
      auto a = preferred_algebra<double>(s.family, s.param);
      Mat3 p = random_transport(rng);
      Mat3 lhs = killing_form(transport(a, p));
      Mat3 rhs = p.transpose() * killing_form(a) * p;
      CHECK((lhs - rhs).norm() <= 1e-9 * std::max(1.0, rhs.norm()));
    }
}

TEST_CASE("derivation space against the Kronecker oracle") {
  CHECK(derivation_space(preferred_algebra<double>(Family::heis)).dim() == 6);
  CHECK(derivation_space(preferred_algebra<double>(Family::R3)).dim() == 9);
  CHECK(derivation_space(preferred_algebra<double>(Family::so3)).dim() == 3);
  std::mt19937_64 rng(11);
  for (const auto& s : family_samples()) {
    auto a = preferred_algebra<double>(s.family, s.param);
    auto ds = derivation_space(a);
    CHECK(ds.dim() == derivation_dim_oracle(a));
    for (const auto& d : ds.basis) CHECK(derivation_residual(a, d) <= 1e-8);
    auto moved = transport(a, random_transport(rng));
    CHECK(derivation_space(moved).dim() == ds.dim());
  }
}

TEST_CASE("derived dimension is invariant under transport") {
  std::mt19937_64 rng(5);
  for (const auto& s : family_samples()) {
    auto a = preferred_algebra<double>(s.family, s.param);
    for (int n = 0; n < 10; ++n) {
      auto b = transport(a, random_transport(rng));
      CHECK(derived_algebra(b).dim() == derived_algebra(a).dim());
      CHECK(unimodular(b) == unimodular(a));
    }
  }
}
