#include "bianchi/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bianchi {

Spectrum eigen3(const Mat3& m) {
  // lambda^3 + a lambda^2 + b lambda + c
  const double a = -m.trace();
  const double b = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0) +
                   m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  const double c = -m.determinant();
  const double shift = -a / 3.0;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double disc = q * q / 4.0 + p * p * p / 27.0;

  const double scale = m.cwiseAbs().maxCoeff();
  const double tiny = 1e-14 * std::pow(scale, 6);

  Spectrum s;
  if (scale == 0) {
    s.kind = Spectrum::Kind::ThreeReal;
    return s;
  }
  if (disc <= tiny) {
    s.kind = Spectrum::Kind::ThreeReal;
    if (p >= 0) {
      s.values = {shift, shift, shift};
    } else {
      const double r = 2.0 * std::sqrt(-p / 3.0);
      double arg = 3.0 * q / (2.0 * p) * std::sqrt(-3.0 / p);
      arg = std::clamp(arg, -1.0, 1.0);
      const double phi = std::acos(arg) / 3.0;
      for (int k = 0; k < 3; ++k)
        s.values[k] = shift + r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0);
      std::sort(s.values.begin(), s.values.end(), std::greater<>());
    }
    return s;
  }
  const double sq = std::sqrt(disc);
  const double u = std::cbrt(-q / 2.0 + sq);
  const double v = std::cbrt(-q / 2.0 - sq);
  s.kind = Spectrum::Kind::RealAndComplexPair;
  s.real = shift + u + v;
  s.re = shift - (u + v) / 2.0;
  s.im = std::sqrt(3.0) / 2.0 * std::abs(u - v);
  return s;
}

}  // namespace bianchi
