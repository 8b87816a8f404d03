#pragma once

#include "bianchi/types.hpp"

#include <array>

namespace bianchi {

/// Spectrum of a real 3x3 matrix from its characteristic cubic.
struct Spectrum {
  enum class Kind { ThreeReal, RealAndComplexPair };
  Kind kind;
  std::array<double, 3> values{};  // ThreeReal: sorted descending
  double real = 0;                 // RealAndComplexPair: the real root
  double re = 0, im = 0;           // RealAndComplexPair: re +- i im, im > 0
};

Spectrum eigen3(const Mat3& m);

}  // namespace bianchi
