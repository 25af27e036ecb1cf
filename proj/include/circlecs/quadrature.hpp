#pragma once

#include <vector>

namespace circlecs {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for the weight exp(-t^2) on the real line
/// (Golub-Welsch). Weights sum to sqrt(pi).
QuadratureRule gauss_hermite(int n);

/// Periodic trapezoid nodes on [-pi, pi) with equal weights 1/n, i.e. the
/// rule for the normalized measure dphi / 2pi.
QuadratureRule periodic_trapezoid(int n);

}  // namespace circlecs
