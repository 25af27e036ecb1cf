#include "circlecs/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "circlecs/theta_core.hpp"

namespace circlecs {

QuadratureRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: need at least one node");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double off = std::sqrt(0.5 * k);
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  // Eigenvalues seed the nodes; Newton on the orthonormal recurrence polishes
  // them and the Christoffel sums give weights with full relative accuracy
  // even far in the tails.
  auto orthonormal = [n](double t, double& pn, double& pn1, double& christoffel) {
    double prev = 0.0;
    double cur = std::pow(pi, -0.25);
    christoffel = cur * cur;
    for (int k = 0; k < n; ++k) {
      const double next = (t * cur - std::sqrt(0.5 * k) * prev) / std::sqrt(0.5 * (k + 1));
      prev = cur;
      cur = next;
      if (k + 1 < n) christoffel += cur * cur;
    }
    pn = cur;
    pn1 = prev;
  };
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    double t = es.eigenvalues()(k);
    double pn = 0.0, pn1 = 0.0, ch = 0.0;
    for (int it = 0; it < 4; ++it) {
      orthonormal(t, pn, pn1, ch);
      t -= pn / (std::sqrt(2.0 * n) * pn1);
    }
    orthonormal(t, pn, pn1, ch);
    rule.nodes[k] = t;
    rule.weights[k] = 1.0 / ch;
  }
  return rule;
}

QuadratureRule periodic_trapezoid(int n) {
  if (n < 1) throw std::invalid_argument("periodic_trapezoid: need at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.assign(n, 1.0 / n);
  for (int k = 0; k < n; ++k) rule.nodes[k] = -pi + 2.0 * pi * k / n;
  return rule;
}

}  // namespace circlecs
