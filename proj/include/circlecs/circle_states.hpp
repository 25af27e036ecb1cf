#pragma once

// Complexifier coherent states on the circle in the momentum basis |n>_delta,
//
//   |z>_delta = sum_n exp(-(n+delta)^2 s^2/2 - i (n+delta) z) |n>_delta,
//   z = phi + i p / hbar,
//
// together with norms, overlaps, expectation values and the ladder operator
// g = exp(-s^2 p^2 / 2 hbar^2) exp(i phi) exp(s^2 p^2 / 2 hbar^2).

#include <cstddef>
#include <utility>
#include <vector>

#include "circlecs/theta_core.hpp"

namespace circlecs {

/// Hilbert-space representation (delta) together with the squeezing s.
struct Representation {
  double delta = 0.0;  // [0, 1)
  double s = 1.0;      // > 0
  double hbar = 1.0;   // > 0

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Label of a coherent state. phi is kept in [-pi, pi); p is the raw label,
/// the state is peaked at momentum p / s^2.
class PhasePoint {
 public:
  PhasePoint() = default;
  PhasePoint(double phi, double p);

  static PhasePoint from_z(cplx z, double hbar = 1.0);
  static PhasePoint from_peak_momentum(double phi, double peak_momentum, double s);

  double phi() const { return phi_; }
  double p() const { return p_; }
  cplx z(double hbar = 1.0) const { return {phi_, p_ / hbar}; }
  double peak_momentum(double s) const { return p_ / (s * s); }

 private:
  double phi_ = 0.0;
  double p_ = 0.0;
};

/// Coefficients <n|psi> on the contiguous index window [n_min, n_min + size).
struct StateVector {
  long n_min = 0;
  std::vector<cplx> coeffs;

  static StateVector basis(long n);

  std::size_t size() const { return coeffs.size(); }
  long n_max() const { return n_min + static_cast<long>(coeffs.size()) - 1; }
  /// <n|psi>, zero outside the window.
  cplx at(long n) const;
  double norm_squared() const;
  /// <this|other> over the union of the windows.
  cplx inner(const StateVector& other) const;
};

inline constexpr std::size_t default_window_budget = 4096;

/// Coherent state |z>_delta truncated to the indices whose coefficient is at
/// least tol times the largest one. The raw complex label is used, so
/// coherent_state(z + 2 pi) = exp(-2 pi i delta) coherent_state(z).
StateVector coherent_state(const Representation& rep, cplx z, double tol = 1e-16,
                           std::size_t window_budget = default_window_budget);
StateVector coherent_state(const Representation& rep, const PhasePoint& z, double tol = 1e-16,
                           std::size_t window_budget = default_window_budget);

/// <z|z>.
double norm_squared(const Representation& rep, cplx z);
double norm_squared(const Representation& rep, const PhasePoint& z);

/// <z_left|z_right>.
cplx overlap(const Representation& rep, cplx z_left, cplx z_right);
cplx overlap(const Representation& rep, const PhasePoint& z_left, const PhasePoint& z_right);

/// <psi| exp(i phi) |psi> / <psi|psi>.
cplx expect_exp_iphi(const Representation& rep, const StateVector& psi);

/// <psi| p |psi> / <psi|psi>.
double expect_p(const Representation& rep, const StateVector& psi);

/// Applies g (adjoint = false) or g^dagger (adjoint = true).
StateVector ladder_apply(const Representation& rep, const StateVector& psi, bool adjoint);

/// Resolution-of-identity quadrature: Gauss-Hermite in p, periodic trapezoid in phi.
struct QuadratureSpec {
  int p_nodes = 64;
  int phi_nodes = 128;
};

inline constexpr long quadrature_budget = 1L << 22;

/// The quadrature-assembled matrix  int dmu(z) <m|z><z|n>,  row-major over
/// m, n in [n_lo, n_hi]. Throws quadrature_budget for too many nodes.
std::vector<cplx> identity_resolution_matrix(const Representation& rep, long n_lo, long n_hi,
                                             const QuadratureSpec& quad);

/// Max entrywise deviation from the identity of the quadrature-assembled
/// matrix  int dmu(z) <m|z><z|n>  over m, n in [n_lo, n_hi].
double identity_resolution_residual(const Representation& rep, long n_lo, long n_hi,
                                    const QuadratureSpec& quad);

/// (Delta Q * Delta P, |<[Q, P]>| / 2) in |z> with Q = (g + g^dag)/2, P = (g - g^dag)/2i.
std::pair<double, double> uncertainty_product(const Representation& rep, cplx z);

}  // namespace circlecs
