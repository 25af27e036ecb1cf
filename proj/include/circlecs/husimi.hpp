#pragma once

// Bargmann-Segal functions psi(z) = <psi|z>, Husimi fields on the cylinder,
// zeros in the fundamental strip [0, 2 pi) x iR and the periodic Hadamard
// reconstruction
//
//   psi(z) = exp(C + i (l - delta) z) [sin(z/2) exp(-iz/2)]^m
//            prod_k sin((z - a_k)/2) / sin(-a_k/2) exp(-nu_k i z/2),  nu_k = sgn Im a_k.

#include <optional>
#include <vector>

#include "circlecs/circle_states.hpp"

namespace circlecs {

struct Band {
  double lo;
  double hi;
  bool contains(double y) const { return y >= lo && y <= hi; }
};

/// psi and psi' at one point as mantissas relative to exp(log_scale), together
/// with sum_n |term_n| on the same scale (the local magnitude scale).
struct ScaledEval {
  cplx value;
  cplx derivative;
  double abs_sum;
  double log_scale;

  double log_abs() const;
};

class BargmannFunction {
 public:
  /// truncated marks psi as a window of an infinite coefficient sequence (for
  /// example a coherent state); the safe band then keeps the window edges
  /// negligible. Otherwise psi is taken as exact finite support.
  BargmannFunction(Representation rep, StateVector psi, bool truncated = false);

  const Representation& rep() const { return rep_; }
  const StateVector& psi() const { return psi_; }
  bool truncated() const { return truncated_; }

  /// Range of Im z where value() is trustworthy and finite.
  Band safe_band() const { return band_; }

  /// Lowest and highest index with a nonzero coefficient. Throws zero_norm for
  /// the zero state.
  long lowest_index() const;
  long highest_index() const;

  cplx value(cplx z) const;
  cplx derivative(cplx z) const;
  ScaledEval scaled(cplx z) const;

 private:
  void check_band(cplx z) const;

  Representation rep_;
  StateVector psi_;
  bool truncated_;
  std::vector<double> log_weight_;  // log|c_n| - x^2 s^2/2, -inf for zero entries
  Band band_;
};

/// Uniform grid: phi_count nodes on [-pi, pi), p_count nodes on [p_min, p_max].
struct CylinderGrid {
  int phi_count = 128;
  double p_min = -3.0;
  double p_max = 3.0;
  int p_count = 121;

  void validate() const;
  double phi(int i) const;
  double p(int j) const;
};

/// Husimi density exp(-p^2/(s hbar)^2) |psi(phi + i p/hbar)|^2 / (sqrt(pi) s hbar <psi|psi>),
/// stored phi-major: entry i * p_count + j is (phi_i, p_j).
std::vector<double> husimi_field(const BargmannFunction& f, const CylinderGrid& grid);

/// Mass of a field under dphi/2pi dp (periodic rule in phi, trapezoid in p).
double husimi_mass(const std::vector<double>& field, const CylinderGrid& grid);

/// nu for a zero a, with sgn 0 := +1.
int nu_of(cplx a);

struct StripZeros {
  std::vector<cplx> a_list;  // Re in [0, 2 pi), a != 0, repeated by multiplicity
  int m = 0;                 // multiplicity of the zero at z = 0
  std::optional<long> l;
  std::optional<cplx> C;
  std::vector<int> nu_list;
};

/// Zeros of f in [0, 2 pi) x i(-im_cutoff, im_cutoff) with multiplicity. The
/// count comes from the windings along the two horizontal lines (the vertical
/// edges cancel by quasi-periodicity); zeros are isolated by rectangle
/// subdivision and polished by Newton. Zeros must not lie on the lines
/// Im z = +-im_cutoff. tol bounds |psi| / local scale at each reported zero
/// and the admissible distance of a contour to a zero.
StripZeros find_strip_zeros(const BargmannFunction& f, double im_cutoff, double tol = 1e-10);

/// Number of zeros in the strip with y_lo < Im z < y_hi.
long strip_zero_count(const BargmannFunction& f, double y_lo, double y_hi);

/// Integer k(y) with Delta arg psi / 2 pi = k(y) - delta along Im z = y over one period.
long line_winding(const BargmannFunction& f, double y);

/// For finite support: a band containing every zero (Cauchy bound on the
/// polynomial in exp(-iz)).
Band finite_support_zero_band(const BargmannFunction& f);

/// The integer l. Without zeros: the winding along lines approaching the real
/// axis from below. With zeros: the winding along one line below the axis,
/// corrected by the zeros between that line and the axis.
long determine_l(const BargmannFunction& f);
long determine_l(const BargmannFunction& f, const StripZeros& zeros);

/// Evaluator of the product formula. Without C the result is fixed up to a
/// multiplicative constant (C taken as 0).
class HadamardEvaluator {
 public:
  HadamardEvaluator(StripZeros zeros, Representation rep);

  const StripZeros& zeros() const { return zeros_; }
  cplx log_value(cplx z) const;
  cplx value(cplx z) const;

 private:
  StripZeros zeros_;
  Representation rep_;
};

/// Throws std::invalid_argument for zeros outside the strip or at the origin,
/// or without l.
HadamardEvaluator hadamard_reconstruct(const StripZeros& zeros, const Representation& rep);

/// Sets C by matching f at the real-axis point of largest |psi|.
void fit_constant(StripZeros& zeros, const BargmannFunction& f);

/// find_strip_zeros, determine_l and fit_constant in sequence.
StripZeros reconstruction_data(const BargmannFunction& f, double im_cutoff, double tol = 1e-10);

/// Exponent sum_k pi (cot(a_k/2) + nu_k i) of prod_k [-exp(pi cot(a_k/2))].
cplx branch_corrected_log_product(const std::vector<cplx>& a_list);

/// -sin(a/2) (1 - z/a) prod_{n=1}^{N} (1 - z/(a + 2 pi n)) (1 - z/(a - 2 pi n)).
cplx sin_hadamard_truncated(cplx z, cplx a, long n_terms);

}  // namespace circlecs
