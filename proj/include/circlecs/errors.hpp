#pragma once

#include <stdexcept>
#include <string>

namespace circlecs {

/// Failure categories surfaced by the numerical kernels.
enum class ErrorKind {
  non_convergence,      // series truncation budget exhausted
  window_overflow,      // coefficient window exceeds its budget
  zero_norm,
  overflow_guard,       // evaluation outside the safe band of a truncated series
  boundary_zero,        // contour passes through a zero
  count_mismatch,       // polishing lost or merged a zero
  undetermined,         // integer l could not be fixed
  pole,
  near_zero_denominator,
  bvp_no_convergence,
  step_resolution,
  riccati_blowup,       // caustic
  window_too_small,
  quadrature_budget,
  product_divergence,
};

const char* to_string(ErrorKind kind);

/// Numerical error carrying its category and an optional scalar detail
/// (a safe bound, a blow-up time, the attempted route, ...).
class NumericalError : public std::runtime_error {
 public:
  NumericalError(ErrorKind kind, const std::string& what, double detail = 0.0)
      : std::runtime_error(what), kind_(kind), detail_(detail) {}

  ErrorKind kind() const noexcept { return kind_; }
  double detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  double detail_;
};

}  // namespace circlecs
