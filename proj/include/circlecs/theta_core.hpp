#pragma once

// Gaussian lattice sums
//
//   G_k(alpha, beta, delta) = sum_{n in Z} x^k exp(-alpha x^2 + beta x),  x = n + delta,
//
// and the Jacobi theta function of the third kind. For alpha >= 1 the sum is
// taken directly; for alpha < 1 the Poisson-resummed dual series
//
//   G_0 = sqrt(pi/alpha) sum_m exp(2 pi i m delta) exp((beta - 2 pi i m)^2 / (4 alpha))
//
// is used, with the k-th beta derivative taken term by term.

#include <array>
#include <complex>
#include <optional>

namespace circlecs {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

struct GaussSumParams {
  double alpha;  // > 0
  cplx beta;
  double delta;  // in [0, 1)
};

enum class SumRoute { automatic, direct, poisson };

inline constexpr int max_deriv_order = 4;
inline constexpr int default_term_budget = 10000;

/// Lattice sums of all orders 0..max_order, stored as mantissas relative to
/// exp(log_scale). Used wherever ratios of sums are needed without overflow.
struct ScaledMoments {
  std::array<cplx, max_deriv_order + 1> mantissa{};
  double log_scale = 0.0;
  std::optional<double> scale;  // exp(log_scale) evaluated without the logarithm
  int terms_used = 0;

  cplx value(int k) const;
};

ScaledMoments gauss_lattice_moments(const GaussSumParams& params, int max_order,
                                    SumRoute route = SumRoute::automatic,
                                    int term_budget = default_term_budget);

/// sum_n (n+delta)^k exp(-(n+delta)^2 alpha + (n+delta) beta).
/// Throws NumericalError(non_convergence) when the term budget is exhausted
/// before the truncation criterion is met, or when the result overflows.
cplx gauss_lattice_sum(const GaussSumParams& params, int deriv_order,
                       SumRoute route = SumRoute::automatic,
                       int term_budget = default_term_budget);

/// theta_3(w, tau) = sum_n exp(pi i n^2 tau + 2 pi i n w), Im tau > 0.
cplx theta3(cplx w, cplx tau);

}  // namespace circlecs
