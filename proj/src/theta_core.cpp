#include "circlecs/theta_core.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "circlecs/errors.hpp"

namespace circlecs {

namespace {

constexpr double truncation_eps = 1e-16;
constexpr double max_log_scale = 700.0;

const char* route_name(SumRoute r) { return r == SumRoute::direct ? "direct" : "poisson"; }

// Accumulates a two-sided lattice series outward from a peak index. The term
// functor fills t[0..max_order] for a given lattice index and returns them
// relative to the common scale.
template <class TermFn>
ScaledMoments sum_outward(long peak, int max_order, int term_budget, SumRoute route, TermFn&& term) {
  ScaledMoments out;
  std::array<cplx, max_deriv_order + 1> t{};
  std::array<double, max_deriv_order + 1> running_max{};

  auto absorb = [&](long idx) {
    term(idx, t);
    for (int k = 0; k <= max_order; ++k) {
      out.mantissa[k] += t[k];
      running_max[k] = std::max(running_max[k], std::abs(t[k]));
    }
    ++out.terms_used;
  };
  auto negligible = [&]() {
    for (int k = 0; k <= max_order; ++k)
      if (std::abs(t[k]) > truncation_eps * running_max[k]) return false;
    return true;
  };

  absorb(peak);
  for (int dir : {+1, -1}) {
    double prev = std::numeric_limits<double>::infinity();
    for (long step = 1;; ++step) {
      if (out.terms_used >= term_budget)
        throw NumericalError(ErrorKind::non_convergence,
                             std::string("gauss_lattice_sum: term budget exhausted on the ") +
                                 route_name(route) + " route",
                             route == SumRoute::direct ? 0.0 : 1.0);
      absorb(peak + dir * step);
      double mag = 0.0;
      for (int k = 0; k <= max_order; ++k) mag = std::max(mag, std::abs(t[k]));
      if (negligible() && mag <= prev) break;
      prev = mag;
    }
  }
  return out;
}

// Double-double helpers. The direct route adds terms whose exponents reach
// tens of units; rounding those exponents in plain doubles costs eps * |exponent|
// per term, which cancellation then amplifies.
struct DD {
  double hi;
  double lo;
};

DD two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

DD dd_add(DD a, DD b) {
  DD s = two_sum(a.hi, b.hi);
  s.lo += a.lo + b.lo;
  return two_sum(s.hi, s.lo);
}

DD dd_mul(DD a, double c) {
  const double p = a.hi * c;
  const double e = std::fma(a.hi, c, -p) + a.lo * c;
  return two_sum(p, e);
}

DD dd_sq(DD a) {
  const double p = a.hi * a.hi;
  const double e = std::fma(a.hi, a.hi, -p) + 2.0 * a.hi * a.lo;
  return two_sum(p, e);
}

ScaledMoments direct_moments(const GaussSumParams& p, int max_order, int budget) {
  const double a = p.alpha;
  const double x_peak = p.beta.real() / (2.0 * a);
  const long n_peak = std::lround(x_peak - p.delta);
  const double xs = n_peak + p.delta;
  const double log_scale = -a * xs * xs + p.beta.real() * xs;
  auto res = sum_outward(n_peak, max_order, budget, SumRoute::direct,
                         [&](long n, std::array<cplx, max_deriv_order + 1>& t) {
                           const DD x = two_sum(static_cast<double>(n), p.delta);
                           const DD re = dd_add(dd_add(dd_mul(dd_sq(x), -a), dd_mul(x, p.beta.real())),
                                                DD{-log_scale, 0.0});
                           const DD im = dd_mul(x, p.beta.imag());
                           const cplx e = std::exp(re.hi) * (1.0 + re.lo) * std::polar(1.0, im.hi) *
                                          cplx(1.0, im.lo);
                           cplx pw = e;
                           for (int k = 0; k <= max_order; ++k) {
                             t[k] = pw;
                             pw *= x.hi;
                           }
                         });
  res.log_scale = log_scale;
  return res;
}

// Gaussian moments of mean y and variance 1/(2 alpha): the k-th beta
// derivative of exp(gamma^2 / (4 alpha)) divided by that exponential.
void hermite_moments(cplx y, double var, int max_order, std::array<cplx, max_deriv_order + 1>& m) {
  m[0] = 1.0;
  if (max_order >= 1) m[1] = y;
  if (max_order >= 2) m[2] = y * y + var;
  if (max_order >= 3) m[3] = y * y * y + 3.0 * y * var;
  if (max_order >= 4) m[4] = y * y * y * y + 6.0 * y * y * var + 3.0 * var * var;
}

ScaledMoments poisson_moments(const GaussSumParams& p, int max_order, int budget) {
  const double a = p.alpha;
  const double var = 1.0 / (2.0 * a);
  const double two_pi = 2.0 * pi;
  const long m_peak = std::lround(p.beta.imag() / two_pi);
  const double br = p.beta.real();
  const double bi_peak = p.beta.imag() - two_pi * m_peak;
  const double log_scale = 0.5 * std::log(pi / a) + (br * br - bi_peak * bi_peak) / (4.0 * a);
  std::array<cplx, max_deriv_order + 1> herm{};
  auto res = sum_outward(m_peak, max_order, budget, SumRoute::poisson,
                         [&](long m, std::array<cplx, max_deriv_order + 1>& t) {
                           const cplx gamma = p.beta - cplx(0.0, two_pi * m);
                           // exp(2 pi i m delta) with the phase reduced before the product
                           const double ph = two_pi * std::remainder(m * p.delta, 1.0);
                           const cplx e = std::exp(gamma * gamma / (4.0 * a) + cplx(0.5 * std::log(pi / a) - log_scale, ph));
                           hermite_moments(gamma / (2.0 * a), var, max_order, herm);
                           for (int k = 0; k <= max_order; ++k) t[k] = e * herm[k];
                         });
  res.log_scale = log_scale;
  if (log_scale <= max_log_scale) res.scale = std::sqrt(pi / a) * std::exp((br * br - bi_peak * bi_peak) / (4.0 * a));
  return res;
}

}  // namespace

cplx ScaledMoments::value(int k) const {
  if (log_scale > max_log_scale)
    throw NumericalError(ErrorKind::overflow_guard, "gauss_lattice_sum: result overflows double range", log_scale);
  return mantissa[k] * scale.value_or(std::exp(log_scale));
}

ScaledMoments gauss_lattice_moments(const GaussSumParams& params, int max_order, SumRoute route, int term_budget) {
  if (!(params.alpha > 0.0)) throw std::invalid_argument("gauss_lattice_sum: alpha must be positive");
  if (max_order < 0 || max_order > max_deriv_order)
    throw std::invalid_argument("gauss_lattice_sum: derivative order must be in [0, 4]");
  if (route == SumRoute::automatic) route = params.alpha >= 1.0 ? SumRoute::direct : SumRoute::poisson;
  return route == SumRoute::direct ? direct_moments(params, max_order, term_budget)
                                   : poisson_moments(params, max_order, term_budget);
}

cplx gauss_lattice_sum(const GaussSumParams& params, int deriv_order, SumRoute route, int term_budget) {
  return gauss_lattice_moments(params, deriv_order, route, term_budget).value(deriv_order);
}

cplx theta3(cplx w, cplx tau) {
  if (!(tau.imag() > 0.0))
    throw NumericalError(ErrorKind::non_convergence, "theta3: Im(tau) must be positive");
  if (tau.real() == 0.0) {
    // exp(pi i n^2 tau + 2 pi i n w) = exp(-alpha n^2 + beta n)
    return gauss_lattice_sum({pi * tau.imag(), cplx(0.0, 2.0 * pi) * w, 0.0}, 0);
  }
  // General tau: direct summation around the peak of the real exponent.
  const double peak = -w.imag() / tau.imag();
  const long n_peak = std::lround(peak);
  auto exponent = [&](long n) {
    const double nd = static_cast<double>(n);
    return cplx(0.0, pi) * nd * nd * tau + cplx(0.0, 2.0 * pi) * nd * w;
  };
  const double log_scale = exponent(n_peak).real();
  auto res = sum_outward(n_peak, 0, default_term_budget, SumRoute::direct,
                         [&](long n, std::array<cplx, max_deriv_order + 1>& t) {
                           t[0] = std::exp(exponent(n) - log_scale);
                         });
  res.log_scale = log_scale;
  return res.value(0);
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::non_convergence: return "non_convergence";
    case ErrorKind::window_overflow: return "window_overflow";
    case ErrorKind::zero_norm: return "zero_norm";
    case ErrorKind::overflow_guard: return "overflow_guard";
    case ErrorKind::boundary_zero: return "boundary_zero";
    case ErrorKind::count_mismatch: return "count_mismatch";
    case ErrorKind::undetermined: return "undetermined";
    case ErrorKind::pole: return "pole";
    case ErrorKind::near_zero_denominator: return "near_zero_denominator";
    case ErrorKind::bvp_no_convergence: return "bvp_no_convergence";
    case ErrorKind::step_resolution: return "step_resolution";
    case ErrorKind::riccati_blowup: return "riccati_blowup";
    case ErrorKind::window_too_small: return "window_too_small";
    case ErrorKind::quadrature_budget: return "quadrature_budget";
    case ErrorKind::product_divergence: return "product_divergence";
  }
  return "unknown";
}

}  // namespace circlecs
