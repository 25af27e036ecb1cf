#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "circlecs/errors.hpp"
#include "circlecs/husimi.hpp"

namespace circlecs {

namespace {

constexpr double two_pi = 2.0 * pi;
constexpr cplx I(0.0, 1.0);

// A logarithm of sin(w) that stays finite far from the real axis.
cplx log_sin(cplx w) {
  const double ln2 = std::log(2.0);
  if (w.imag() > 0.0) return -I * w - ln2 + I * (0.5 * pi) + std::log(1.0 - std::exp(2.0 * I * w));
  return I * w - ln2 - I * (0.5 * pi) + std::log(1.0 - std::exp(-2.0 * I * w));
}

}  // namespace

HadamardEvaluator::HadamardEvaluator(StripZeros zeros, Representation rep) : zeros_(std::move(zeros)), rep_(rep) {}

cplx HadamardEvaluator::log_value(cplx z) const {
  cplx acc = zeros_.C.value_or(0.0) + I * (static_cast<double>(*zeros_.l) - rep_.delta) * z;
  if (zeros_.m > 0) acc += static_cast<double>(zeros_.m) * (log_sin(0.5 * z) - 0.5 * I * z);
  for (std::size_t k = 0; k < zeros_.a_list.size(); ++k) {
    const cplx a = zeros_.a_list[k];
    const cplx term = log_sin(0.5 * (z - a)) - log_sin(-0.5 * a) - 0.5 * I * static_cast<double>(zeros_.nu_list[k]) * z;
    // With nu_k = sgn Im a_k the factors of zeros far from z tend to 1; a
    // factor that stays away from 1 means the partial products cannot settle.
    if (std::abs(a.imag()) > std::abs(z.imag()) + 10.0 && std::abs(std::remainder(term.imag(), two_pi)) +
                                                                     std::abs(term.real()) > 1e-3)
      throw NumericalError(ErrorKind::product_divergence,
                           "hadamard_reconstruct: partial products fail the Cauchy criterion", a.imag());
    acc += term;
  }
  return acc;
}

cplx HadamardEvaluator::value(cplx z) const { return std::exp(log_value(z)); }

HadamardEvaluator hadamard_reconstruct(const StripZeros& zeros, const Representation& rep) {
  rep.validate();
  if (!zeros.l) throw std::invalid_argument("hadamard_reconstruct: l is not set");
  if (zeros.m < 0) throw std::invalid_argument("hadamard_reconstruct: negative multiplicity at the origin");
  if (zeros.nu_list.size() != zeros.a_list.size())
    throw std::invalid_argument("hadamard_reconstruct: nu_list and a_list differ in length");
  for (std::size_t k = 0; k < zeros.a_list.size(); ++k) {
    const cplx a = zeros.a_list[k];
    if (!(a.real() >= 0.0 && a.real() < two_pi) || a == 0.0)
      throw std::invalid_argument("hadamard_reconstruct: zero outside the strip or at the origin");
    if (zeros.nu_list[k] != 1 && zeros.nu_list[k] != -1)
      throw std::invalid_argument("hadamard_reconstruct: nu entries must be +1 or -1");
  }
  return {zeros, rep};
}

void fit_constant(StripZeros& zeros, const BargmannFunction& f) {
  zeros.C.reset();
  const HadamardEvaluator q = hadamard_reconstruct(zeros, f.rep());
  constexpr int samples = 512;
  double best = -std::numeric_limits<double>::infinity();
  cplx z_ref = 0.0;
  for (int j = 0; j < samples; ++j) {
    const cplx z(two_pi * j / samples, 0.0);
    const auto e = f.scaled(z);
    if (e.value == 0.0) continue;
    const double la = e.log_abs();
    if (la > best) {
      best = la;
      z_ref = z;
    }
  }
  if (!std::isfinite(best)) throw NumericalError(ErrorKind::zero_norm, "fit_constant: psi vanishes on the real axis");
  const auto e = f.scaled(z_ref);
  zeros.C = std::log(e.value) + e.log_scale - q.log_value(z_ref);
}

StripZeros reconstruction_data(const BargmannFunction& f, double im_cutoff, double tol) {
  StripZeros zeros = find_strip_zeros(f, im_cutoff, tol);
  zeros.l = determine_l(f, zeros);
  fit_constant(zeros, f);
  return zeros;
}

cplx branch_corrected_log_product(const std::vector<cplx>& a_list) {
  cplx acc = 0.0;
  for (const cplx& a : a_list) {
    const cplx sn = std::sin(0.5 * a);
    if (std::abs(sn) < 1e-14)
      throw NumericalError(ErrorKind::pole, "branch_corrected_log_product: cot(a/2) has a pole", a.real());
    acc += pi * (std::cos(0.5 * a) / sn + I * static_cast<double>(nu_of(a)));
  }
  return acc;
}

cplx sin_hadamard_truncated(cplx z, cplx a, long n_terms) {
  if (n_terms < 0) throw std::invalid_argument("sin_hadamard_truncated: n_terms must be nonnegative");
  const cplx r = a / two_pi;
  if (std::abs(r.imag()) < 1e-14 && std::abs(r.real() - std::round(r.real())) < 1e-14)
    throw NumericalError(ErrorKind::pole, "sin_hadamard_truncated: a / 2 pi is an integer", a.real());
  cplx prod = -std::sin(0.5 * a) * (1.0 - z / a);
  for (long n = 1; n <= n_terms; ++n) {
    const double shift = two_pi * static_cast<double>(n);
    prod *= (1.0 - z / (a + shift)) * (1.0 - z / (a - shift));
  }
  return prod;
}

}  // namespace circlecs
