#include "circlecs/circle_states.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "circlecs/errors.hpp"
#include "circlecs/quadrature.hpp"

namespace circlecs {

void Representation::validate() const {
  if (!(delta >= 0.0 && delta < 1.0)) throw std::invalid_argument("representation: delta must lie in [0, 1)");
  if (!(s > 0.0)) throw std::invalid_argument("representation: s must be positive");
  if (!(hbar > 0.0)) throw std::invalid_argument("representation: hbar must be positive");
}

PhasePoint::PhasePoint(double phi, double p) : phi_(phi - 2.0 * pi * std::floor((phi + pi) / (2.0 * pi))), p_(p) {
  if (phi_ >= pi) phi_ -= 2.0 * pi;
}

PhasePoint PhasePoint::from_z(cplx z, double hbar) { return {z.real(), z.imag() * hbar}; }

PhasePoint PhasePoint::from_peak_momentum(double phi, double peak_momentum, double s) {
  return {phi, peak_momentum * s * s};
}

StateVector StateVector::basis(long n) { return {n, {cplx(1.0, 0.0)}}; }

cplx StateVector::at(long n) const {
  if (n < n_min || n > n_max()) return 0.0;
  return coeffs[static_cast<std::size_t>(n - n_min)];
}

double StateVector::norm_squared() const {
  double acc = 0.0;
  for (const auto& c : coeffs) acc += std::norm(c);
  return acc;
}

cplx StateVector::inner(const StateVector& other) const {
  const long lo = std::max(n_min, other.n_min);
  const long hi = std::min(n_max(), other.n_max());
  cplx acc = 0.0;
  for (long n = lo; n <= hi; ++n) acc += std::conj(at(n)) * other.at(n);
  return acc;
}

StateVector coherent_state(const Representation& rep, cplx z, double tol, std::size_t window_budget) {
  rep.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("coherent_state: tol must be positive");
  const double s2 = rep.s * rep.s;
  // log|c_n| = -x^2 s^2/2 + x Im z, maximal at x = Im z / s^2
  const double x_peak = z.imag() / s2;
  const double half_width = std::sqrt(-2.0 * std::log(std::min(tol, 1.0))) / rep.s;
  const long lo = static_cast<long>(std::ceil(x_peak - half_width - rep.delta));
  const long hi = static_cast<long>(std::floor(x_peak + half_width - rep.delta));
  const long count = std::max(0L, hi - lo + 1);
  if (static_cast<std::size_t>(count) > window_budget)
    throw NumericalError(ErrorKind::window_overflow,
                         "coherent_state: window of " + std::to_string(count) + " indices exceeds the budget",
                         static_cast<double>(count));
  StateVector out;
  out.n_min = lo;
  out.coeffs.reserve(static_cast<std::size_t>(count));
  for (long n = lo; n <= hi; ++n) {
    const double x = n + rep.delta;
    out.coeffs.push_back(std::exp(cplx(-0.5 * x * x * s2, 0.0) - cplx(0.0, x) * z));
  }
  return out;
}

StateVector coherent_state(const Representation& rep, const PhasePoint& z, double tol, std::size_t window_budget) {
  return coherent_state(rep, z.z(rep.hbar), tol, window_budget);
}

double norm_squared(const Representation& rep, cplx z) {
  return overlap(rep, z, z).real();
}

double norm_squared(const Representation& rep, const PhasePoint& z) { return norm_squared(rep, z.z(rep.hbar)); }

cplx overlap(const Representation& rep, cplx z_left, cplx z_right) {
  rep.validate();
  // sum_n exp(-(n+delta)^2 s^2 + i (n+delta)(conj(z_left) - z_right))
  const cplx beta = cplx(0.0, 1.0) * (std::conj(z_left) - z_right);
  return gauss_lattice_sum({rep.s * rep.s, beta, rep.delta}, 0);
}

cplx overlap(const Representation& rep, const PhasePoint& z_left, const PhasePoint& z_right) {
  return overlap(rep, z_left.z(rep.hbar), z_right.z(rep.hbar));
}

namespace {

double checked_norm(const StateVector& psi, const char* who) {
  const double nrm = psi.norm_squared();
  if (!(nrm > 0.0)) throw NumericalError(ErrorKind::zero_norm, std::string(who) + ": state has zero norm");
  return nrm;
}

// Weight of g|n> = w(n)|n+1>.
double ladder_weight(const Representation& rep, long n) {
  const double x = n + rep.delta;
  return std::exp(0.5 * rep.s * rep.s * (x * x - (x + 1.0) * (x + 1.0)));
}

}  // namespace

cplx expect_exp_iphi(const Representation& rep, const StateVector& psi) {
  rep.validate();
  const double nrm = checked_norm(psi, "expect_exp_iphi");
  cplx acc = 0.0;
  for (long n = psi.n_min; n < psi.n_max(); ++n) acc += std::conj(psi.at(n + 1)) * psi.at(n);
  return acc / nrm;
}

double expect_p(const Representation& rep, const StateVector& psi) {
  rep.validate();
  const double nrm = checked_norm(psi, "expect_p");
  double acc = 0.0;
  for (long n = psi.n_min; n <= psi.n_max(); ++n) acc += (n + rep.delta) * std::norm(psi.at(n));
  return rep.hbar * acc / nrm;
}

StateVector ladder_apply(const Representation& rep, const StateVector& psi, bool adjoint) {
  rep.validate();
  StateVector out;
  out.coeffs.resize(psi.size());
  if (!adjoint) {
    out.n_min = psi.n_min + 1;
    for (std::size_t j = 0; j < psi.size(); ++j)
      out.coeffs[j] = psi.coeffs[j] * ladder_weight(rep, psi.n_min + static_cast<long>(j));
  } else {
    // g^dag |n> = w(n-1) |n-1>
    out.n_min = psi.n_min - 1;
    for (std::size_t j = 0; j < psi.size(); ++j)
      out.coeffs[j] = psi.coeffs[j] * ladder_weight(rep, psi.n_min + static_cast<long>(j) - 1);
  }
  return out;
}

std::vector<cplx> identity_resolution_matrix(const Representation& rep, long n_lo, long n_hi,
                                             const QuadratureSpec& quad) {
  rep.validate();
  if (n_hi < n_lo) throw std::invalid_argument("identity_resolution_matrix: empty index window");
  if (quad.p_nodes < 1 || quad.phi_nodes < 1) throw std::invalid_argument("identity_resolution_matrix: empty rule");
  if (static_cast<long>(quad.p_nodes) * quad.phi_nodes > quadrature_budget)
    throw NumericalError(ErrorKind::quadrature_budget, "identity_resolution_matrix: node count exceeds the budget",
                         static_cast<double>(quad.p_nodes) * quad.phi_nodes);

  const auto gh = gauss_hermite(quad.p_nodes);
  const auto tr = periodic_trapezoid(quad.phi_nodes);
  const long dim = n_hi - n_lo + 1;
  std::vector<cplx> m(static_cast<std::size_t>(dim * dim), 0.0);
  std::vector<cplx> c(static_cast<std::size_t>(dim));
  const double s2 = rep.s * rep.s;

  // With p = s hbar t the measure  dp exp(-p^2/s^2 hbar^2) / (sqrt(pi) s hbar)
  // becomes  dt exp(-t^2) / sqrt(pi).
  for (int i = 0; i < quad.p_nodes; ++i) {
    const double p_over_hbar = rep.s * gh.nodes[i];
    const double wp = gh.weights[i] / std::sqrt(pi);
    for (int j = 0; j < quad.phi_nodes; ++j) {
      const cplx z(tr.nodes[j], p_over_hbar);
      const double w = wp * tr.weights[j];
      for (long a = 0; a < dim; ++a) {
        const double x = n_lo + a + rep.delta;
        c[a] = std::exp(cplx(-0.5 * x * x * s2, 0.0) - cplx(0.0, x) * z);
      }
      for (long a = 0; a < dim; ++a)
        for (long b = 0; b < dim; ++b) m[a * dim + b] += w * c[a] * std::conj(c[b]);
    }
  }
  return m;
}

double identity_resolution_residual(const Representation& rep, long n_lo, long n_hi, const QuadratureSpec& quad) {
  const std::vector<cplx> m = identity_resolution_matrix(rep, n_lo, n_hi, quad);
  const long dim = n_hi - n_lo + 1;
  double residual = 0.0;
  for (long a = 0; a < dim; ++a)
    for (long b = 0; b < dim; ++b)
      residual = std::max(residual, std::abs(m[a * dim + b] - (a == b ? 1.0 : 0.0)));
  return residual;
}

std::pair<double, double> uncertainty_product(const Representation& rep, cplx z) {
  rep.validate();
  // A wide window keeps the truncation far below the 1e-10 comparison scale.
  const StateVector psi = coherent_state(rep, z, 1e-60);
  const double nrm = checked_norm(psi, "uncertainty_product");
  const StateVector gpsi = ladder_apply(rep, psi, false);
  const StateVector gdpsi = ladder_apply(rep, psi, true);

  const cplx mean_g = psi.inner(gpsi) / nrm;
  const double mean_q = mean_g.real();
  const double mean_p = mean_g.imag();

  // (Q - <Q>)psi and (P - <P>)psi on the index range n_min-1 .. n_max+1.
  const long lo = psi.n_min - 1;
  const long hi = psi.n_max() + 1;
  double var_q = 0.0;
  double var_p = 0.0;
  for (long n = lo; n <= hi; ++n) {
    const cplx g = gpsi.at(n);
    const cplx gd = gdpsi.at(n);
    const cplx c = psi.at(n);
    var_q += std::norm(0.5 * (g + gd) - mean_q * c);
    var_p += std::norm((g - gd) / cplx(0.0, 2.0) - mean_p * c);
  }
  var_q /= nrm;
  var_p /= nrm;
  // [Q, P] = [g^dag, g] / 2i
  const double comm = (gpsi.norm_squared() - gdpsi.norm_squared()) / nrm;
  return {std::sqrt(var_q * var_p), 0.25 * std::abs(comm)};
}

}  // namespace circlecs
