#include <cmath>
#include <sstream>
#include <stdexcept>

#include "circlecs/errors.hpp"
#include "circlecs/semiclassics.hpp"

namespace circlecs {

namespace {

constexpr cplx I(0.0, 1.0);

// Value and derivatives up to second order in (w, z).
struct Jet2 {
  cplx f, w, z, ww, zz, wz;
};

Jet2 operator+(const Jet2& a, const Jet2& b) {
  return {a.f + b.f, a.w + b.w, a.z + b.z, a.ww + b.ww, a.zz + b.zz, a.wz + b.wz};
}

Jet2 operator*(cplx c, const Jet2& a) { return {c * a.f, c * a.w, c * a.z, c * a.ww, c * a.zz, c * a.wz}; }

Jet2 operator*(const Jet2& a, const Jet2& b) {
  return {a.f * b.f,
          a.w * b.f + a.f * b.w,
          a.z * b.f + a.f * b.z,
          a.ww * b.f + 2.0 * a.w * b.w + a.f * b.ww,
          a.zz * b.f + 2.0 * a.z * b.z + a.f * b.zz,
          a.wz * b.f + a.w * b.z + a.z * b.w + a.f * b.wz};
}

Jet2 reciprocal(const Jet2& a) {
  const cplx g = 1.0 / a.f;
  const cplx g2 = g * g, g3 = g2 * g;
  return {g,
          -a.w * g2,
          -a.z * g2,
          2.0 * a.w * a.w * g3 - a.ww * g2,
          2.0 * a.z * a.z * g3 - a.zz * g2,
          2.0 * a.w * a.z * g3 - a.wz * g2};
}

// F(beta) with beta = i (w - z) + const and F^(j) = G_{k+j}.
Jet2 lattice_jet(const ScaledMoments& m, int k, double scale) {
  const cplx f0 = m.mantissa[k] * scale, f1 = m.mantissa[k + 1] * scale, f2 = m.mantissa[k + 2] * scale;
  return {f0, I * f1, -I * f1, -f2, -f2, f2};
}

// exp(c i w + const) as a jet.
Jet2 exp_iw_jet(double c, double log_const, cplx w) {
  const cplx e = std::exp(c * I * w + log_const);
  return {e, c * I * e, 0.0, -c * c * e, 0.0, 0.0};
}

// max_n Re(-alpha x^2 + beta x) over the lattice x = n + delta.
double dominant_log_term(double alpha, double beta_re, double delta) {
  const double n0 = std::floor(beta_re / (2.0 * alpha) - delta);
  double best = -INFINITY;
  for (double n = n0 - 1.0; n <= n0 + 2.0; n += 1.0) {
    const double x = n + delta;
    best = std::max(best, -alpha * x * x + beta_re * x);
  }
  return best;
}

std::string point_text(cplx w, cplx z) {
  std::ostringstream os;
  os.precision(17);
  os << "w = (" << w.real() << ", " << w.imag() << "), z = (" << z.real() << ", " << z.imag() << ")";
  return os.str();
}

Jet2 h_jet(const HolomorphicHamiltonian& H, cplx w, cplx z, const Representation& rep) {
  H.validate();
  rep.validate();
  const double s2 = rep.s * rep.s;
  const cplx beta = I * (w - z);
  const ScaledMoments d = gauss_lattice_moments({s2, beta, rep.delta}, 4);

  const double log_d = std::log(std::abs(d.mantissa[0])) + d.log_scale;
  if (!(log_d - dominant_log_term(s2, beta.real(), rep.delta) >= std::log(1e-280)))
    throw NumericalError(ErrorKind::near_zero_denominator,
                         "h_matrix_element: overlap vanishes to working accuracy at " + point_text(w, z),
                         log_d);

  const Jet2 den = lattice_jet(d, 0, 1.0);
  Jet2 num = (0.5 * rep.hbar * rep.hbar) * lattice_jet(d, 2, 1.0);
  const double k = H.coupling();
  if (k != 0.0) {
    // <n+1| exp(i phi) |n> = 1 shifts beta by -s^2 and brings exp(i w - s^2/2).
    const ScaledMoments up = gauss_lattice_moments({s2, beta - s2, rep.delta}, 2);
    const ScaledMoments dn = gauss_lattice_moments({s2, beta + s2, rep.delta}, 2);
    const Jet2 t_up = exp_iw_jet(1.0, -0.5 * s2 + up.log_scale - d.log_scale, w) * lattice_jet(up, 0, 1.0);
    const Jet2 t_dn = exp_iw_jet(-1.0, -0.5 * s2 + dn.log_scale - d.log_scale, w) * lattice_jet(dn, 0, 1.0);
    num = num + cplx(-0.5 * k) * (t_up + t_dn);
  }
  const Jet2 h = num * reciprocal(den);
  for (cplx c : {h.f, h.w, h.z, h.ww, h.zz, h.wz})
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw NumericalError(ErrorKind::near_zero_denominator,
                           "h_matrix_element: ratio not representable at " + point_text(w, z), log_d);
  return h;
}

}  // namespace

void HolomorphicHamiltonian::validate() const {
  if (kind == Kind::pendulum && !std::isfinite(k_pend))
    throw std::invalid_argument("hamiltonian: k_pend must be finite");
}

cplx h_matrix_element(const HolomorphicHamiltonian& H, cplx w, cplx z, const Representation& rep) {
  return h_jet(H, w, z, rep).f;
}

HPartials h_partials(const HolomorphicHamiltonian& H, cplx w, cplx z, const Representation& rep) {
  const Jet2 j = h_jet(H, w, z, rep);
  return {j.f, j.w, j.z, j.ww, j.zz, j.wz};
}

}  // namespace circlecs
