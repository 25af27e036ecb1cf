#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "circlecs/errors.hpp"
#include "circlecs/parallel.hpp"
#include "circlecs/quadrature.hpp"
#include "circlecs/semiclassics.hpp"

namespace circlecs {

namespace {

constexpr cplx I(0.0, 1.0);
constexpr long window_margin = 16;
constexpr double edge_ratio = 1e-14;

long window_dim(const IndexWindow& w) {
  if (w.n_hi < w.n_lo) throw std::invalid_argument("spectral: empty index window");
  return w.n_hi - w.n_lo + 1;
}

// Eigen-decomposition of the band-limited Hamiltonian on the window.
struct Spectrum {
  Eigen::VectorXd energy;
  Eigen::MatrixXd vectors;  // empty for the diagonal free rotor
};

Spectrum diagonalize(const HolomorphicHamiltonian& H, const Representation& rep, const IndexWindow& w) {
  const long dim = window_dim(w);
  Eigen::VectorXd diag(dim);
  for (long a = 0; a < dim; ++a) {
    const double x = w.n_lo + a + rep.delta;
    diag[a] = 0.5 * rep.hbar * rep.hbar * x * x;
  }
  if (H.coupling() == 0.0 || dim == 1) return {diag, {}};
  Eigen::VectorXd sub = Eigen::VectorXd::Constant(dim - 1, -0.5 * H.coupling());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success)
    throw NumericalError(ErrorKind::non_convergence, "spectral: tridiagonal eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Eigen::VectorXcd evolve(const Spectrum& sp, const Representation& rep, const Eigen::VectorXcd& psi, double tau) {
  Eigen::VectorXcd phase(sp.energy.size());
  for (Eigen::Index a = 0; a < sp.energy.size(); ++a) phase[a] = std::exp(-I * sp.energy[a] * tau / rep.hbar);
  if (sp.vectors.size() == 0) return phase.cwiseProduct(psi);
  const Eigen::MatrixXcd v = sp.vectors.cast<cplx>();
  return v * phase.cwiseProduct(v.transpose() * psi);
}

// <n|z> on the window without truncation.
Eigen::VectorXcd coherent_on_window(const Representation& rep, cplx z, const IndexWindow& w) {
  const long dim = window_dim(w);
  Eigen::VectorXcd c(dim);
  for (long a = 0; a < dim; ++a) {
    const double x = w.n_lo + a + rep.delta;
    c[a] = std::exp(-0.5 * x * x * rep.s * rep.s - I * x * z);
  }
  return c;
}

void check_edges(const Representation& rep, cplx z, const IndexWindow& w) {
  const double s2 = rep.s * rep.s;
  auto log_mag = [&](double x) { return -0.5 * x * x * s2 + x * z.imag(); };
  const double peak_x = std::clamp(z.imag() / s2, w.n_lo + rep.delta, w.n_hi + rep.delta);
  const double peak = std::max({log_mag(std::floor(peak_x - rep.delta) + rep.delta),
                                log_mag(std::ceil(peak_x - rep.delta) + rep.delta)});
  const double edge = std::max(log_mag(w.n_lo + rep.delta), log_mag(w.n_hi + rep.delta));
  if (edge - peak > std::log(edge_ratio))
    throw NumericalError(ErrorKind::window_too_small,
                         "exact_propagator_spectral: window edge coefficients exceed 1e-14 of the peak",
                         std::exp(edge - peak));
}

Eigen::VectorXcd angle_state(const Representation& rep, double phi, const IndexWindow& w, double sign) {
  const long dim = window_dim(w);
  Eigen::VectorXcd a(dim);
  for (long k = 0; k < dim; ++k) a[k] = std::exp(sign * I * (w.n_lo + k + rep.delta) * phi);
  return a;
}

}  // namespace

IndexWindow spectral_window(const Representation& rep, cplx z_I, cplx z_F) {
  const StateVector a = coherent_state(rep, z_I, 1e-16);
  const StateVector b = coherent_state(rep, z_F, 1e-16);
  return {std::min(a.n_min, b.n_min) - window_margin, std::max(a.n_max(), b.n_max()) + window_margin};
}

StateVector evolve_spectral(const HolomorphicHamiltonian& H, const Representation& rep, const StateVector& psi,
                            double tau, const IndexWindow& window) {
  H.validate();
  rep.validate();
  const long dim = window_dim(window);
  for (std::size_t j = 0; j < psi.size(); ++j) {
    const long n = psi.n_min + static_cast<long>(j);
    if ((n < window.n_lo || n > window.n_hi) && psi.coeffs[j] != 0.0)
      throw std::invalid_argument("evolve_spectral: state extends beyond the window");
  }
  Eigen::VectorXcd v(dim);
  for (long a = 0; a < dim; ++a) v[a] = psi.at(window.n_lo + a);
  const Eigen::VectorXcd out = evolve(diagonalize(H, rep, window), rep, v, tau);
  return {window.n_lo, std::vector<cplx>(out.data(), out.data() + dim)};
}

cplx exact_propagator_spectral(const HolomorphicHamiltonian& H, const Representation& rep, cplx z_I, cplx z_F,
                               double tau, std::optional<IndexWindow> window) {
  H.validate();
  rep.validate();
  const IndexWindow w = window.value_or(spectral_window(rep, z_I, z_F));
  check_edges(rep, z_I, w);
  check_edges(rep, z_F, w);
  const Eigen::VectorXcd out = evolve(diagonalize(H, rep, w), rep, coherent_on_window(rep, z_I, w), tau);
  return coherent_on_window(rep, z_F, w).dot(out);
}

cplx spectral_angle_propagator(const HolomorphicHamiltonian& H, const Representation& rep, double phi_I,
                               double phi_F, double tau, const IndexWindow& window) {
  H.validate();
  rep.validate();
  const Eigen::VectorXcd out = evolve(diagonalize(H, rep, window), rep, angle_state(rep, phi_I, window, -1.0), tau);
  return angle_state(rep, phi_F, window, 1.0).transpose() * out;
}

cplx angle_propagator(const HolomorphicHamiltonian& H, const Representation& rep, double phi_I, double phi_F,
                      double tau, const QuadratureSpec& quad, const IndexWindow& window, AngleKernel kernel,
                      const PropagatorOptions& opts) {
  H.validate();
  rep.validate();
  const long dim = window_dim(window);
  const Eigen::VectorXcd in = angle_state(rep, phi_I, window, -1.0);    // <n|phi_I>
  const Eigen::VectorXcd out = angle_state(rep, phi_F, window, 1.0);    // <phi_F|m>

  if (kernel == AngleKernel::spectral) {
    const std::vector<cplx> r = identity_resolution_matrix(rep, window.n_lo, window.n_hi, quad);
    const Eigen::Map<const Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> R(r.data(), dim,
                                                                                                   dim);
    const Eigen::VectorXcd evolved = evolve(diagonalize(H, rep, window), rep, R * in, tau);
    return out.transpose() * (R * evolved);
  }

  if (static_cast<long>(quad.p_nodes) * quad.phi_nodes > quadrature_budget)
    throw NumericalError(ErrorKind::quadrature_budget, "angle_propagator: node count exceeds the budget",
                         static_cast<double>(quad.p_nodes) * quad.phi_nodes);
  const auto gh = gauss_hermite(quad.p_nodes);
  const auto tr = periodic_trapezoid(quad.phi_nodes);
  struct Node {
    cplx z;
    cplx left;   // w <phi_F|z>
    cplx right;  // w <z|phi_I>
    double norm;
  };
  std::vector<Node> nodes;
  for (int i = 0; i < quad.p_nodes; ++i)
    for (int j = 0; j < quad.phi_nodes; ++j) {
      const cplx z(tr.nodes[j], rep.s * gh.nodes[i]);
      const double w = gh.weights[i] / std::sqrt(pi) * tr.weights[j];
      const Eigen::VectorXcd c = coherent_on_window(rep, z, window);
      nodes.push_back({z, w * out.cwiseProduct(c).sum(), w * c.dot(in), std::sqrt(norm_squared(rep, z))});
    }
  // |<z|U|z'>| <= |z| |z'| bounds each term; negligible pairs are skipped.
  double max_l = 0.0, max_r = 0.0;
  for (const auto& n : nodes) {
    max_l = std::max(max_l, std::abs(n.left) * n.norm);
    max_r = std::max(max_r, std::abs(n.right) * n.norm);
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < nodes.size(); ++a)
    for (std::size_t b = 0; b < nodes.size(); ++b)
      if (std::abs(nodes[a].left) * nodes[a].norm * std::abs(nodes[b].right) * nodes[b].norm >=
          opts.truncation * max_l * max_r)
        pairs.emplace_back(a, b);
  std::vector<cplx> terms(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    const Node& f = nodes[pairs[k].first];
    const Node& g = nodes[pairs[k].second];
    terms[k] = f.left * semiclassical_propagator(H, rep, g.z, f.z, tau, opts).value * g.right;
  });
  cplx total = 0.0;
  for (const cplx& t : terms) total += t;
  return total;
}

}  // namespace circlecs
