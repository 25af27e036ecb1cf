#pragma once

// Semiclassical coherent-state propagator on the cylinder.
//
// The holomorphic symbol H(w, z) = <conj(w)|H|z> / <conj(w)|z> drives the
// complexified Hamilton equations
//
//   u' = -2 s^2 (i/hbar) d1 H(v, u),   v' = 2 s^2 (i/hbar) d2 H(v, u),
//   u(0) = z_I,  v(tau) = conj(z_F) - 2 pi n,
//
// solved by shooting in v(0) for every winding number n. Each solution
// contributes
//
//   sqrt(pi/s^2) exp(2 pi i n delta) sqrt(dv(0)/dv(tau)) exp(s^2 (i/hbar) int d1d2 H)
//   exp((i/hbar) S - (z_I^2 + (conj(z_F) - 2 pi n)^2) / (4 s^2))
//
// with (du, dv) the linearized flow started at (0, 1) and S the complex action.

#include <optional>
#include <string>
#include <vector>

#include "circlecs/circle_states.hpp"

namespace circlecs {

/// H = p^2/2 - k_pend cos(phi); the free rotor is k_pend = 0.
struct HolomorphicHamiltonian {
  enum class Kind { free_rotor, pendulum };

  Kind kind = Kind::free_rotor;
  double k_pend = 0.0;

  static HolomorphicHamiltonian free_rotor() { return {}; }
  static HolomorphicHamiltonian pendulum(double k) { return {Kind::pendulum, k}; }

  /// Coupling actually in effect (0 for the free rotor).
  double coupling() const { return kind == Kind::pendulum ? k_pend : 0.0; }
  void validate() const;
};

/// H(w, z) and its partial derivatives; 1 refers to w, 2 to z.
struct HPartials {
  cplx h;
  cplx d1, d2;
  cplx d11, d22, d12;
};

/// Throws NumericalError(near_zero_denominator) when |<conj(w)|z>| is below
/// 1e-280 of its dominant lattice term.
cplx h_matrix_element(const HolomorphicHamiltonian& H, cplx w, cplx z, const Representation& rep);
HPartials h_partials(const HolomorphicHamiltonian& H, cplx w, cplx z, const Representation& rep);

struct ComplexTrajectory {
  int winding_n = 0;
  int branch_index = 0;
  cplx z_initial;  // u(0)
  cplx v_final;    // imposed v(tau)
  double tau = 0.0;
  int steps = 0;
  std::vector<double> times;
  std::vector<cplx> u, v;
  std::vector<cplx> du, dv;  // linearized flow, du(0) = 0, dv(0) = 1
  std::vector<cplx> X;       // du / (4 s^2 dv)
  std::vector<cplx> energy;  // H(v(t), u(t))
  cplx S;
  cplx prefactor_ratio;  // sqrt(dv(0)/dv(tau)), branch continued from t = 0
  cplx cross_term;       // s^2 (i/hbar) int d1d2 H dt
  int newton_iterations = 0;

  cplx v0() const { return v.front(); }
  double boundary_residual() const { return std::abs(v.back() - v_final); }
};

enum class SeedStrategy {
  linearized,  // free-rotor seed only
  ring,        // free-rotor seed, conj(z_I), and 8 points on a ring of radius s/2 around conj(z_I)
};

struct SolverOptions {
  int base_steps = 400;
  int max_halvings = 6;
  double newton_tol = 1e-12;
  double accept_tol = 1e-10;
  int newton_max_iter = 50;
  double step_change_tol = 1e-9;
  double energy_tol = 1e-9;
  double merge_distance = 1e-8;
};

/// Starting values for v(0).
std::vector<cplx> default_seeds(const Representation& rep, cplx z_I, cplx v_final, double tau,
                                SeedStrategy strategy);

/// All distinct trajectories with u(0) = z_I, v(tau) = conj(z_F) - 2 pi n
/// reached from the seeds, in enumeration order. Throws bvp_no_convergence
/// when no seed converges and step_resolution when halving the step keeps
/// moving v(tau) by more than step_change_tol.
std::vector<ComplexTrajectory> solve_complex_bvp(const HolomorphicHamiltonian& H, const Representation& rep,
                                                 cplx z_I, cplx z_F, int winding_n, double tau,
                                                 const std::vector<cplx>& seeds, const SolverOptions& opts = {});

/// Same with the final value v(tau) = v_final given directly.
std::vector<ComplexTrajectory> solve_bvp_endpoints(const HolomorphicHamiltonian& H, const Representation& rep,
                                                   cplx z_I, cplx v_final, double tau,
                                                   const std::vector<cplx>& seeds, const SolverOptions& opts = {});

/// X(t) on the trajectory grid from the Riccati equation
///   X' = -4 s^2 X (i/hbar) d1d2 H - 8 s^4 X^2 (i/hbar) d2^2 H - (i/2hbar) d1^2 H,  X(0) = 0.
/// Throws riccati_blowup (detail: time) when |X| exceeds 1e12.
std::vector<cplx> stability_X(const ComplexTrajectory& traj, const HolomorphicHamiltonian& H,
                              const Representation& rep);

/// S = int [i hbar (u'v - v'u)/(4 s^2) - H(v, u)] dt - i hbar (u(0) v(0) + u(tau) v(tau)) / (4 s^2),
/// the integral by composite Simpson on the trajectory grid.
cplx complex_action(const ComplexTrajectory& traj, const HolomorphicHamiltonian& H, const Representation& rep);

struct PropagatorOptions {
  int max_winding = 20;
  double truncation = 1e-12;
  SeedStrategy seeds = SeedStrategy::ring;
  bool skip_failed_branches = false;
  SolverOptions solver;
};

struct Branch {
  int winding_n;
  int nu;
  cplx contribution;
  ComplexTrajectory trajectory;
};

struct TruncationReport {
  std::vector<int> included;
  std::optional<int> first_dropped;
  double dropped_bound = 0.0;  // estimated |contribution| of first_dropped relative to the largest
  std::vector<std::pair<int, std::string>> failures;  // skipped windings
};

struct PropagatorResult {
  cplx value;
  std::vector<Branch> branches;
  TruncationReport truncation_report;
  int newton_iterations = 0;
};

/// One branch contribution from a solved trajectory.
cplx branch_contribution(const ComplexTrajectory& traj, const Representation& rep);

PropagatorResult semiclassical_propagator(const HolomorphicHamiltonian& H, const Representation& rep, cplx z_I,
                                          cplx z_F, double tau, const PropagatorOptions& opts = {});

/// Closed-form coherent-state propagator of the free particle on the real line
/// with the same Gaussian width, evaluated at the shifted endpoint v = conj(z_F) - 2 pi n.
cplx free_particle_line_propagator(const Representation& rep, cplx z_I, cplx v_final, double tau);

struct IndexWindow {
  long n_lo;
  long n_hi;
};

/// Window holding both coherent states to 1e-16 plus a margin for the coupling.
IndexWindow spectral_window(const Representation& rep, cplx z_I, cplx z_F);

/// exp(-i H tau / hbar) applied to psi on the window (H diagonalized there).
StateVector evolve_spectral(const HolomorphicHamiltonian& H, const Representation& rep, const StateVector& psi,
                            double tau, const IndexWindow& window);

/// <z_F| exp(-i H tau/hbar) |z_I>. Throws window_too_small unless the edge
/// coefficients of both states are below 1e-14 of their largest.
cplx exact_propagator_spectral(const HolomorphicHamiltonian& H, const Representation& rep, cplx z_I, cplx z_F,
                               double tau, std::optional<IndexWindow> window = std::nullopt);

/// sum_{m,n in window} exp(i x_m phi_F) <m|exp(-i H tau/hbar)|n> exp(-i x_n phi_I).
cplx spectral_angle_propagator(const HolomorphicHamiltonian& H, const Representation& rep, double phi_I,
                               double phi_F, double tau, const IndexWindow& window);

enum class AngleKernel { spectral, semiclassical };

/// <phi_F| exp(-i H tau/hbar) |phi_I> with both angle states expanded over the
/// coherent states by the identity-resolution quadrature; angle states are
/// restricted to the window. The semiclassical kernel costs one propagator per
/// pair of nodes with non-negligible weight.
cplx angle_propagator(const HolomorphicHamiltonian& H, const Representation& rep, double phi_I, double phi_F,
                      double tau, const QuadratureSpec& quad, const IndexWindow& window,
                      AngleKernel kernel = AngleKernel::spectral, const PropagatorOptions& opts = {});

}  // namespace circlecs
