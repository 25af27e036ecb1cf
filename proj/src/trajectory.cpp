#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "circlecs/errors.hpp"
#include "circlecs/semiclassics.hpp"

namespace circlecs {

namespace {

constexpr cplx I(0.0, 1.0);
constexpr double two_pi = 2.0 * pi;
constexpr double blowup_limit = 1e12;

using State = std::array<cplx, 4>;  // u, v, du, dv

State axpy(const State& y, double h, const State& k) {
  return {y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]};
}

bool finite(cplx c) { return std::isfinite(c.real()) && std::isfinite(c.imag()); }

struct Flow {
  const HolomorphicHamiltonian& H;
  const Representation& rep;
  cplx c;  // 2 s^2 i / hbar

  Flow(const HolomorphicHamiltonian& h, const Representation& r)
      : H(h), rep(r), c(2.0 * r.s * r.s * I / r.hbar) {}

  State rhs(const State& y, HPartials* out = nullptr) const {
    const HPartials p = h_partials(H, y[1], y[0], rep);
    if (out) *out = p;
    return {-c * p.d1, c * p.d2, -c * (p.d11 * y[3] + p.d12 * y[2]), c * (p.d12 * y[3] + p.d22 * y[2])};
  }
};

struct Grid {
  std::vector<State> y;
  std::vector<HPartials> partials;
};

// Fixed-step RK4 from (z_I, v0, 0, 1). With a grid, states and partials are
// kept at every node.
State integrate(const Flow& flow, cplx z_I, cplx v0, double tau, int steps, Grid* grid) {
  State y{z_I, v0, 0.0, 1.0};
  const double h = tau / steps;
  if (grid) {
    grid->y.assign(1, y);
    grid->partials.clear();
  }
  for (int k = 0; k < steps; ++k) {
    HPartials p;
    const State k1 = flow.rhs(y, grid ? &p : nullptr);
    if (grid) grid->partials.push_back(p);
    const State k2 = flow.rhs(axpy(y, 0.5 * h, k1));
    const State k3 = flow.rhs(axpy(y, 0.5 * h, k2));
    const State k4 = flow.rhs(axpy(y, h, k3));
    for (int i = 0; i < 4; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    for (const cplx& c : y)
      if (!finite(c)) throw NumericalError(ErrorKind::bvp_no_convergence, "trajectory left the representable range");
    if (grid) grid->y.push_back(y);
  }
  if (grid) grid->partials.push_back(h_partials(flow.H, y[1], y[0], flow.rep));
  return y;
}

template <class F>
cplx simpson(int steps, double tau, F f) {
  const double h = tau / steps;
  cplx acc = f(0) + f(steps);
  for (int k = 1; k < steps; ++k) acc += (k % 2 ? 4.0 : 2.0) * f(k);
  return acc * (h / 3.0);
}

// Action from the recorded partials; u' = -c d1, v' = c d2.
cplx action_on_grid(const ComplexTrajectory& t, const std::vector<HPartials>& p, const Representation& rep) {
  const double s2 = rep.s * rep.s;
  const cplx c = 2.0 * s2 * I / rep.hbar;
  const cplx kin = I * rep.hbar / (4.0 * s2);
  const cplx integral = simpson(t.steps, t.tau, [&](int k) {
    const cplx ud = -c * p[k].d1, vd = c * p[k].d2;
    return kin * (ud * t.v[k] - vd * t.u[k]) - p[k].h;
  });
  return integral - kin * (t.u.front() * t.v.front() + t.u.back() * t.v_final);
}

struct SeedOutcome {
  bool ok = false;
  ComplexTrajectory traj;
  ErrorKind failure = ErrorKind::bvp_no_convergence;
  std::string reason;
};

// Newton in v0 at a fixed step count. Returns false when it does not converge.
bool newton(const Flow& flow, cplx z_I, cplx v_final, double tau, int steps, const SolverOptions& opts, cplx& v0,
            int& iterations) {
  const double scale = std::max(1.0, std::abs(v_final));
  for (int it = 0; it < opts.newton_max_iter; ++it) {
    const State y = integrate(flow, z_I, v0, tau, steps, nullptr);
    const cplx r = y[1] - v_final;
    ++iterations;
    if (std::abs(r) <= opts.newton_tol * scale) return true;
    if (!finite(y[3]) || y[3] == 0.0) return false;
    v0 -= r / y[3];
    if (!finite(v0) || std::abs(v0 - v_final) > 1e3) return false;
  }
  const State y = integrate(flow, z_I, v0, tau, steps, nullptr);
  return std::abs(y[1] - v_final) <= opts.accept_tol;
}

SeedOutcome solve_from_seed(const Flow& flow, cplx z_I, cplx v_final, double tau, cplx seed,
                            const SolverOptions& opts) {
  SeedOutcome out;
  cplx v0 = seed;
  int iterations = 0;
  int steps = opts.base_steps;
  try {
    for (int halving = 0;; ++halving) {
      if (!newton(flow, z_I, v_final, tau, steps, opts, v0, iterations)) {
        out.reason = "Newton iteration did not converge";
        return out;
      }
      Grid grid;
      const State coarse = integrate(flow, z_I, v0, tau, steps, &grid);
      const State fine = integrate(flow, z_I, v0, tau, 2 * steps, nullptr);
      double drift = 0.0;
      const cplx e0 = grid.partials.front().h;
      for (const auto& p : grid.partials) drift = std::max(drift, std::abs(p.h - e0));
      const bool resolved = std::abs(fine[1] - coarse[1]) <= opts.step_change_tol &&
                            drift <= opts.energy_tol * (1.0 + std::abs(e0));
      if (!resolved) {
        if (halving >= opts.max_halvings) {
          out.failure = ErrorKind::step_resolution;
          out.reason = "halving the step still changes v(tau) by " + std::to_string(std::abs(fine[1] - coarse[1]));
          return out;
        }
        steps *= 2;
        continue;
      }
      if (std::abs(coarse[1] - v_final) > opts.accept_tol) {
        out.reason = "boundary residual above tolerance";
        return out;
      }

      ComplexTrajectory& t = out.traj;
      t.z_initial = z_I;
      t.v_final = v_final;
      t.tau = tau;
      t.steps = steps;
      t.newton_iterations = iterations;
      const double s2 = flow.rep.s * flow.rep.s;
      double phase = 0.0;
      for (int k = 0; k <= steps; ++k) {
        const State& y = grid.y[k];
        t.times.push_back(tau * k / steps);
        t.u.push_back(y[0]);
        t.v.push_back(y[1]);
        t.du.push_back(y[2]);
        t.dv.push_back(y[3]);
        t.X.push_back(y[2] / (4.0 * s2 * y[3]));
        t.energy.push_back(grid.partials[k].h);
        if (k > 0) {
          const double step = std::arg(y[3] / grid.y[k - 1][3]);
          if (std::abs(step) > 0.5 * pi) {
            out.failure = ErrorKind::step_resolution;
            out.reason = "phase of dv jumps within one step";
            return out;
          }
          phase += step;
        }
      }
      // sqrt(dv(0)/dv(tau)) with the phase of dv followed from dv(0) = 1
      t.prefactor_ratio = std::polar(1.0 / std::sqrt(std::abs(t.dv.back())), -0.5 * phase);
      t.cross_term = s2 * I / flow.rep.hbar * simpson(steps, tau, [&](int k) { return grid.partials[k].d12; });
      t.S = action_on_grid(t, grid.partials, flow.rep);
      out.ok = true;
      return out;
    }
  } catch (const NumericalError& e) {
    out.failure = ErrorKind::bvp_no_convergence;
    out.reason = e.what();
    return out;
  }
}

}  // namespace

std::vector<cplx> default_seeds(const Representation& rep, cplx z_I, cplx v_final, double tau,
                                SeedStrategy strategy) {
  // Free-rotor flow near the symbol's quadratic part: v - u is constant and
  // v(tau) - z_I = (v0 - z_I)(1 + i hbar tau / 2 s^2).
  const cplx linear = z_I + (v_final - z_I) / (1.0 + I * rep.hbar * tau / (2.0 * rep.s * rep.s));
  std::vector<cplx> seeds{linear};
  if (strategy == SeedStrategy::ring) {
    const cplx conj_guess = std::conj(z_I);
    seeds.push_back(conj_guess);
    for (int j = 0; j < 8; ++j) seeds.push_back(conj_guess + std::polar(0.5 * rep.s, two_pi * j / 8.0));
  }
  return seeds;
}

std::vector<ComplexTrajectory> solve_bvp_endpoints(const HolomorphicHamiltonian& H, const Representation& rep,
                                                   cplx z_I, cplx v_final, double tau,
                                                   const std::vector<cplx>& seeds, const SolverOptions& opts) {
  H.validate();
  rep.validate();
  if (!(tau > 0.0)) throw std::invalid_argument("solve_complex_bvp: tau must be positive");
  if (seeds.empty()) throw std::invalid_argument("solve_complex_bvp: no seeds");
  if (opts.base_steps < 2 || opts.base_steps % 2) throw std::invalid_argument("solve_complex_bvp: base_steps must be even");

  const Flow flow(H, rep);
  std::vector<ComplexTrajectory> found;
  bool step_failure = false;
  std::string last_reason;
  for (cplx seed : seeds) {
    SeedOutcome o = solve_from_seed(flow, z_I, v_final, tau, seed, opts);
    if (!o.ok) {
      step_failure |= o.failure == ErrorKind::step_resolution;
      last_reason = o.reason;
      continue;
    }
    bool duplicate = false;
    for (const auto& t : found) duplicate |= std::abs(t.v0() - o.traj.v0()) < opts.merge_distance;
    if (duplicate) continue;
    o.traj.branch_index = static_cast<int>(found.size());
    found.push_back(std::move(o.traj));
  }
  if (found.empty()) {
    if (step_failure)
      throw NumericalError(ErrorKind::step_resolution, "solve_complex_bvp: " + last_reason);
    throw NumericalError(ErrorKind::bvp_no_convergence, "solve_complex_bvp: no seed converged (" + last_reason + ")");
  }
  return found;
}

std::vector<ComplexTrajectory> solve_complex_bvp(const HolomorphicHamiltonian& H, const Representation& rep,
                                                 cplx z_I, cplx z_F, int winding_n, double tau,
                                                 const std::vector<cplx>& seeds, const SolverOptions& opts) {
  auto out = solve_bvp_endpoints(H, rep, z_I, std::conj(z_F) - two_pi * winding_n, tau, seeds, opts);
  for (auto& t : out) t.winding_n = winding_n;
  return out;
}

std::vector<cplx> stability_X(const ComplexTrajectory& traj, const HolomorphicHamiltonian& H,
                              const Representation& rep) {
  if (traj.steps < 1 || traj.v.empty()) throw std::invalid_argument("stability_X: trajectory not solved");
  const double s2 = rep.s * rep.s;
  const cplx ih = I / rep.hbar;
  using RState = std::array<cplx, 3>;  // u, v, X
  auto rhs = [&](const RState& y) -> RState {
    const HPartials p = h_partials(H, y[1], y[0], rep);
    const cplx c = 2.0 * s2 * ih;
    return {-c * p.d1, c * p.d2,
            -4.0 * s2 * y[2] * ih * p.d12 - 8.0 * s2 * s2 * y[2] * y[2] * ih * p.d22 - 0.5 * ih * p.d11};
  };
  auto step_by = [](const RState& y, double h, const RState& k) {
    return RState{y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]};
  };
  RState y{traj.z_initial, traj.v0(), 0.0};
  const double h = traj.tau / traj.steps;
  std::vector<cplx> X{0.0};
  for (int k = 0; k < traj.steps; ++k) {
    const RState k1 = rhs(y);
    const RState k2 = rhs(step_by(y, 0.5 * h, k1));
    const RState k3 = rhs(step_by(y, 0.5 * h, k2));
    const RState k4 = rhs(step_by(y, h, k3));
    for (int i = 0; i < 3; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!(std::abs(y[2]) <= blowup_limit))
      throw NumericalError(ErrorKind::riccati_blowup, "stability_X: |X| exceeds 1e12 (caustic)", h * (k + 1));
    X.push_back(y[2]);
  }
  return X;
}

cplx complex_action(const ComplexTrajectory& traj, const HolomorphicHamiltonian& H, const Representation& rep) {
  if (traj.steps < 2 || traj.steps % 2 || traj.u.size() != static_cast<std::size_t>(traj.steps) + 1)
    throw std::invalid_argument("complex_action: trajectory not solved on an even grid");
  std::vector<HPartials> p;
  p.reserve(traj.u.size());
  for (std::size_t k = 0; k < traj.u.size(); ++k) p.push_back(h_partials(H, traj.v[k], traj.u[k], rep));
  return action_on_grid(traj, p, rep);
}

}  // namespace circlecs
