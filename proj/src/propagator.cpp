#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

#include "circlecs/errors.hpp"
#include "circlecs/parallel.hpp"
#include "circlecs/semiclassics.hpp"

namespace circlecs {

namespace {

constexpr cplx I(0.0, 1.0);
constexpr double two_pi = 2.0 * pi;
constexpr double blowup_limit = 1e12;

// Exponent of the free Gaussian endpoint factor with the time-broadened width.
double winding_estimate(const Representation& rep, cplx z_I, cplx v_final, double tau) {
  const cplx width = rep.s * rep.s + 0.5 * I * rep.hbar * tau;
  const cplx d = v_final - z_I;
  return -(d * d / (4.0 * width)).real();
}

struct WindingOutcome {
  std::vector<Branch> branches;
  std::exception_ptr error;
  std::string reason;
  int newton_iterations = 0;
};

}  // namespace

cplx branch_contribution(const ComplexTrajectory& traj, const Representation& rep) {
  const double s2 = rep.s * rep.s;
  const cplx V = traj.v_final;
  const cplx z = traj.z_initial;
  const cplx log_k = 0.5 * std::log(pi / s2) + I * (two_pi * traj.winding_n * rep.delta) +
                     std::log(traj.prefactor_ratio) + traj.cross_term + I * traj.S / rep.hbar -
                     (z * z + V * V) / (4.0 * s2);
  return std::exp(log_k);
}

cplx free_particle_line_propagator(const Representation& rep, cplx z_I, cplx v_final, double tau) {
  rep.validate();
  const cplx width = rep.s * rep.s + 0.5 * I * rep.hbar * tau;
  const cplx d = v_final - z_I;
  return std::sqrt(pi / width) * std::exp(-d * d / (4.0 * width));
}

PropagatorResult semiclassical_propagator(const HolomorphicHamiltonian& H, const Representation& rep, cplx z_I,
                                          cplx z_F, double tau, const PropagatorOptions& opts) {
  H.validate();
  rep.validate();
  if (!(tau > 0.0)) throw std::invalid_argument("semiclassical_propagator: tau must be positive");
  if (opts.max_winding < 0) throw std::invalid_argument("semiclassical_propagator: negative winding budget");

  // Windings in order of increasing endpoint distance, kept while the
  // Gaussian estimate stays within the truncation ratio of the largest one.
  std::vector<int> order;
  for (int n = -opts.max_winding; n <= opts.max_winding; ++n) order.push_back(n);
  auto distance = [&](int n) { return std::abs(std::conj(z_F) - two_pi * n - z_I); };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return distance(a) < distance(b); });
  std::vector<double> est(order.size());
  double best = -INFINITY;
  for (std::size_t i = 0; i < order.size(); ++i) {
    est[i] = winding_estimate(rep, z_I, std::conj(z_F) - two_pi * order[i], tau);
    best = std::max(best, est[i]);
  }
  const double cut = best + std::log(opts.truncation);
  PropagatorResult result;
  TruncationReport& report = result.truncation_report;
  double dropped = -INFINITY;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (est[i] >= cut) {
      if (std::abs(order[i]) == opts.max_winding && opts.max_winding > 0)
        throw NumericalError(ErrorKind::non_convergence,
                             "semiclassical_propagator: winding budget exhausted before truncation", order[i]);
      report.included.push_back(order[i]);
    } else if (est[i] > dropped) {
      dropped = est[i];
      report.first_dropped = order[i];
    }
  }
  if (report.first_dropped) report.dropped_bound = std::exp(dropped - best);

  std::vector<WindingOutcome> outcomes(report.included.size());
  parallel_for(report.included.size(), [&](std::size_t i) {
    const int n = report.included[i];
    WindingOutcome& o = outcomes[i];
    try {
      const cplx V = std::conj(z_F) - two_pi * n;
      auto trajs = solve_complex_bvp(H, rep, z_I, z_F, n, tau, default_seeds(rep, z_I, V, tau, opts.seeds),
                                     opts.solver);
      for (auto& t : trajs) {
        o.newton_iterations += t.newton_iterations;
        for (std::size_t k = 0; k < t.X.size(); ++k)
          if (!(std::abs(t.X[k]) <= blowup_limit))
            throw NumericalError(ErrorKind::riccati_blowup, "semiclassical_propagator: caustic on winding " +
                                                                std::to_string(n),
                                 t.times[k]);
        const cplx c = branch_contribution(t, rep);
        const int nu = t.branch_index;
        o.branches.push_back({n, nu, c, std::move(t)});
      }
    } catch (const NumericalError& e) {
      o.error = std::current_exception();
      o.reason = e.what();
      o.branches.clear();
    }
  });

  result.value = 0.0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    WindingOutcome& o = outcomes[i];
    if (o.error) {
      if (!opts.skip_failed_branches) std::rethrow_exception(o.error);
      report.failures.emplace_back(report.included[i], o.reason);
      continue;
    }
    result.newton_iterations += o.newton_iterations;
    for (auto& b : o.branches) {
      result.value += b.contribution;
      result.branches.push_back(std::move(b));
    }
  }
  return result;
}

}  // namespace circlecs
