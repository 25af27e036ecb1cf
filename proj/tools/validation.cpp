#include "validation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "circlecs/husimi.hpp"
#include "circlecs/semiclassics.hpp"

namespace circlecs::validation {

namespace {

constexpr double two_pi = 2.0 * pi;
constexpr cplx I(0.0, 1.0);

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

CheckResult make(int id, const char* name, double measured, double threshold) {
  CheckResult r;
  r.id = id;
  r.name = name;
  r.measured = measured;
  r.threshold = threshold;
  r.within_threshold = measured <= threshold;
  return r;
}

// Zeros of a finite-support psi from the companion matrix of its polynomial in
// w = exp(-iz), mapped back by z = -arg w + i ln|w|.
std::vector<cplx> companion_zeros(const Representation& rep, const StateVector& psi) {
  long n0 = psi.n_min, n1 = psi.n_max();
  while (psi.at(n0) == 0.0) ++n0;
  while (psi.at(n1) == 0.0) --n1;
  const int deg = static_cast<int>(n1 - n0);
  std::vector<cplx> out;
  if (deg == 0) return out;
  std::vector<cplx> b(deg + 1);
  for (int j = 0; j <= deg; ++j) {
    const double x = n0 + j + rep.delta;
    b[j] = std::conj(psi.at(n0 + j)) * std::exp(-0.5 * x * x * rep.s * rep.s);
  }
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) c(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) c(i, deg - 1) = -b[i] / b[deg];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(c);
  for (int i = 0; i < deg; ++i) {
    const cplx w = es.eigenvalues()(i);
    double re = -std::arg(w);
    re -= two_pi * std::floor(re / two_pi);
    out.emplace_back(re, std::log(std::abs(w)));
  }
  return out;
}

double periodic_distance(cplx a, cplx b) {
  return std::hypot(std::remainder(a.real() - b.real(), two_pi), a.imag() - b.imag());
}

// Largest distance from a reference zero to its nearest unmatched partner.
double match_error(std::vector<cplx> found, const std::vector<cplx>& reference) {
  if (found.size() != reference.size()) return INFINITY;
  double worst = 0.0;
  for (const cplx& r : reference) {
    auto it = std::min_element(found.begin(), found.end(), [&](cplx p, cplx q) {
      return periodic_distance(p, r) < periodic_distance(q, r);
    });
    worst = std::max(worst, periodic_distance(*it, r));
    found.erase(it);
  }
  return worst;
}

StateVector random_state(std::mt19937_64& rng, int support) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> start(-4, 4);
  StateVector psi{start(rng), {}};
  for (int j = 0; j < support; ++j) psi.coeffs.emplace_back(g(rng), g(rng));
  return psi;
}

CheckResult poisson_equivalence() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> ua(0.05, 5.0), ub(-10.0, 10.0);
  double worst = 0.0, worst_alpha = 0.0, worst_cond = 0.0, worst_scaled = 0.0;
  cplx worst_beta;
  int samples = 0, over = 0, well_conditioned_over = 0;
  for (double delta : {0.0, 0.3, 0.5}) {
    for (int i = 0; i < 400;) {
      const GaussSumParams p{ua(rng), cplx(ub(rng), ub(rng)), delta};
      if (std::abs(p.beta) > 10.0) continue;
      ++i;
      ++samples;
      const cplx d = gauss_lattice_sum(p, 0, SumRoute::direct);
      const cplx q = gauss_lattice_sum(p, 0, SumRoute::poisson);
      // sum of |terms|: the same lattice sum with a real linear coefficient
      const double abs_sum = gauss_lattice_sum({p.alpha, p.beta.real(), delta}, 0).real();
      const double e = rel(d, q);
      const double cond = abs_sum / std::abs(q);
      worst_scaled = std::max(worst_scaled, std::abs(d - q) / abs_sum);
      if (e > 1e-12) {
        ++over;
        if (cond < 1e3) ++well_conditioned_over;
      }
      if (e > worst) {
        worst = e;
        worst_alpha = p.alpha;
        worst_beta = p.beta;
        worst_cond = cond;
      }
    }
  }
  auto r = make(1, "Poisson-resummation equivalence", worst, 1e-12);
  r.diagnostics = {{"samples", samples},
                   {"samples_over_threshold", over},
                   {"over_threshold_with_condition_below_1e3", well_conditioned_over},
                   {"worst_alpha", worst_alpha},
                   {"worst_beta", complex_to_json(worst_beta)},
                   {"worst_condition_number", worst_cond},
                   {"max_error_relative_to_absolute_sum", worst_scaled}};
  return r;
}

CheckResult norm_asymptotics() {
  double worst_ratio = 0.0;
  json cases = json::array();
  for (double s : {0.2, 0.3, 0.5})
    for (double delta : {0.0, 0.5}) {
      const Representation rep{delta, s, 1.0};
      const double ref = std::sqrt(pi / (s * s));
      const double dev = std::abs(norm_squared(rep, cplx(0.0, 0.0)) - ref) / ref;
      const double q = std::exp(-pi * pi / (s * s));
      const double bound = 3.0 * q / (1.0 - q);
      worst_ratio = std::max(worst_ratio, dev / bound);
      cases.push_back({{"s", s}, {"delta", delta}, {"deviation", dev}, {"bound", bound}});
    }
  auto r = make(2, "norm asymptotics (deviation / bound)", worst_ratio, 1.0);
  r.diagnostics = {{"cases", cases}};
  return r;
}

CheckResult ladder_eigenrelation() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> ud(0.0, 0.999), us(0.2, 1.5), ux(-pi, pi), uy(-2.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Representation rep{ud(rng), us(rng), 1.0};
    const cplx z(ux(rng), uy(rng));
    const StateVector psi = coherent_state(rep, z, 1e-30);
    const StateVector g = ladder_apply(rep, psi, false);
    const cplx ev = std::exp(I * z);
    double err = 0.0;
    for (long n = std::min(psi.n_min, g.n_min); n <= std::max(psi.n_max(), g.n_max()); ++n)
      err += std::norm(g.at(n) - ev * psi.at(n));
    worst = std::max(worst, std::sqrt(err / psi.norm_squared()));
  }
  return make(3, "ladder eigenrelation", worst, 1e-11);
}

CheckResult identity_resolution() {
  double worst = 0.0;
  json cases = json::array();
  const QuadratureSpec quad;
  for (double delta : {0.0, 0.5})
    for (double s : {0.5, 1.0}) {
      const double res = identity_resolution_residual({delta, s, 1.0}, -8, 8, quad);
      worst = std::max(worst, res);
      cases.push_back({{"delta", delta}, {"s", s}, {"residual", res}});
    }
  auto r = make(4, "resolution of identity", worst, 1e-8);
  r.diagnostics = {{"p_nodes", quad.p_nodes}, {"phi_nodes", quad.phi_nodes}, {"cases", cases}};
  return r;
}

CheckResult uncertainty_saturation() {
  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> ud(0.0, 0.999), us(0.2, 1.5), ux(-pi, pi), uy(-2.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Representation rep{ud(rng), us(rng), 1.0};
    const auto [prod, bound] = uncertainty_product(rep, cplx(ux(rng), uy(rng)));
    worst = std::max(worst, std::abs(prod - bound) / bound);
  }
  return make(5, "minimal uncertainty saturation", worst, 1e-10);
}

CheckResult theta_zero_lattice() {
  const Representation rep{0.0, 1.0, 1.0};
  const double s2 = rep.s * rep.s;
  // theta_3(w, tau) vanishes at w = k + 1/2 + (m + 1/2) tau; with tau = i s^2/pi
  // and <0|z> as theta_3(-z / 2 pi, tau) this gives z = -pi - (2m + 1) i s^2.
  std::vector<cplx> expect;
  for (int m = -3; m <= 2; ++m) {
    cplx z(-pi, -(2 * m + 1) * s2);
    expect.emplace_back(z.real() + two_pi, z.imag());
  }
  const BargmannFunction f(rep, coherent_state(rep, cplx(0.0), 1e-40), true);
  const StripZeros zeros = find_strip_zeros(f, 6.0 * s2);
  auto r = make(6, "theta zero lattice", match_error(zeros.a_list, expect), 1e-9);
  json found = json::array();
  for (const cplx& a : zeros.a_list) found.push_back(complex_to_json(a));
  r.diagnostics = {{"found", found}};
  return r;
}

CheckResult zero_count_oracle() {
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> ud(0.0, 0.999), us(0.4, 1.2);
  std::uniform_int_distribution<int> usupp(1, 8);
  double worst = 0.0;
  int count_mismatch = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Representation rep{ud(rng), us(rng), 1.0};
    const StateVector psi = random_state(rng, usupp(rng));
    const BargmannFunction f(rep, psi);
    const Band zb = finite_support_zero_band(f);
    const double cutoff = std::max(-zb.lo, zb.hi) + 0.5;
    const auto oracle = companion_zeros(rep, psi);
    const StripZeros zeros = find_strip_zeros(f, cutoff);
    std::vector<cplx> all = zeros.a_list;
    all.insert(all.end(), zeros.m, cplx(0.0));
    if (strip_zero_count(f, -cutoff, cutoff) != static_cast<long>(oracle.size()) || all.size() != oracle.size())
      ++count_mismatch;
    worst = std::max(worst, match_error(all, oracle));
  }
  auto r = make(7, "zero-count oracle", worst, 1e-9);
  r.within_threshold = r.within_threshold && count_mismatch == 0;
  r.diagnostics = {{"states", 200}, {"count_mismatches", count_mismatch}};
  return r;
}

CheckResult hadamard_round_trip() {
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> ud(0.0, 0.999), us(0.5, 1.2), ux(0.0, two_pi), uy(-2.0, 2.0);
  std::uniform_int_distribution<int> usupp(1, 8);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Representation rep{ud(rng), us(rng), 1.0};
    const BargmannFunction f(rep, random_state(rng, usupp(rng)));
    const Band zb = finite_support_zero_band(f);
    const auto q = hadamard_reconstruct(reconstruction_data(f, std::max(-zb.lo, zb.hi) + 0.5), rep);
    for (int i = 0; i < 100; ++i) {
      const cplx z(ux(rng), uy(rng));
      worst = std::max(worst, rel(q.value(z), f.value(z)));
    }
  }
  return make(8, "Hadamard round trip", worst, 1e-6);
}

CheckResult appendix_identities() {
  // truncated sine product: error ratios between successive decades of terms
  json orders = json::array();
  double worst_order_dev = 0.0;
  for (auto [z, a] : {std::pair<cplx, cplx>{cplx(1.0, 1.0), cplx(2.0, 0.5)}, {cplx(-0.5, 0.3), cplx(4.0, -1.0)}}) {
    const cplx exact = std::sin(0.5 * (z - a));
    double prev = 0.0;
    for (long n : {100L, 1000L, 10000L}) {
      const double err = std::abs(sin_hadamard_truncated(z, a, n) - exact);
      if (prev > 0.0) {
        const double order = std::log10(prev / err);
        orders.push_back(order);
        worst_order_dev = std::max(worst_order_dev, std::abs(order - 1.0));
      }
      prev = err;
    }
  }
  std::mt19937_64 rng(909);
  std::uniform_real_distribution<double> ux(0.1, two_pi - 0.1), uy(0.5, 5.0);
  std::uniform_int_distribution<int> ulen(1, 30);
  std::bernoulli_distribution sign(0.5);
  double worst_product = 0.0;
  for (int t = 0; t < 100; ++t) {
    std::vector<cplx> as;
    cplx lhs = 1.0;
    for (int k = ulen(rng); k > 0; --k) {
      const cplx ak(ux(rng), sign(rng) ? uy(rng) : -uy(rng));
      as.push_back(ak);
      lhs *= -std::exp(pi * std::cos(0.5 * ak) / std::sin(0.5 * ak));
    }
    worst_product = std::max(worst_product, rel(lhs, std::exp(branch_corrected_log_product(as))));
  }
  // both parts normalized by their thresholds: |order - 1| <= 0.1, product <= 1e-12
  auto r = make(9, "appendix identities (worst part / its threshold)",
                std::max(worst_order_dev / 0.1, worst_product / 1e-12), 1.0);
  r.diagnostics = {{"observed_orders", orders}, {"max_product_error", worst_product}};
  return r;
}

CheckResult short_time_limit() {
  const Representation rep{0.0, 0.3, 1.0};
  const cplx zI(0.2, 0.1), zF(0.5, -0.2);
  const cplx ov = overlap(rep, zF, zI);
  double worst = 0.0, worst_order = INFINITY;
  json cases = json::array();
  for (double k : {0.0, 0.1}) {
    const auto H = HolomorphicHamiltonian::pendulum(k);
    const cplx h = h_matrix_element(H, std::conj(zF), zI, rep);
    std::vector<double> errs;
    json corrected = json::array();
    for (double tau : {1e-2, 1e-3, 1e-4}) {
      const cplx ratio = semiclassical_propagator(H, rep, zI, zF, tau).value / ov;
      errs.push_back(std::abs(ratio - 1.0));
      corrected.push_back(std::abs(ratio - (1.0 - I * tau * h / rep.hbar)));
    }
    worst = std::max(worst, errs[1]);
    const double o1 = std::log10(errs[0] / errs[1]), o2 = std::log10(errs[1] / errs[2]);
    worst_order = std::min({worst_order, o1, o2});
    cases.push_back({{"k_pend", k},
                     {"relative_errors", errs},
                     {"orders", {o1, o2}},
                     {"symbol_abs", std::abs(h)},
                     {"first_order_term_at_1e-3", 1e-3 * std::abs(h) / rep.hbar},
                     {"error_after_first_order_correction", corrected}});
  }
  auto r = make(10, "short-time consistency (error at tau = 1e-3)", worst, 1e-3);
  r.within_threshold = r.within_threshold && worst_order >= 1.0;
  r.diagnostics = {{"min_order", worst_order}, {"cases", cases}};
  return r;
}

CheckResult free_rotor_vs_exact() {
  const auto F = HolomorphicHamiltonian::free_rotor();
  const cplx starts[] = {0.0, cplx(0.3, 0.2), cplx(-0.5, -0.1)};
  const cplx ends[] = {0.0, cplx(-0.4, 0.1), cplx(1.0, 0.3)};
  double worst_mag = 0.0, worst_phase = 0.0;
  for (double delta : {0.0, 0.5}) {
    const Representation rep{delta, 0.2, 1.0};
    for (double tau : {0.25, 0.5, 1.0})
      for (cplx zI : starts)
        for (cplx zF : ends) {
          const cplx q = semiclassical_propagator(F, rep, zI, zF, tau).value /
                         exact_propagator_spectral(F, rep, zI, zF, tau);
          worst_mag = std::max(worst_mag, std::abs(std::abs(q) - 1.0));
          worst_phase = std::max(worst_phase, std::abs(std::arg(q)));
        }
  }
  // magnitude and phase share the threshold 0.02
  auto r = make(11, "free rotor vs exact (worst of magnitude, phase)", std::max(worst_mag, worst_phase), 0.02);
  r.diagnostics = {{"max_relative_magnitude_error", worst_mag}, {"max_phase_error", worst_phase}, {"pairs", 54}};
  return r;
}

CheckResult pendulum_vs_exact() {
  const auto P = HolomorphicHamiltonian::pendulum(0.1);
  struct Case {
    double delta, tau;
    cplx zI, zF;
  };
  const Case cases[] = {{0.0, 0.25, 0.0, 0.0},
                        {0.0, 0.5, cplx(0.3, 0.2), cplx(-0.4, 0.1)},
                        {0.0, 0.5, cplx(-0.5, -0.1), cplx(1.0, 0.3)},
                        {0.5, 0.25, cplx(0.3, 0.2), cplx(0.6, -0.1)},
                        {0.5, 0.5, 0.0, cplx(0.5, 0.0)},
                        {0.5, 0.5, cplx(1.0, 0.1), cplx(0.2, 0.2)}};
  double worst = 0.0;
  json errs = json::array();
  for (const Case& c : cases) {
    const Representation rep{c.delta, 0.2, 1.0};
    const double e = rel(semiclassical_propagator(P, rep, c.zI, c.zF, c.tau).value,
                         exact_propagator_spectral(P, rep, c.zI, c.zF, c.tau));
    errs.push_back(e);
    worst = std::max(worst, e);
  }
  auto r = make(12, "pendulum vs exact", worst, 0.05);
  r.diagnostics = {{"relative_errors", errs}};
  return r;
}

CheckResult winding_decomposition() {
  const auto F = HolomorphicHamiltonian::free_rotor();
  const Representation rep{0.3, 0.4, 1.0};
  const double tau = 0.8;
  const cplx zI(0.1, 0.0);
  std::vector<cplx> ratios;
  for (cplx zF : {cplx(0.0, 0.0), cplx(0.5, 0.2), cplx(-1.0, 0.1), cplx(2.0, -0.3), cplx(-2.5, 0.4)})
    for (int n = -2; n <= 2; ++n) {
      const cplx V = std::conj(zF) - two_pi * n;
      const auto tr =
          solve_complex_bvp(F, rep, zI, zF, n, tau, default_seeds(rep, zI, V, tau, SeedStrategy::linearized))
              .front();
      ratios.push_back(branch_contribution(tr, rep) * std::exp(-two_pi * I * (n * rep.delta)) /
                       free_particle_line_propagator(rep, zI, V, tau));
    }
  double worst = 0.0;
  for (const cplx& q : ratios) worst = std::max(worst, rel(q, ratios.front()));
  auto r = make(13, "winding decomposition", worst, 1e-2);
  r.diagnostics = {{"ratio", complex_to_json(ratios.front())}, {"samples", ratios.size()}};
  return r;
}

CheckResult action_derivatives() {
  std::mt19937_64 rng(1414);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const auto H = HolomorphicHamiltonian::pendulum(0.1);
  const double h = 1e-5;
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Representation rep{0.3 * (t % 2), 0.25, 1.0};
    const cplx zI(u(rng), 0.3 * u(rng));
    const cplx V = cplx(u(rng), 0.3 * u(rng)) - two_pi * (t % 3 - 1);
    const double tau = 0.2 + 0.05 * t;
    const cplx kin = -I * rep.hbar / (2.0 * rep.s * rep.s);
    auto action = [&](cplx a, cplx b, double T) {
      const cplx seed = default_seeds(rep, a, b, T, SeedStrategy::linearized).front();
      return solve_bvp_endpoints(H, rep, a, b, T, {seed}).front().S;
    };
    const auto tr =
        solve_bvp_endpoints(H, rep, zI, V, tau, default_seeds(rep, zI, V, tau, SeedStrategy::linearized)).front();
    const cplx dS_du = (action(zI + h, V, tau) - action(zI - h, V, tau)) / (2 * h);
    const cplx dS_dv = (action(zI, V + h, tau) - action(zI, V - h, tau)) / (2 * h);
    const cplx dS_dt = (action(zI, V, tau + h) - action(zI, V, tau - h)) / (2 * h);
    worst = std::max({worst, rel(dS_du, kin * tr.v.front()), rel(dS_dv, kin * tr.u.back()),
                      rel(dS_dt, -tr.energy.back())});
  }
  return make(14, "action-derivative identities", worst, 1e-6);
}

}  // namespace

const std::vector<Check>& catalog() {
  static const std::vector<Check> checks = {
      {1, "Poisson-resummation equivalence", 5, poisson_equivalence},
      {2, "norm asymptotics", 1, norm_asymptotics},
      {3, "ladder eigenrelation", 5, ladder_eigenrelation},
      {4, "resolution of identity", 10, identity_resolution},
      {5, "minimal uncertainty saturation", 5, uncertainty_saturation},
      {6, "theta zero lattice", 30, theta_zero_lattice},
      {7, "zero-count oracle", 60, zero_count_oracle},
      {8, "Hadamard round trip", 60, hadamard_round_trip},
      {9, "appendix identities", 10, appendix_identities},
      {10, "short-time consistency", 60, short_time_limit},
      {11, "free rotor vs exact", 300, free_rotor_vs_exact},
      {12, "pendulum vs exact", 300, pendulum_vs_exact},
      {13, "winding decomposition", 120, winding_decomposition},
      {14, "action-derivative identities", 120, action_derivatives},
  };
  return checks;
}

CheckResult run(const Check& check) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    r = check.run();
  } catch (const NumericalError& e) {
    r = make(check.id, check.name.c_str(), INFINITY, 0.0);
    r.within_threshold = false;
    r.diagnostics = to_json(e);
  } catch (const std::exception& e) {
    r = make(check.id, check.name.c_str(), INFINITY, 0.0);
    r.within_threshold = false;
    r.diagnostics = {{"error", {{"message", e.what()}}}};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.time_limit = check.time_limit;
  return r;
}

json to_json(const CheckResult& r) {
  return {{"id", r.id},
          {"name", r.name},
          {"passed", r.passed()},
          {"measured", r.measured},
          {"threshold", r.threshold},
          {"seconds", r.seconds},
          {"time_limit", r.time_limit},
          {"diagnostics", r.diagnostics}};
}

std::string summary_line(const CheckResult& r) {
  const bool below = r.measured <= r.threshold;
  char buf[320];
  std::snprintf(buf, sizeof buf, "[%s] %2d %s: measured %.3g %s %.3g%s (%.2f s %s %.0f s)",
                r.passed() ? "PASS" : "FAIL", r.id, r.name.c_str(), r.measured, below ? "<=" : ">", r.threshold,
                below && !r.within_threshold ? ", secondary condition failed" : "", r.seconds,
                r.seconds < r.time_limit ? "<" : ">=", r.time_limit);
  return buf;
}

}  // namespace circlecs::validation
