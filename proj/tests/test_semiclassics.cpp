#include <cmath>
#include <random>

#include "circlecs/errors.hpp"
#include "circlecs/semiclassics.hpp"
#include "doctest.h"

using namespace circlecs;

namespace {

constexpr double two_pi = 2.0 * pi;
constexpr cplx I(0.0, 1.0);

// <conj(w)|H|z> / <conj(w)|z> from explicit sums over the band matrix, with
// the condition number sum |terms| / |<conj(w)|z>| of the denominator.
cplx symbol_by_matrix(double k, cplx w, cplx z, const Representation& rep, double* cond = nullptr, int N = 80) {
  const double s2 = rep.s * rep.s;
  auto bra = [&](int n) {
    const double x = n + rep.delta;
    return std::exp(-0.5 * x * x * s2 + I * x * w);
  };
  auto ket = [&](int n) {
    const double x = n + rep.delta;
    return std::exp(-0.5 * x * x * s2 - I * x * z);
  };
  cplx num = 0.0, den = 0.0;
  double abs_den = 0.0;
  for (int n = -N; n <= N; ++n) {
    const double x = n + rep.delta;
    den += bra(n) * ket(n);
    abs_den += std::abs(bra(n) * ket(n));
    num += bra(n) * 0.5 * rep.hbar * rep.hbar * x * x * ket(n);
    num += -0.5 * k * (bra(n + 1) * ket(n) + bra(n) * ket(n + 1));
  }
  if (cond) *cond = abs_den / std::abs(den);
  return num / den;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

std::vector<ComplexTrajectory> solve_default(const HolomorphicHamiltonian& H, const Representation& rep, cplx zI,
                                             cplx zF, int n, double tau) {
  const cplx V = std::conj(zF) - two_pi * n;
  return solve_complex_bvp(H, rep, zI, zF, n, tau, default_seeds(rep, zI, V, tau, SeedStrategy::linearized));
}

}  // namespace

TEST_CASE("holomorphic symbol against the matrix oracle") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ud(0.0, 0.999), us(0.2, 1.0);
  int checked = 0;
  for (int t = 0; t < 40; ++t) {
    const Representation rep{ud(rng), us(rng), 0.5 + std::abs(u(rng))};
    const cplx w(3.0 * u(rng), u(rng)), z(3.0 * u(rng), u(rng));
    for (double k : {0.0, 0.1, 0.7}) {
      double cond = 0.0;
      const cplx expect = symbol_by_matrix(k, w, z, rep, &cond);
      // near the overlap's zeros the direct sums cancel and the oracle is void
      if (cond > 1e3) continue;
      ++checked;
      CHECK(rel(h_matrix_element(HolomorphicHamiltonian::pendulum(k), w, z, rep), expect) < 1e-11);
    }
  }
  CHECK(checked > 60);
}

TEST_CASE("free rotor symbol at the origin") {
  const double s = 0.6, s2 = s * s;
  double num = 0.0, den = 0.0;
  for (int n = -60; n <= 60; ++n) {
    num += n * n * std::exp(-n * n * s2);
    den += std::exp(-n * n * s2);
  }
  const Representation rep{0.0, s, 1.0};
  const auto p = h_partials(HolomorphicHamiltonian::free_rotor(), 0.0, 0.0, rep);
  CHECK(std::abs(p.h - 0.5 * num / den) < 1e-14);
  CHECK(std::abs(p.d1) < 1e-14);
  CHECK(std::abs(p.d2) < 1e-14);
}

TEST_CASE("pendulum at zero coupling is the free rotor; periodicity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Representation rep{0.35, 0.5, 1.0};
  const auto P = HolomorphicHamiltonian::pendulum(0.3);
  for (int t = 0; t < 10; ++t) {
    const cplx w(u(rng), 0.3 * u(rng)), z(u(rng), 0.3 * u(rng));
    CHECK(h_matrix_element(HolomorphicHamiltonian::pendulum(0.0), w, z, rep) ==
          h_matrix_element(HolomorphicHamiltonian::free_rotor(), w, z, rep));
    const cplx h = h_matrix_element(P, w, z, rep);
    CHECK(rel(h_matrix_element(P, w + two_pi, z, rep), h) < 1e-12);
    CHECK(rel(h_matrix_element(P, w, z + two_pi, rep), h) < 1e-12);
  }
}

TEST_CASE("symbol on the diagonal is the expectation value") {
  const Representation rep{0.2, 0.7, 1.3};
  const cplx z(0.4, 0.3);
  const double k = 0.25;
  const StateVector psi = coherent_state(rep, z, 1e-40);
  cplx num = 0.0;
  for (long n = psi.n_min; n <= psi.n_max(); ++n) {
    const double x = n + rep.delta;
    num += std::conj(psi.at(n)) * (0.5 * rep.hbar * rep.hbar * x * x * psi.at(n) -
                                   0.5 * k * (psi.at(n - 1) + psi.at(n + 1)));
  }
  const cplx expect = num / psi.norm_squared();
  CHECK(rel(h_matrix_element(HolomorphicHamiltonian::pendulum(k), std::conj(z), z, rep), expect) < 1e-13);
  CHECK(std::abs(h_matrix_element(HolomorphicHamiltonian::pendulum(k), std::conj(z), z, rep).imag()) < 1e-13);
}

TEST_CASE("partials against central differences") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-5;
  for (int t = 0; t < 20; ++t) {
    const Representation rep{0.5 * (1.0 + u(rng)), 0.3 + 0.2 * (1.0 + u(rng)), 1.0};
    const auto H = HolomorphicHamiltonian::pendulum(0.1 + 0.1 * u(rng));
    const cplx w(2.0 * u(rng), 0.3 * u(rng)), z(2.0 * u(rng), 0.3 * u(rng));
    auto f = [&](cplx a, cplx b) { return h_matrix_element(H, a, b, rep); };
    auto fp = [&](cplx a, cplx b) { return h_partials(H, a, b, rep); };
    const HPartials p = fp(w, z);
    const double scale = std::abs(p.h) + std::abs(p.d1) + std::abs(p.d2);
    CHECK(std::abs(p.d1 - (f(w + h, z) - f(w - h, z)) / (2 * h)) <= 1e-6 * scale);
    CHECK(std::abs(p.d2 - (f(w, z + h) - f(w, z - h)) / (2 * h)) <= 1e-6 * scale);
    CHECK(std::abs(p.d11 - (fp(w + h, z).d1 - fp(w - h, z).d1) / (2 * h)) <= 1e-6 * scale);
    CHECK(std::abs(p.d22 - (fp(w, z + h).d2 - fp(w, z - h).d2) / (2 * h)) <= 1e-6 * scale);
    // mixed partial from both orders
    const cplx d12_a = (fp(w, z + h).d1 - fp(w, z - h).d1) / (2 * h);
    const cplx d12_b = (fp(w + h, z).d2 - fp(w - h, z).d2) / (2 * h);
    CHECK(std::abs(p.d12 - d12_a) <= 1e-6 * scale);
    CHECK(std::abs(p.d12 - d12_b) <= 1e-6 * scale);
  }
}

TEST_CASE("symbol refuses points where the overlap vanishes") {
  const Representation rep{0.0, 0.05, 1.0};
  try {
    h_matrix_element(HolomorphicHamiltonian::free_rotor(), pi, 0.0, rep);
    FAIL("expected near_zero_denominator");
  } catch (const NumericalError& e) {
    CHECK(e.kind() == ErrorKind::near_zero_denominator);
  }
}

TEST_CASE("trivial and short-time trajectories") {
  const Representation rep{0.0, 0.3, 1.0};
  const auto F = HolomorphicHamiltonian::free_rotor();
  const auto t0 = solve_default(F, rep, 0.0, 0.0, 0, 0.7);
  REQUIRE(t0.size() == 1);
  for (std::size_t k = 0; k < t0[0].u.size(); ++k) {
    CHECK(std::abs(t0[0].u[k]) < 1e-14);
    CHECK(std::abs(t0[0].v[k]) < 1e-14);
  }

  const auto P = HolomorphicHamiltonian::pendulum(0.1);
  const cplx zI(0.2, 0.1), zF(0.5, -0.2);
  const double tau = 1e-4;
  for (int n : {0, 1, -1}) {
    const auto ts = solve_default(P, rep, zI, zF, n, tau);
    REQUIRE(!ts.empty());
    const cplx V = std::conj(zF) - two_pi * n;
    const auto& t = ts[0];
    CHECK(t.boundary_residual() <= 1e-10);
    CHECK(t.u.front() == zI);
    // displacement ~ tau (2 s^2/hbar) |dH|, itself of order |V - z_I| / s^2
    const double bound = 10.0 * tau * std::max(1.0, std::abs(V - zI));
    for (std::size_t k = 0; k < t.u.size(); ++k) {
      CHECK(std::abs(t.u[k] - zI) <= bound);
      CHECK(std::abs(t.v[k] - V) <= bound);
    }
  }
}

TEST_CASE("energy conservation and boundary residuals") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int t = 0; t < 6; ++t) {
    const Representation rep{0.25 * (t % 3), 0.2 + 0.05 * (t % 3), 1.0};
    const auto H = HolomorphicHamiltonian::pendulum(0.1);
    const cplx zI(u(rng), 0.2 * u(rng)), zF(u(rng), 0.2 * u(rng));
    for (const auto& tr : solve_default(H, rep, zI, zF, t % 2, 0.3)) {
      CHECK(tr.boundary_residual() <= 1e-10);
      CHECK(tr.X.front() == 0.0);
      for (const cplx& e : tr.energy) CHECK(std::abs(e - tr.energy.front()) <= 1e-9 * (1.0 + std::abs(e)));
    }
  }
}

TEST_CASE("Riccati stability on the trivial trajectory") {
  const Representation rep{0.0, 0.4, 1.0};
  const auto F = HolomorphicHamiltonian::free_rotor();
  const double tau = 0.8;
  const auto ts = solve_default(F, rep, 0.0, 0.0, 0, tau);
  REQUIRE(ts.size() == 1);
  const auto X = stability_X(ts[0], F, rep);
  CHECK(X.front() == 0.0);

  // X' = a + b X + c X^2 with constant coefficients. The free-rotor symbol
  // depends on w - z only, so d11 = d22 = -d12 and the quadratic has the
  // double root r = 1/(4 s^2): X' = c (X - r)^2, X(t) = r - 1/(1/r + c t).
  const HPartials p = h_partials(F, 0.0, 0.0, rep);
  const double s2 = rep.s * rep.s;
  const cplx a = -0.5 * I * p.d11, b = -4.0 * s2 * I * p.d12, c = -8.0 * s2 * s2 * I * p.d22;
  REQUIRE(std::abs(b * b - 4.0 * a * c) < 1e-12 * std::norm(b));
  const cplx r = -b / (2.0 * c);
  CHECK(std::abs(r - 1.0 / (4.0 * s2)) < 1e-12);
  for (std::size_t k = 0; k < X.size(); k += 50) {
    const cplx closed = r - 1.0 / (1.0 / r + c * ts[0].times[k]);
    CHECK(std::abs(X[k] - closed) <= 1e-10 * (1.0 + std::abs(closed)));
    CHECK(std::abs(ts[0].X[k] - closed) <= 1e-10 * (1.0 + std::abs(closed)));
  }
}

TEST_CASE("Riccati and linearized routes agree on pendulum trajectories") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const auto H = HolomorphicHamiltonian::pendulum(0.1);
  for (int t = 0; t < 10; ++t) {
    const Representation rep{0.1 * t, 0.2 + 0.02 * t, 1.0};
    const cplx zI(u(rng), 0.3 * u(rng)), zF(u(rng), 0.3 * u(rng));
    const auto tr = solve_default(H, rep, zI, zF, t % 3 - 1, 0.2 + 0.03 * t).front();
    const auto X = stability_X(tr, H, rep);
    for (std::size_t k = 0; k < X.size(); ++k) CHECK(std::abs(X[k] - tr.X[k]) <= 1e-8 * (1.0 + std::abs(X[k])));
  }
}

TEST_CASE("complex action") {
  const auto F = HolomorphicHamiltonian::free_rotor();
  const Representation rep{0.0, 0.3, 1.0};
  const double tau = 0.6;
  const auto t0 = solve_default(F, rep, 0.0, 0.0, 0, tau).front();
  CHECK(std::abs(complex_action(t0, F, rep) + h_matrix_element(F, 0.0, 0.0, rep) * tau) < 1e-13);
  CHECK(std::abs(t0.S - complex_action(t0, F, rep)) < 1e-14);
}

TEST_CASE("action derivative identities") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const auto H = HolomorphicHamiltonian::pendulum(0.1);
  const double h = 1e-5;
  for (int t = 0; t < 4; ++t) {
    const Representation rep{0.3 * (t % 2), 0.25, 1.0};
    const cplx zI(u(rng), 0.3 * u(rng));
    const cplx V = cplx(u(rng), 0.3 * u(rng)) - two_pi * (t % 2);
    const double tau = 0.3 + 0.1 * t;
    const cplx kin = -I * rep.hbar / (2.0 * rep.s * rep.s);
    auto action = [&](cplx a, cplx b, double T) {
      const cplx seed = default_seeds(rep, a, b, T, SeedStrategy::linearized).front();
      return solve_bvp_endpoints(H, rep, a, b, T, {seed}).front().S;
    };
    const auto tr = solve_bvp_endpoints(H, rep, zI, V, tau, default_seeds(rep, zI, V, tau, SeedStrategy::linearized))
                        .front();
    const cplx dS_du = (action(zI + h, V, tau) - action(zI - h, V, tau)) / (2 * h);
    const cplx dS_dv = (action(zI, V + h, tau) - action(zI, V - h, tau)) / (2 * h);
    const cplx dS_dt = (action(zI, V, tau + h) - action(zI, V, tau - h)) / (2 * h);
    CHECK(rel(dS_du, kin * tr.v.front()) < 1e-6);
    CHECK(rel(dS_dv, kin * tr.u.back()) < 1e-6);
    CHECK(rel(dS_dt, -tr.energy.back()) < 1e-6);
  }
}

TEST_CASE("short-time limit follows the first-order expansion") {
  // K = <z_F|z_I> (1 - i tau H(conj z_F, z_I)/hbar + O(tau^2))
  for (double k : {0.0, 0.1}) {
    const auto H = HolomorphicHamiltonian::pendulum(k);
    const Representation rep{0.3, 0.3, 1.0};
    const cplx zI(0.2, 0.1), zF(0.5, -0.2);
    const cplx ov = overlap(rep, zF, zI);
    const cplx h = h_matrix_element(H, std::conj(zF), zI, rep);
    double prev = 0.0;
    for (double tau : {1e-2, 1e-3, 1e-4}) {
      const cplx K = semiclassical_propagator(H, rep, zI, zF, tau).value;
      const cplx r = K / ov - 1.0;
      CHECK(std::abs(r + I * tau * h) <= 5.0 * tau * tau * std::norm(h) + 1e-12);
      if (prev > 0.0) CHECK(prev / std::abs(r) == doctest::Approx(10.0).epsilon(0.05));
      prev = std::abs(r);
    }
  }
}

TEST_CASE("free rotor semiclassics against the spectral oracle") {
  const auto F = HolomorphicHamiltonian::free_rotor();
  for (double delta : {0.0, 0.5}) {
    const Representation rep{delta, 0.2, 1.0};
    for (auto [zI, zF] : {std::pair<cplx, cplx>{0.0, 0.0}, {cplx(0.3, 0.2), cplx(-0.4, 0.1)}}) {
      const cplx K = semiclassical_propagator(F, rep, zI, zF, 0.5).value;
      const cplx E = exact_propagator_spectral(F, rep, zI, zF, 0.5);
      CHECK(std::abs(std::abs(K / E) - 1.0) <= 0.02);
      CHECK(std::abs(std::arg(K / E)) <= 0.02);
    }
  }
}

TEST_CASE("winding contributions under n -> -n") {
  const auto F = HolomorphicHamiltonian::free_rotor();
  for (double delta : {0.0, 0.5}) {
    const Representation rep{delta, 0.3, 1.0};
    const auto res = semiclassical_propagator(F, rep, 0.0, 0.0, 1.0);
    auto contrib = [&](int n) {
      for (const auto& b : res.branches)
        if (b.winding_n == n) return b.contribution;
      FAIL("missing winding");
      return cplx(0.0);
    };
    for (int n : {1, 2}) {
      const cplx a = contrib(n), b = contrib(-n);
      CHECK(std::abs(a) == doctest::Approx(std::abs(b)).epsilon(1e-10));
      // the phase factors exp(+-2 pi i n delta) are the only difference
      CHECK(std::abs(a * std::exp(-two_pi * I * (n * delta)) - b * std::exp(two_pi * I * (n * delta))) <=
            1e-10 * std::abs(a));
    }
  }
}

TEST_CASE("winding contributions track the real-line propagator") {
  const auto F = HolomorphicHamiltonian::free_rotor();
  const Representation rep{0.3, 0.4, 1.0};
  const double tau = 0.8;
  std::optional<cplx> constant;
  for (cplx zF : {cplx(0.0, 0.0), cplx(0.5, 0.2), cplx(-1.0, 0.1)}) {
    for (int n = -2; n <= 2; ++n) {
      const cplx V = std::conj(zF) - two_pi * n;
      const auto tr = solve_complex_bvp(F, rep, 0.1, zF, n, tau,
                                        default_seeds(rep, 0.1, V, tau, SeedStrategy::linearized))
                          .front();
      const cplx ratio = branch_contribution(tr, rep) * std::exp(-two_pi * I * (n * rep.delta)) /
                         free_particle_line_propagator(rep, 0.1, V, tau);
      if (!constant) constant = ratio;
      CHECK(rel(ratio, *constant) < 1e-2);
    }
  }
}

TEST_CASE("truncation report and branch bookkeeping") {
  const Representation rep{0.5, 0.2, 1.0};
  const auto res = semiclassical_propagator(HolomorphicHamiltonian::pendulum(0.1), rep, cplx(0.3, 0.2),
                                            cplx(0.6, -0.1), 0.5);
  cplx sum = 0.0;
  for (const auto& b : res.branches) sum += b.contribution;
  CHECK(sum == res.value);
  REQUIRE(res.truncation_report.first_dropped);
  CHECK(res.truncation_report.dropped_bound < 1e-12);
  CHECK(res.truncation_report.included.front() == 0);

  PropagatorOptions tight;
  tight.max_winding = 1;
  CHECK_THROWS_AS(semiclassical_propagator(HolomorphicHamiltonian::free_rotor(), rep, 0.0, 0.0, 1.0, tight),
                  NumericalError);
}

TEST_CASE("spectral oracle") {
  const Representation rep{0.3, 0.4, 1.0};
  const auto P = HolomorphicHamiltonian::pendulum(0.1);
  const cplx zI(0.2, 0.3), zF(-0.5, 0.1);
  CHECK(rel(exact_propagator_spectral(P, rep, zI, zF, 0.0), overlap(rep, zF, zI)) < 1e-13);

  const IndexWindow w = spectral_window(rep, zI, zF);
  const StateVector psi = coherent_state(rep, zI, 1e-16);
  const StateVector out = evolve_spectral(P, rep, psi, 2.0, w);
  CHECK(out.norm_squared() == doctest::Approx(psi.norm_squared()).epsilon(1e-12));

  // first order in the coupling
  auto K = [&](double k) { return exact_propagator_spectral(HolomorphicHamiltonian::pendulum(k), rep, zI, zF, 0.1); };
  const cplx k0 = K(0.0);
  CHECK(std::abs((K(0.1) - k0) / (K(0.05) - k0) - 2.0) < 0.01);

  CHECK_THROWS_AS(exact_propagator_spectral(P, rep, zI, zF, 0.1, IndexWindow{-3, 3}), NumericalError);
  try {
    exact_propagator_spectral(P, rep, zI, zF, 0.1, IndexWindow{-3, 3});
  } catch (const NumericalError& e) {
    CHECK(e.kind() == ErrorKind::window_too_small);
  }
}

TEST_CASE("angle propagator") {
  const Representation rep{0.0, 0.5, 1.0};
  const auto F = HolomorphicHamiltonian::free_rotor();
  const IndexWindow w{-8, 8};
  const QuadratureSpec quad{64, 128};

  const cplx same = angle_propagator(F, rep, 0.4, 0.4, 0.0, quad, w);
  CHECK(std::abs(same - 17.0) < 1e-10);
  CHECK(std::abs(angle_propagator(F, rep, 0.4, 1.3, 0.0, quad, w) -
                 spectral_angle_propagator(F, rep, 0.4, 1.3, 0.0, w)) < 1e-10);

  // direct sum for another representation
  const Representation shifted{0.3, 0.5, 1.0};
  cplx direct = 0.0;
  for (long n = w.n_lo; n <= w.n_hi; ++n) {
    const double x = n + 0.3;
    direct += std::exp(-I * 0.5 * x * x * 0.2) * std::exp(I * x * (1.1 - 0.2));
  }
  CHECK(std::abs(angle_propagator(F, shifted, 0.2, 1.1, 0.2, quad, w) - direct) < 1e-9);
  CHECK(std::abs(spectral_angle_propagator(F, shifted, 0.2, 1.1, 0.2, w) - direct) < 1e-12);

  // Both kernels on the same coarse node set. The window holds the coherent
  // states to 1e-20, and three phi nodes avoid antipodal pairs, where the
  // kernel is ~1e-10 and the semiclassical form is least accurate. At s = 0.6
  // the semiclassical kernel itself is good to ~2e-4 on these pairs.
  const QuadratureSpec coarse{2, 3};
  const Representation wide{0.0, 0.6, 1.0};
  const IndexWindow big{-16, 16};
  const double phi_I = 0.3, phi_F = 0.9, tau = 0.05;
  const cplx a = angle_propagator(F, wide, phi_I, phi_F, tau, coarse, big, AngleKernel::spectral);
  const cplx b = angle_propagator(F, wide, phi_I, phi_F, tau, coarse, big, AngleKernel::semiclassical);
  CHECK(std::abs(a - b) <= 1e-3 * std::abs(a));

  // the same double sum written out with the nodes (+-1/sqrt 2, weight
  // sqrt(pi)/2) and (-pi, -pi/3, pi/3, weight 1/3)
  std::vector<std::pair<cplx, double>> nodes;
  for (double t : {-std::sqrt(0.5), std::sqrt(0.5)})
    for (double phi : {-pi, -pi / 3.0, pi / 3.0}) nodes.emplace_back(cplx(phi, 0.6 * t), 0.5 / 3.0);
  auto angle_bra = [&](double phi, cplx z) {  // <phi|z> on the window
    cplx acc = 0.0;
    for (long n = big.n_lo; n <= big.n_hi; ++n) acc += std::exp(-0.18 * n * n - I * double(n) * (z - phi));
    return acc;
  };
  cplx manual = 0.0;
  for (const auto& [zf, wf] : nodes)
    for (const auto& [zi, wi] : nodes)
      manual += wf * wi * angle_bra(phi_F, zf) * semiclassical_propagator(F, wide, zi, zf, tau).value *
                std::conj(angle_bra(phi_I, zi));
  CHECK(std::abs(b - manual) <= 1e-12 * std::abs(manual));

  CHECK_THROWS_AS(angle_propagator(F, rep, 0.0, 0.0, 0.0, {1 << 12, 1 << 12}, w), NumericalError);
}
