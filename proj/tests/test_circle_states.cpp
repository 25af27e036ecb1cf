#include <cmath>
#include <random>

#include "circlecs/circle_states.hpp"
#include "circlecs/errors.hpp"
#include "circlecs/quadrature.hpp"
#include "doctest.h"

using namespace circlecs;

namespace {

// Brute-force <z_l|z_r> from explicit coefficients on a wide window.
cplx direct_overlap(const Representation& rep, cplx zl, cplx zr) {
  const auto a = coherent_state(rep, zl, 1e-40);
  const auto b = coherent_state(rep, zr, 1e-40);
  return a.inner(b);
}

}  // namespace

TEST_CASE("gauss hermite rule integrates polynomials exactly") {
  const auto r = gauss_hermite(20);
  double m0 = 0.0, m2 = 0.0, m10 = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    m0 += r.weights[i];
    m2 += r.weights[i] * r.nodes[i] * r.nodes[i];
    m10 += r.weights[i] * std::pow(r.nodes[i], 10);
  }
  CHECK(std::abs(m0 - std::sqrt(pi)) < 1e-14);
  CHECK(std::abs(m2 - 0.5 * std::sqrt(pi)) < 1e-14);
  CHECK(std::abs(m10 - 945.0 / 32.0 * std::sqrt(pi)) < 1e-11);
}

TEST_CASE("phase point reduction and conversions") {
  const PhasePoint a(3.5 * pi, 0.25);
  CHECK(std::abs(a.phi() + 0.5 * pi) < 1e-14);
  CHECK(PhasePoint(pi, 0.0).phi() == doctest::Approx(-pi));
  const auto b = PhasePoint::from_peak_momentum(0.1, 2.0, 0.5);
  CHECK(b.p() == doctest::Approx(0.5));
  CHECK(b.peak_momentum(0.5) == doctest::Approx(2.0));
  CHECK(PhasePoint::from_z(cplx(0.3, 0.4), 2.0).p() == doctest::Approx(0.8));
}

TEST_CASE("coherent state coefficients") {
  const Representation rep{0.0, 1.0, 1.0};
  const auto psi = coherent_state(rep, cplx(0.0, 0.0));
  CHECK(psi.n_min == -psi.n_max());
  for (long n = psi.n_min; n <= psi.n_max(); ++n) {
    CHECK(std::abs(psi.at(n) - std::exp(-0.5 * n * n)) < 1e-16);
    CHECK(psi.at(n).imag() == 0.0);
  }

  const Representation rep2{0.0, 0.5, 1.0};
  const auto chi = coherent_state(rep2, cplx(0.0, 0.5));
  long arg = chi.n_min;
  for (long n = chi.n_min; n <= chi.n_max(); ++n)
    if (std::abs(chi.at(n)) > std::abs(chi.at(arg))) arg = n;
  CHECK(arg == 2);
}

TEST_CASE("2 pi shift multiplies the state by a unit phase") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const Representation rep{0.5 * (u(rng) + 1.0) * 0.999, 0.3 + std::abs(u(rng)), 1.0};
    const cplx z(u(rng), u(rng));
    const auto a = coherent_state(rep, z);
    const auto b = coherent_state(rep, z + 2.0 * pi);
    REQUIRE(a.n_min == b.n_min);
    const cplx ph = std::exp(cplx(0.0, -2.0 * pi * rep.delta));
    // rounding of z + 2 pi alone perturbs the phase of entry n by ~eps (n + delta),
    // so entries are compared against the dominant coefficient
    double peak = 0.0;
    for (const auto& c : a.coeffs) peak = std::max(peak, std::abs(c));
    for (long n = a.n_min; n <= a.n_max(); ++n) CHECK(std::abs(b.at(n) - ph * a.at(n)) <= 1e-14 * peak);
    CHECK(norm_squared(rep, z) == doctest::Approx(norm_squared(rep, z + 2.0 * pi)).epsilon(1e-13));
  }
}

TEST_CASE("norm and overlap") {
  CHECK(norm_squared({0.0, 1.0, 1.0}, cplx(0.0)) == doctest::Approx(1.772637204826652).epsilon(1e-14));
  const double n03 = norm_squared({0.0, 0.3, 1.0}, cplx(0.0));
  CHECK(std::abs(n03 - std::sqrt(pi) / 0.3) / (std::sqrt(pi) / 0.3) < 3.0 * std::exp(-pi * pi / 0.09) + 1e-15);

  const Representation rep{0.0, 0.5, 1.0};
  const cplx ov = overlap(rep, cplx(0.0), cplx(pi, 0.0));
  const double normalized = std::abs(ov) / norm_squared(rep, cplx(0.0));
  // at phi = pi the dual terms m = 0 and m = 1 are equal, each exp(-pi^2)
  CHECK(normalized == doctest::Approx(2.0 * std::exp(-pi * pi)).epsilon(1e-12));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 30; ++i) {
    const Representation r{0.3, 0.4 + 0.3 * std::abs(u(rng)), 1.0};
    const cplx a(u(rng), u(rng)), b(u(rng), u(rng));
    const cplx ab = overlap(r, a, b);
    CHECK(std::abs(ab - std::conj(overlap(r, b, a))) <= 1e-13 * std::abs(ab));
    CHECK(std::abs(ab - direct_overlap(r, a, b)) <= 1e-13 * std::sqrt(norm_squared(r, a) * norm_squared(r, b)));
    CHECK(std::abs(overlap(r, a, a).real() - norm_squared(r, a)) <= 1e-13 * norm_squared(r, a));
    CHECK(std::abs(ab) <= std::sqrt(norm_squared(r, a) * norm_squared(r, b)) * (1.0 + 1e-13));
  }
}

TEST_CASE("expectation values") {
  const Representation rep{0.0, 0.5, 1.0};
  const cplx e = expect_exp_iphi(rep, coherent_state(rep, cplx(0.0)));
  CHECK(std::abs(e - std::exp(-0.0625)) < 10.0 * std::exp(-pi * pi / 0.25));
  CHECK(std::abs(expect_exp_iphi(rep, StateVector::basis(4))) == 0.0);

  const Representation half{0.5, 0.5, 1.0};
  CHECK(std::arg(expect_exp_iphi(half, coherent_state(half, cplx(pi / 3.0, 0.0)))) ==
        doctest::Approx(pi / 3.0).epsilon(1e-10));

  CHECK(expect_p({0.3, 1.0, 2.0}, StateVector::basis(-2)) == doctest::Approx(-1.7 * 2.0));
  const Representation narrow{0.0, 0.1, 1.0};
  CHECK(expect_p(narrow, coherent_state(narrow, cplx(0.0, 0.02))) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(expect_p(rep, coherent_state(rep, cplx(0.7, 0.0)))) < 1e-14);

  CHECK_THROWS_AS(expect_p(rep, StateVector{0, {0.0, 0.0}}), NumericalError);
}

TEST_CASE("classical phase value within the asymptotic bound") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> us(0.2, 1.0), uphi(-pi, pi), up(-1.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    const Representation rep{0.0, us(rng), 1.0};
    const cplx z(uphi(rng), up(rng));
    const cplx cl = std::exp(cplx(-0.25 * rep.s * rep.s, z.real()));
    const cplx q = expect_exp_iphi(rep, coherent_state(rep, z, 1e-30));
    CHECK(std::abs(q - cl) <= 10.0 * std::exp(-pi * pi / (rep.s * rep.s)) * std::abs(cl) + 1e-15);
  }
}

TEST_CASE("ladder operator") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ud(0.0, 0.999), us(0.2, 1.5), uz(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    const Representation rep{ud(rng), us(rng), 1.0};
    const cplx z(uz(rng), uz(rng));
    const auto psi = coherent_state(rep, z, 1e-30);
    const auto g = ladder_apply(rep, psi, false);
    const cplx ev = std::exp(cplx(0.0, 1.0) * z);
    double err = 0.0;
    for (long n = psi.n_min; n <= g.n_max(); ++n) err += std::norm(g.at(n) - ev * psi.at(n));
    CHECK(std::sqrt(err / psi.norm_squared()) <= 1e-11);
  }

  const Representation rep{0.3, 0.7, 1.0};
  const auto down = ladder_apply(rep, StateVector::basis(2), true);
  CHECK(down.n_min == 1);
  const double w1 = std::exp(0.5 * 0.49 * (1.3 * 1.3 - 2.3 * 2.3));
  CHECK(down.at(1).real() == doctest::Approx(w1));
  const auto round = ladder_apply(rep, ladder_apply(rep, StateVector::basis(2), false), true);
  CHECK(round.at(2).real() == doctest::Approx(std::exp(0.49 * (2.3 * 2.3 - 3.3 * 3.3))));
}

TEST_CASE("resolution of identity") {
  for (double delta : {0.0, 0.5}) {
    CHECK(identity_resolution_residual({delta, 0.5, 1.0}, -8, 8, {}) <= 1e-8);
    CHECK(identity_resolution_residual({delta, 1.0, 1.0}, -8, 8, {128, 128}) <= 1e-12);
  }
  // At s = 1 the corner entry integrates exp(-t^2 + 2 x t) with x = 8 + delta,
  // which 64 nodes resolve only to these relative errors (high-precision
  // reference values of the same rule).
  CHECK(identity_resolution_residual({0.0, 1.0, 1.0}, -8, 8, {}) == doctest::Approx(2.2912e-6).epsilon(1e-3));
  CHECK(identity_resolution_residual({0.5, 1.0, 1.0}, -8, 8, {}) == doctest::Approx(8.3899e-5).epsilon(1e-3));
  // refinement: three successive doublings of the p-rule
  const Representation rep{0.0, 1.0, 1.0};
  double prev = identity_resolution_residual(rep, -8, 8, {8, 128});
  for (int np : {16, 32, 64}) {
    const double r = identity_resolution_residual(rep, -8, 8, {np, 128});
    CHECK(r < prev);
    prev = r;
  }
  CHECK_THROWS_AS(identity_resolution_residual(rep, 0, 1, {4096, 4096}), NumericalError);
}

TEST_CASE("coherent states saturate the uncertainty relation") {
  auto check = [](const Representation& rep, cplx z) {
    const auto [prod, bound] = uncertainty_product(rep, z);
    CHECK(prod >= 0.0);
    CHECK(bound >= 0.0);
    CHECK(std::abs(prod - bound) <= 1e-10 * bound);
  };
  check({0.0, 0.5, 1.0}, cplx(0.0));
  check({0.5, 1.0, 1.0}, cplx(1.0, 2.0));
}

TEST_CASE("window budget is enforced") {
  CHECK_THROWS_AS(coherent_state({0.0, 0.01, 1.0}, cplx(0.0), 1e-16, 100), NumericalError);
}
