#include "circlecs/husimi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "circlecs/errors.hpp"
#include "circlecs/parallel.hpp"

namespace circlecs {

namespace {

constexpr double max_exponent = 690.0;
// relative size below which a truncated window edge counts as negligible
constexpr double edge_ratio_log = -34.5;  // ln 1e-15
constexpr double inf = std::numeric_limits<double>::infinity();

}  // namespace

double ScaledEval::log_abs() const { return std::log(std::abs(value)) + log_scale; }

BargmannFunction::BargmannFunction(Representation rep, StateVector psi, bool truncated)
    : rep_(rep), psi_(std::move(psi)), truncated_(truncated) {
  rep_.validate();
  const double s2 = rep_.s * rep_.s;
  log_weight_.resize(psi_.size());
  for (std::size_t j = 0; j < psi_.size(); ++j) {
    const double x = psi_.n_min + static_cast<long>(j) + rep_.delta;
    const double a = std::abs(psi_.coeffs[j]);
    log_weight_[j] = a > 0.0 ? std::log(a) - 0.5 * x * x * s2 : -inf;
  }

  // Overflow: every log|term| = A_j + x_j y stays below max_exponent.
  band_ = {-inf, inf};
  for (std::size_t j = 0; j < psi_.size(); ++j) {
    if (!std::isfinite(log_weight_[j])) continue;
    const double x = psi_.n_min + static_cast<long>(j) + rep_.delta;
    if (x > 0.0) band_.hi = std::min(band_.hi, (max_exponent - log_weight_[j]) / x);
    if (x < 0.0) band_.lo = std::max(band_.lo, (max_exponent - log_weight_[j]) / x);
  }
  if (!truncated_ || psi_.size() == 0) return;

  // Truncated window: keep the first and last retained terms negligible
  // against the dominant one. max_j L_j(y) - L_edge(y) is monotone in y.
  auto first = std::find_if(log_weight_.begin(), log_weight_.end(), [](double v) { return std::isfinite(v); });
  if (first == log_weight_.end()) return;
  auto last = std::find_if(log_weight_.rbegin(), log_weight_.rend(), [](double v) { return std::isfinite(v); });
  const std::size_t jf = static_cast<std::size_t>(first - log_weight_.begin());
  const std::size_t jl = log_weight_.size() - 1 - static_cast<std::size_t>(last - log_weight_.rbegin());
  auto gap = [&](double y, std::size_t edge) {
    double mx = -inf;
    for (std::size_t j = 0; j < log_weight_.size(); ++j)
      mx = std::max(mx, log_weight_[j] + (psi_.n_min + static_cast<long>(j) + rep_.delta) * y);
    const double xe = psi_.n_min + static_cast<long>(edge) + rep_.delta;
    return log_weight_[edge] + xe * y - mx;
  };
  // edge_ok(y) for the first edge holds on [y_a, inf), for the last on (-inf, y_b]
  auto solve = [&](std::size_t edge, bool lower) {
    double ok = 0.0, bad = lower ? -1.0 : 1.0;
    if (gap(ok, edge) > edge_ratio_log) return 0.0;  // edge matters even on the real axis
    while (gap(bad, edge) <= edge_ratio_log) {
      bad *= 2.0;
      if (std::abs(bad) > 1e6) return bad;
    }
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (ok + bad);
      (gap(mid, edge) <= edge_ratio_log ? ok : bad) = mid;
    }
    return ok;
  };
  band_.lo = std::max(band_.lo, solve(jf, true));
  band_.hi = std::min(band_.hi, solve(jl, false));
}

long BargmannFunction::lowest_index() const {
  for (std::size_t j = 0; j < psi_.size(); ++j)
    if (std::isfinite(log_weight_[j])) return psi_.n_min + static_cast<long>(j);
  throw NumericalError(ErrorKind::zero_norm, "bargmann: state has no nonzero coefficient");
}

long BargmannFunction::highest_index() const {
  for (std::size_t j = psi_.size(); j-- > 0;)
    if (std::isfinite(log_weight_[j])) return psi_.n_min + static_cast<long>(j);
  throw NumericalError(ErrorKind::zero_norm, "bargmann: state has no nonzero coefficient");
}

void BargmannFunction::check_band(cplx z) const {
  if (!band_.contains(z.imag())) {
    const double bound = z.imag() > 0.0 ? band_.hi : band_.lo;
    throw NumericalError(ErrorKind::overflow_guard,
                         "bargmann: Im z = " + std::to_string(z.imag()) + " outside the safe band [" +
                             std::to_string(band_.lo) + ", " + std::to_string(band_.hi) + "]",
                         bound);
  }
}

ScaledEval BargmannFunction::scaled(cplx z) const {
  check_band(z);
  ScaledEval out{0.0, 0.0, 0.0, -inf};
  const double y = z.imag();
  for (std::size_t j = 0; j < psi_.size(); ++j) {
    if (!std::isfinite(log_weight_[j])) continue;
    const double x = psi_.n_min + static_cast<long>(j) + rep_.delta;
    out.log_scale = std::max(out.log_scale, log_weight_[j] + x * y);
  }
  if (!std::isfinite(out.log_scale)) throw NumericalError(ErrorKind::zero_norm, "bargmann: zero state");
  for (std::size_t j = 0; j < psi_.size(); ++j) {
    if (!std::isfinite(log_weight_[j])) continue;
    const double x = psi_.n_min + static_cast<long>(j) + rep_.delta;
    const double mag = std::exp(log_weight_[j] + x * y - out.log_scale);
    const double phase = -std::arg(psi_.coeffs[j]) - x * z.real();
    const cplx t = std::polar(mag, phase);
    out.value += t;
    out.derivative += cplx(0.0, -x) * t;
    out.abs_sum += mag;
  }
  return out;
}

cplx BargmannFunction::value(cplx z) const {
  const auto e = scaled(z);
  return e.value * std::exp(e.log_scale);
}

cplx BargmannFunction::derivative(cplx z) const {
  const auto e = scaled(z);
  return e.derivative * std::exp(e.log_scale);
}

void CylinderGrid::validate() const {
  if (phi_count < 1 || p_count < 1) throw std::invalid_argument("grid: node counts must be positive");
  if (p_count > 1 && !(p_max > p_min)) throw std::invalid_argument("grid: p_max must exceed p_min");
}

double CylinderGrid::phi(int i) const { return -pi + 2.0 * pi * i / phi_count; }

double CylinderGrid::p(int j) const {
  return p_count == 1 ? p_min : p_min + (p_max - p_min) * j / (p_count - 1);
}

std::vector<double> husimi_field(const BargmannFunction& f, const CylinderGrid& grid) {
  grid.validate();
  const auto& rep = f.rep();
  const double nrm = f.psi().norm_squared();
  if (!(nrm > 0.0)) throw NumericalError(ErrorKind::zero_norm, "husimi_field: state has zero norm");
  const double log_norm = std::log(std::sqrt(pi) * rep.s * rep.hbar * nrm);
  const double sh = rep.s * rep.hbar;
  std::vector<double> field(static_cast<std::size_t>(grid.phi_count) * grid.p_count);
  parallel_for(static_cast<std::size_t>(grid.phi_count), [&](std::size_t i) {
    const double phi = grid.phi(static_cast<int>(i));
    for (int j = 0; j < grid.p_count; ++j) {
      const double p = grid.p(j);
      const auto e = f.scaled(cplx(phi, p / rep.hbar));
      const double a = std::abs(e.value);
      field[i * grid.p_count + j] =
          a > 0.0 ? std::exp(2.0 * (std::log(a) + e.log_scale) - (p * p) / (sh * sh) - log_norm) : 0.0;
    }
  });
  return field;
}

double husimi_mass(const std::vector<double>& field, const CylinderGrid& grid) {
  grid.validate();
  if (field.size() != static_cast<std::size_t>(grid.phi_count) * grid.p_count)
    throw std::invalid_argument("husimi_mass: field does not match the grid");
  const double dp = grid.p_count > 1 ? (grid.p_max - grid.p_min) / (grid.p_count - 1) : 1.0;
  double total = 0.0;
  for (int i = 0; i < grid.phi_count; ++i)
    for (int j = 0; j < grid.p_count; ++j) {
      const double w = (j == 0 || j == grid.p_count - 1) && grid.p_count > 1 ? 0.5 * dp : dp;
      total += w * field[static_cast<std::size_t>(i) * grid.p_count + j];
    }
  return total / grid.phi_count;
}

int nu_of(cplx a) { return a.imag() < 0.0 ? -1 : 1; }

}  // namespace circlecs
