#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "circlecs/errors.hpp"
#include "circlecs/husimi.hpp"

namespace circlecs {

namespace {

constexpr double two_pi = 2.0 * pi;
constexpr double max_step_arg = pi / 4.0;
constexpr int max_line_samples = 1 << 16;
constexpr double edge_piece = 0.1;
constexpr double origin_tol = 1e-8;
constexpr double merge_tol = 1e-8;

// arg(b / a) in (-pi, pi]
double arg_step(cplx a, cplx b) { return std::arg(b * std::conj(a)); }

[[noreturn]] void boundary_zero(const std::string& where, double at) {
  throw NumericalError(ErrorKind::boundary_zero, "find_strip_zeros: contour passes through a zero " + where, at);
}

// Argument change of psi along Im z = y over [x0, x0 + 2 pi], by argument
// tracking on a doubling grid, cross-checked against the periodic trapezoid
// rule for psi'/psi.
long winding_on_line(const BargmannFunction& f, double y, double x0, double tol) {
  const double delta = f.rep().delta;
  for (int n = 64; n <= max_line_samples; n *= 2) {
    double total = 0.0;
    double largest = 0.0;
    cplx trap = 0.0;
    ScaledEval prev = f.scaled(cplx(x0, y));
    ScaledEval first = prev;
    for (int j = 1; j <= n; ++j) {
      if (std::abs(prev.value) <= tol * std::abs(prev.derivative)) boundary_zero("on a horizontal line", y);
      trap += prev.derivative / prev.value;
      const ScaledEval cur = j == n ? first : f.scaled(cplx(x0 + two_pi * j / n, y));
      // the closing sample is psi(x0 + 2 pi) = exp(-2 pi i delta) psi(x0)
      const cplx cur_value = j == n ? cur.value * std::polar(1.0, -two_pi * delta) : cur.value;
      const double d = arg_step(prev.value, cur_value);
      total += d;
      largest = std::max(largest, std::abs(d));
      prev = cur;
      prev.value = cur_value;
    }
    const double w_arg = total / two_pi;
    const double w_trap = (trap * (two_pi / n) / cplx(0.0, two_pi)).real();
    const double k = std::round(w_arg + delta);
    if (largest < max_step_arg && std::abs(w_arg - w_trap) < 1e-6 && std::abs(w_arg + delta - k) < 1e-6)
      return static_cast<long>(k);
  }
  boundary_zero("on a horizontal line", y);
}

struct Rect {
  double x0, x1, y0, y1;
  double size() const { return std::max(x1 - x0, y1 - y0); }
  cplx center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
};

class ZeroSearch {
 public:
  ZeroSearch(const BargmannFunction& f, double tol) : f_(f), tol_(tol) {}

  // Winding of psi around the rectangle boundary, counterclockwise.
  long count(const Rect& r) const {
    const cplx c00(r.x0, r.y0), c10(r.x1, r.y0), c11(r.x1, r.y1), c01(r.x0, r.y1);
    const double total = edge(c00, c10) + edge(c10, c11) + edge(c11, c01) + edge(c01, c00);
    const double k = std::round(total / two_pi);
    if (std::abs(total / two_pi - k) > 1e-3) boundary_zero("on a rectangle edge", r.y0);
    return static_cast<long>(k);
  }

  void locate(const Rect& r, long n, std::vector<std::pair<cplx, long>>& out) const {
    if (n == 0) return;
    if (n < 0) throw NumericalError(ErrorKind::count_mismatch, "find_strip_zeros: negative winding count");
    const double size = r.size();
    if ((n == 1 && size <= 0.5) || size < 1e-7) {
      cplx z;
      if (polish(r.center(), n, z) && inside(r, z)) {
        out.emplace_back(z, n);
        return;
      }
      if (size < 1e-7)
        throw NumericalError(ErrorKind::count_mismatch, "find_strip_zeros: Newton polishing lost a zero", size);
    }
    const bool split_x = (r.x1 - r.x0) >= (r.y1 - r.y0);
    for (double t : {0.5, 0.4713, 0.5389, 0.4411}) {
      Rect a = r, b = r;
      if (split_x) a.x1 = b.x0 = r.x0 + t * (r.x1 - r.x0);
      else a.y1 = b.y0 = r.y0 + t * (r.y1 - r.y0);
      long na = 0, nb = 0;
      try {
        na = count(a);
        nb = count(b);
      } catch (const NumericalError& e) {
        if (e.kind() != ErrorKind::boundary_zero) throw;
        continue;
      }
      if (na + nb != n) continue;
      locate(a, na, out);
      locate(b, nb, out);
      return;
    }
    throw NumericalError(ErrorKind::count_mismatch, "find_strip_zeros: subdivision counts do not add up", size);
  }

 private:
  double edge(cplx a, cplx b) const {
    const double len = std::abs(b - a);
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / edge_piece)));
    double total = 0.0;
    cplx za = a;
    cplx va = sample(za);
    for (int i = 1; i <= pieces; ++i) {
      const cplx zb = a + (b - a) * (static_cast<double>(i) / pieces);
      const cplx vb = sample(zb);
      total += segment(za, zb, va, vb, 0);
      za = zb;
      va = vb;
    }
    return total;
  }

  cplx sample(cplx z) const {
    const auto e = f_.scaled(z);
    if (std::abs(e.value) <= tol_ * std::abs(e.derivative)) boundary_zero("near a sample point", z.imag());
    return e.value;
  }

  double segment(cplx za, cplx zb, cplx va, cplx vb, int depth) const {
    const cplx zm = 0.5 * (za + zb);
    const cplx vm = sample(zm);
    const double d1 = arg_step(va, vm), d2 = arg_step(vm, vb);
    const double whole = arg_step(va, vb);
    const double mismatch = std::remainder(d1 + d2 - whole, two_pi);
    if (std::abs(d1) < max_step_arg && std::abs(d2) < max_step_arg && std::abs(mismatch) < 1e-9) return d1 + d2;
    if (std::abs(zb - za) < tol_ || depth > 60) boundary_zero("on a rectangle edge", zm.imag());
    return segment(za, zm, va, vm, depth + 1) + segment(zm, zb, vm, vb, depth + 1);
  }

  // Newton, modified for multiplicity. Scaled mantissas cancel in the ratio.
  bool polish(cplx z0, long mult, cplx& z) const {
    z = z0;
    const Band band = f_.safe_band();
    for (int it = 0; it < 80; ++it) {
      const auto e = f_.scaled(z);
      if (e.value == 0.0) break;
      if (e.derivative == 0.0) return false;
      const cplx step = static_cast<double>(mult) * e.value / e.derivative;
      z -= step;
      if (!band.contains(z.imag()) || !std::isfinite(z.real())) return false;
      if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z))) break;
    }
    const auto e = f_.scaled(z);
    return std::abs(e.value) <= tol_ * e.abs_sum;
  }

  static bool inside(const Rect& r, cplx z) {
    const double m = 1e-9 + 1e-6 * r.size();
    return z.real() >= r.x0 - m && z.real() <= r.x1 + m && z.imag() >= r.y0 - m && z.imag() <= r.y1 + m;
  }

  const BargmannFunction& f_;
  double tol_;
};

}  // namespace

long line_winding(const BargmannFunction& f, double y) { return winding_on_line(f, y, 0.0, 1e-12); }

long strip_zero_count(const BargmannFunction& f, double y_lo, double y_hi) {
  return line_winding(f, y_lo) - line_winding(f, y_hi);
}

StripZeros find_strip_zeros(const BargmannFunction& f, double im_cutoff, double tol) {
  if (!(im_cutoff > 0.0)) throw std::invalid_argument("find_strip_zeros: im_cutoff must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("find_strip_zeros: tol must be positive");
  const Band band = f.safe_band();
  if (!band.contains(-im_cutoff) || !band.contains(im_cutoff))
    throw NumericalError(ErrorKind::overflow_guard, "find_strip_zeros: cutoff exceeds the safe band",
                         std::min(-band.lo, band.hi));

  const ZeroSearch search(f, tol);
  // Attempt 0 uses the stated contour; later attempts shift the vertical edges
  // and nudge the horizontal lines when a zero sits on the contour.
  const double shifts[] = {0.0, -0.0917, 0.1371};
  std::string last_error;
  for (int attempt = 0; attempt < 3; ++attempt) {
    const double x0 = shifts[attempt];
    const double y_top = im_cutoff * (1.0 - 1e-7 * attempt);
    const double y_bot = -y_top;
    std::vector<std::pair<cplx, long>> found;
    long total = 0;
    try {
      total = winding_on_line(f, y_bot, x0, tol) - winding_on_line(f, y_top, x0, tol);
      const Rect strip{x0, x0 + two_pi, y_bot, y_top};
      if (search.count(strip) != total)
        throw NumericalError(ErrorKind::count_mismatch, "find_strip_zeros: line and contour counts differ");
      search.locate(strip, total, found);
    } catch (const NumericalError& e) {
      if (e.kind() != ErrorKind::boundary_zero) throw;
      last_error = e.what();
      continue;
    }

    long polished = 0;
    for (const auto& [z, mult] : found) polished += mult;
    for (std::size_t i = 0; i < found.size(); ++i)
      for (std::size_t j = i + 1; j < found.size(); ++j)
        if (std::abs(found[i].first - found[j].first) < merge_tol * (1.0 + std::abs(found[i].first)))
          throw NumericalError(ErrorKind::count_mismatch, "find_strip_zeros: two boxes converged to one zero");
    if (polished != total)
      throw NumericalError(ErrorKind::count_mismatch,
                           "find_strip_zeros: polished " + std::to_string(polished) + " of " +
                               std::to_string(total) + " zeros",
                           static_cast<double>(total - polished));

    StripZeros out;
    for (const auto& [z, mult] : found) {
      double re = z.real() - two_pi * std::floor(z.real() / two_pi);
      if (re >= two_pi) re -= two_pi;
      cplx a(re, z.imag());
      if (std::abs(a) < origin_tol || std::abs(a - two_pi) < origin_tol) {
        out.m += static_cast<int>(mult);
        continue;
      }
      for (long k = 0; k < mult; ++k) out.a_list.push_back(a);
    }
    std::sort(out.a_list.begin(), out.a_list.end(), [](cplx p, cplx q) {
      return p.imag() != q.imag() ? p.imag() < q.imag() : p.real() < q.real();
    });
    for (const cplx& a : out.a_list) out.nu_list.push_back(nu_of(a));
    return out;
  }
  throw NumericalError(ErrorKind::boundary_zero, "find_strip_zeros: perturbed contours failed twice: " + last_error);
}

Band finite_support_zero_band(const BargmannFunction& f) {
  const long n0 = f.lowest_index();
  const long n1 = f.highest_index();
  if (n0 == n1) return {-1.0, 1.0};
  const auto& psi = f.psi();
  const double s2 = f.rep().s * f.rep().s;
  auto log_b = [&](long n) {
    const double x = n + f.rep().delta;
    const double a = std::abs(psi.at(n));
    return a > 0.0 ? std::log(a) - 0.5 * x * x * s2 : -std::numeric_limits<double>::infinity();
  };
  // log(1 + max_j |b_j / b_ref|) without overflow
  auto bound = [&](long ref, long from, long to) {
    double mx = -std::numeric_limits<double>::infinity();
    for (long n = from; n <= to; ++n) mx = std::max(mx, log_b(n) - log_b(ref));
    return mx > 30.0 ? mx + std::log1p(std::exp(-mx)) : std::log1p(std::exp(mx));
  };
  return {-bound(n0, n0 + 1, n1), bound(n1, n0, n1 - 1)};
}

long determine_l(const BargmannFunction& f) {
  if (!f.truncated()) {
    // Far below every zero the winding is that of the lowest occupied index.
    const Band zb = finite_support_zero_band(f);
    const double y_low = std::max(zb.lo - 1.0, f.safe_band().lo);
    const long n0 = f.lowest_index();
    if (y_low >= zb.lo || line_winding(f, y_low) != -n0)
      throw NumericalError(ErrorKind::undetermined, "determine_l: lowest-index winding not reached in the safe band");
  }
  // k(y) is nondecreasing as y decreases below the axis and equals l just
  // below it; approach the axis until the value settles.
  const double start = 0.5 * std::min(1.0, f.rep().s * f.rep().s);
  long settled = 0;
  int agree = 0;
  bool have = false;
  for (int j = 0; j < 40; ++j) {
    const double y = -start * std::ldexp(1.0, -j);
    long k;
    try {
      k = line_winding(f, y);
    } catch (const NumericalError& e) {
      if (e.kind() != ErrorKind::boundary_zero) throw;
      agree = 0;
      continue;
    }
    if (have && k == settled) {
      if (++agree >= 3) return settled;
    } else {
      settled = k;
      have = true;
      agree = 0;
    }
  }
  throw NumericalError(ErrorKind::undetermined, "determine_l: winding below the real axis did not settle");
}

long determine_l(const BargmannFunction& f, const StripZeros& zeros) {
  // Choose a line just below the axis and above every listed zero with
  // Im a < 0; no zero lies between it and the axis.
  double nearest = std::min(1.0, f.rep().s * f.rep().s);
  long n_minus = 0;
  for (const cplx& a : zeros.a_list)
    if (a.imag() < 0.0) {
      nearest = std::min(nearest, -a.imag());
      ++n_minus;
    }
  const long l = line_winding(f, -0.5 * nearest);
  if (!f.truncated() && l != -f.lowest_index() - n_minus)
    throw NumericalError(ErrorKind::undetermined,
                         "determine_l: winding disagrees with the lowest index and the zeros below the axis");
  return l;
}

}  // namespace circlecs
