#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace iniquity {

inline constexpr double kQuadratureTol = 1e-10;
inline constexpr int kQuadratureMaxDepth = 40;

struct IntegrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

template <class F>
double eval_checked(const F& f, double x) {
  const double v = f(x);
  if (!std::isfinite(v)) {
    throw IntegrationError("non-finite integrand value");
  }
  return v;
}

// One level of adaptive Simpson with the usual 1/15 Richardson correction.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = eval_checked(f, lm);
  const double frm = eval_checked(f, rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance tol.
template <class F>
double integrate(const F& f, double a, double b, double tol = kQuadratureTol,
                 int max_depth = kQuadratureMaxDepth) {
  if (!(a <= b)) throw IntegrationError("integrate: inverted interval");
  if (a == b) return 0.0;
  const double fa = detail::eval_checked(f, a);
  const double fb = detail::eval_checked(f, b);
  const double fm = detail::eval_checked(f, 0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Quadrature split at the interior knots of a piecewise-smooth integrand.
// Knots outside (a, b) are ignored; the per-piece tolerance is allocated
// proportionally to piece length.
template <class F>
double integrate_with_knots(const F& f, double a, double b,
                            const std::vector<double>& knots,
                            double tol = kQuadratureTol,
                            int max_depth = kQuadratureMaxDepth) {
  if (!(a <= b)) throw IntegrationError("integrate: inverted interval");
  if (a == b) return 0.0;
  std::vector<double> cuts;
  cuts.push_back(a);
  for (double k : knots) {
    if (k > a && k < b) cuts.push_back(k);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    if (hi <= lo) continue;
    const double piece_tol = std::max(tol * (hi - lo) / (b - a), 1e-300);
    total += integrate(f, lo, hi, piece_tol, max_depth);
  }
  return total;
}

// Locates the sign change of a function whose positivity region is an
// up-set of [lo, hi]: r <= 0 on the left of the crossing and r > 0 on the
// right.  Works for discontinuous r (step functions); if r never changes
// sign the matching endpoint is returned.
template <class F>
double bisect_sign_change(const F& r, double lo, double hi, int iters = 90) {
  if (r(lo) > 0.0) return lo;
  if (r(hi) <= 0.0) return hi;
  for (int i = 0; i < iters && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (r(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Golden-section search for the minimizer of a unimodal function.
template <class F>
double golden_section_min(const F& f, double lo, double hi, double xtol = 1e-10) {
  static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > xtol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

template <class F>
double golden_section_max(const F& f, double lo, double hi, double xtol = 1e-10) {
  return golden_section_min([&](double x) { return -f(x); }, lo, hi, xtol);
}

}  // namespace iniquity
