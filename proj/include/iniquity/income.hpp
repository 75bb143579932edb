#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "iniquity/quadrature.hpp"

namespace iniquity {

// An income distribution represented by its quantile function
// q : [0,1] -> R>=0, nondecreasing.  q(x) is the income of the agent richer
// than exactly an x-fraction of the population (the inverse CDF).
//
// Three constructible kinds plus a "derived" kind used for functional
// transforms such as ex-post incomes:
//   power law          q(x) = scale * x^beta
//   piecewise constant n equal-mass cells with nondecreasing values
//   tabulated          monotone piecewise-linear interpolation of knots
//
// A power law with beta > 0 has q(0) = 0.  That is accepted here; operations
// that divide by income reject it at the point of use.
class QuantileFunction {
 public:
  enum class Kind { kPowerLaw, kPiecewiseConstant, kTabulated, kDerived };

  static QuantileFunction power_law(double beta, double scale) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
      throw std::invalid_argument("power_law: beta must be finite and >= 0");
    }
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw std::invalid_argument("power_law: scale must be finite and > 0");
    }
    QuantileFunction q;
    q.kind_ = Kind::kPowerLaw;
    q.beta_ = beta;
    q.scale_ = scale;
    q.exact_mean_ = scale / (beta + 1.0);
    q.exact_lorenz_area_ = 1.0 / (beta + 2.0);  // L(t) = t^(beta+1)
    return q;
  }

  static QuantileFunction piecewise_constant(std::vector<double> values) {
    if (values.empty()) {
      throw std::invalid_argument("piecewise_constant: empty value list");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0) || !std::isfinite(values[i])) {
        throw std::invalid_argument("piecewise_constant: values must be positive");
      }
      if (i > 0 && values[i] < values[i - 1]) {
        throw std::invalid_argument("piecewise_constant: values must be nondecreasing");
      }
    }
    QuantileFunction q;
    q.kind_ = Kind::kPiecewiseConstant;
    q.values_ = std::move(values);
    const auto n = static_cast<double>(q.values_.size());
    for (std::size_t i = 1; i < q.values_.size(); ++i) {
      q.knots_.push_back(static_cast<double>(i) / n);
    }
    q.exact_mean_ =
        std::accumulate(q.values_.begin(), q.values_.end(), 0.0) / n;
    return q;
  }

  static QuantileFunction tabulated(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2) {
      throw std::invalid_argument("tabulated: need at least two knots");
    }
    if (knots.front().first != 0.0 || knots.back().first != 1.0) {
      throw std::invalid_argument("tabulated: knots must span [0, 1]");
    }
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (!std::isfinite(knots[i].second) || knots[i].second < 0.0) {
        throw std::invalid_argument("tabulated: values must be finite and >= 0");
      }
      if (i > 0) {
        if (knots[i].first <= knots[i - 1].first) {
          throw std::invalid_argument("tabulated: x-coordinates must increase");
        }
        if (knots[i].second < knots[i - 1].second) {
          throw std::invalid_argument("tabulated: values must be nondecreasing");
        }
      }
    }
    QuantileFunction q;
    q.kind_ = Kind::kTabulated;
    q.tab_ = std::move(knots);
    for (std::size_t i = 1; i + 1 < q.tab_.size(); ++i) {
      q.knots_.push_back(q.tab_[i].first);
    }
    double m = 0.0;  // trapezoid rule is exact for piecewise-linear q
    for (std::size_t i = 0; i + 1 < q.tab_.size(); ++i) {
      m += 0.5 * (q.tab_[i].second + q.tab_[i + 1].second) *
           (q.tab_[i + 1].first - q.tab_[i].first);
    }
    q.exact_mean_ = m;
    return q;
  }

  static QuantileFunction derived(std::function<double(double)> eval,
                                  std::vector<double> interior_knots) {
    if (!eval) throw std::invalid_argument("derived: empty evaluator");
    QuantileFunction q;
    q.kind_ = Kind::kDerived;
    q.eval_ = std::move(eval);
    std::sort(interior_knots.begin(), interior_knots.end());
    q.knots_ = std::move(interior_knots);
    return q;
  }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::kPowerLaw:
        return scale_ * std::pow(x, beta_);
      case Kind::kPiecewiseConstant: {
        const auto n = static_cast<double>(values_.size());
        // cells are half-open: ((i-1)/n, i/n] holds values_[i-1]
        auto i = static_cast<long>(std::ceil(x * n));
        i = std::clamp<long>(i, 1, static_cast<long>(values_.size()));
        return values_[static_cast<std::size_t>(i - 1)];
      }
      case Kind::kTabulated: {
        auto it = std::upper_bound(
            tab_.begin(), tab_.end(), x,
            [](double v, const std::pair<double, double>& k) { return v < k.first; });
        if (it == tab_.begin()) return tab_.front().second;
        if (it == tab_.end()) return tab_.back().second;
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double t = (x - lo.first) / (hi.first - lo.first);
        return lo.second + t * (hi.second - lo.second);
      }
      case Kind::kDerived:
        return eval_(x);
    }
    return 0.0;  // unreachable
  }

  Kind kind() const { return kind_; }
  const std::vector<double>& interior_knots() const { return knots_; }
  std::optional<double> exact_mean() const { return exact_mean_; }
  std::optional<double> exact_lorenz_area() const { return exact_lorenz_area_; }

  // payload accessors, used by serialization
  double beta() const { return beta_; }
  double scale_factor() const { return scale_; }
  const std::vector<double>& cell_values() const { return values_; }
  const std::vector<std::pair<double, double>>& tab_knots() const { return tab_; }

 private:
  QuantileFunction() = default;

  Kind kind_ = Kind::kPowerLaw;
  double beta_ = 0.0;
  double scale_ = 1.0;
  std::vector<double> values_;
  std::vector<std::pair<double, double>> tab_;
  std::function<double(double)> eval_;
  std::vector<double> knots_;
  std::optional<double> exact_mean_;
  std::optional<double> exact_lorenz_area_;
};

inline double mean(const QuantileFunction& q, double tol = kQuadratureTol) {
  if (auto m = q.exact_mean()) return *m;
  return integrate_with_knots([&](double x) { return q(x); }, 0.0, 1.0,
                              q.interior_knots(), tol);
}

namespace detail {

// B = integral of the Lorenz curve over [0,1], computed from the Fubini
// identity  int_0^1 L = (1/mu) int_0^1 (1-x) q(x) dx  (one quadrature pass).
// The integrand is normalized by mu before integrating so that the adaptive
// refinement, and with it the result, is invariant under income scaling.
inline double lorenz_area_numeric(const QuantileFunction& q, double tol) {
  const double mu = mean(q, tol);
  if (!(mu > 0.0)) {
    throw std::domain_error("Gini undefined for a distribution with zero mean");
  }
  return integrate_with_knots(
      [&, mu](double x) { return (1.0 - x) * q(x) / mu; }, 0.0, 1.0,
      q.interior_knots(), tol);
}

}  // namespace detail

// Gini via quadrature only, ignoring the closed forms.  Mainly a
// verification hook; also used where a nonstandard tolerance is needed.
inline double gini_numeric(const QuantileFunction& q, double tol = kQuadratureTol) {
  return 1.0 - 2.0 * detail::lorenz_area_numeric(q, tol);
}

// Gini coefficient G = 1 - 2 * int_0^1 L(t) dt.  Uses the closed form for
// power laws (G = beta / (beta + 2)) and quadrature otherwise.
inline double gini(const QuantileFunction& q) {
  if (auto area = q.exact_lorenz_area()) {
    const double mu = mean(q);
    if (!(mu > 0.0)) {
      throw std::domain_error("Gini undefined for a distribution with zero mean");
    }
    return 1.0 - 2.0 * *area;
  }
  return gini_numeric(q);
}

// L(t): fraction of total income held by the poorest t-fraction.
class LorenzCurve {
 public:
  explicit LorenzCurve(QuantileFunction q, double tol = kQuadratureTol)
      : q_(std::move(q)), mu_(iniquity::mean(q_, tol)), tol_(tol) {
    if (!(mu_ > 0.0)) {
      throw std::domain_error("Lorenz curve undefined for zero-mean distribution");
    }
  }

  double operator()(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    if (q_.kind() == QuantileFunction::Kind::kPowerLaw) {
      return std::pow(t, q_.beta() + 1.0);
    }
    return integrate_with_knots([&](double x) { return q_(x); }, 0.0, t,
                                q_.interior_knots(), tol_) /
           mu_;
  }

  double mean() const { return mu_; }

 private:
  QuantileFunction q_;
  double mu_;
  double tol_;
};

inline LorenzCurve lorenz(const QuantileFunction& q) { return LorenzCurve(q); }

// Discrete Gini of equal-mass cells, by the sorted weighted-index formula
//   G = (2 * sum_i i*v_i) / (n * sum_i v_i) - (n+1)/n .
// Agrees with gini(piecewise_constant(values)) by construction of the
// continuous definition on the step quantile function.
inline double gini_discrete(std::vector<double> values) {
  if (values.empty()) {
    throw std::invalid_argument("gini_discrete: empty value list");
  }
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("gini_discrete: values must be positive");
    }
  }
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  double total = 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    total += values[i];
    weighted += static_cast<double>(i + 1) * values[i];
  }
  return 2.0 * weighted / (n * total) - (n + 1.0) / n;
}

// Gini of a finite distribution with arbitrary positive masses.
// Values may repeat; masses need not be normalized.
inline double gini_weighted(std::vector<double> values, std::vector<double> masses) {
  if (values.empty() || values.size() != masses.size()) {
    throw std::invalid_argument("gini_weighted: mismatched or empty inputs");
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  double total_mass = 0.0;
  double total_income = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(masses[i] >= 0.0)) {
      throw std::invalid_argument("gini_weighted: masses must be >= 0");
    }
    total_mass += masses[i];
    total_income += masses[i] * values[i];
  }
  if (!(total_mass > 0.0) || !(total_income > 0.0)) {
    throw std::domain_error("gini_weighted: needs positive total mass and income");
  }
  // 1 - sum_k m_k (L_{k-1} + L_k), the exact Lorenz integral of the step
  // quantile function induced by the weighted sample.
  double cum_income = 0.0;
  double acc = 0.0;
  for (std::size_t k : order) {
    const double m = masses[k] / total_mass;
    const double l_prev = cum_income / total_income;
    cum_income += masses[k] * values[k];
    const double l_next = cum_income / total_income;
    acc += m * (l_prev + l_next);
  }
  return 1.0 - acc;
}

// Pointwise scaling q -> lambda * q.  Gini is invariant under this map.
inline QuantileFunction scale(const QuantileFunction& q, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("scale: lambda must be finite and > 0");
  }
  switch (q.kind()) {
    case QuantileFunction::Kind::kPowerLaw:
      return QuantileFunction::power_law(q.beta(), q.scale_factor() * lambda);
    case QuantileFunction::Kind::kPiecewiseConstant: {
      auto v = q.cell_values();
      for (double& x : v) x *= lambda;
      return QuantileFunction::piecewise_constant(std::move(v));
    }
    case QuantileFunction::Kind::kTabulated: {
      auto k = q.tab_knots();
      for (auto& [x, y] : k) y *= lambda;
      return QuantileFunction::tabulated(std::move(k));
    }
    case QuantileFunction::Kind::kDerived:
      return QuantileFunction::derived(
          [q, lambda](double x) { return lambda * q(x); }, q.interior_knots());
  }
  throw std::logic_error("scale: unknown kind");
}

// A distribution given as a mixture of uniform chunks over value intervals
// (lo == hi is a point mass).  Used where incomes of distinct subpopulations
// interleave and the quantile function of the union is awkward to write down.
struct ValueSegment {
  double lo = 0.0;
  double hi = 0.0;
  double mass = 0.0;
};

inline double segment_mean(const std::vector<ValueSegment>& segs) {
  double mass = 0.0, income = 0.0;
  for (const auto& s : segs) {
    if (!(s.mass >= 0.0) || s.hi < s.lo) {
      throw std::invalid_argument("segment_mean: malformed segment");
    }
    mass += s.mass;
    income += s.mass * 0.5 * (s.lo + s.hi);
  }
  if (!(mass > 0.0)) throw std::invalid_argument("segment_mean: zero total mass");
  return income / mass;
}

// Exact Gini of a segment mixture via  G = (1/mu) int F(v)(1 - F(v)) dv.
// F is piecewise linear, so the integrand is piecewise quadratic and
// Simpson integration between breakpoints is exact.
inline double segment_gini(const std::vector<ValueSegment>& segs) {
  const double mu = segment_mean(segs);
  if (!(mu > 0.0)) {
    throw std::domain_error("segment_gini: zero-mean distribution");
  }
  double total_mass = 0.0;
  std::vector<double> cuts;
  for (const auto& s : segs) {
    total_mass += s.mass;
    cuts.push_back(s.lo);
    cuts.push_back(s.hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  // One-sided limits matter only at atoms sitting on piece boundaries: the
  // right-continuous CDF belongs to the piece on the right, its left limit
  // to the piece on the left.
  const auto cdf = [&](double v, bool left_limit) {
    double f = 0.0;
    for (const auto& s : segs) {
      const bool whole = left_limit ? (v > s.hi) : (v >= s.hi);
      if (whole) {
        f += s.mass;
      } else if (v > s.lo) {
        f += s.mass * (v - s.lo) / (s.hi - s.lo);
      }
    }
    return f / total_mass;
  };
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b <= a) continue;
    const double fa = cdf(a, false);
    const double fm = cdf(0.5 * (a + b), false);
    const double fb = cdf(b, true);
    const auto g = [](double f) { return f * (1.0 - f); };
    acc += (b - a) / 6.0 * (g(fa) + 4.0 * g(fm) + g(fb));
  }
  return acc / mu;
}

}  // namespace iniquity
