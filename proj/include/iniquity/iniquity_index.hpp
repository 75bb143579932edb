#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "iniquity/game.hpp"
#include "iniquity/income.hpp"
#include "iniquity/quadrature.hpp"

// The iniquity index of a solved instance: the derivative of the post-game
// Gini coefficient with respect to the cost-importance parameter alpha at
// alpha = 0.  Two routes are provided; they are independent cross-checks:
//
//   analytic  Differentiates G(alpha) = 1 - 2 (A - alpha B) / (mu - alpha C)
//             at alpha = 0, giving I = 2 (B mu - A C) / mu^2, with
//               A = int_0^1 Q(x) dx,  B = int_0^1 (1-t) cost(t) dt,
//               C = social cost,      mu = mean income.
//
//   finite difference  Evaluates the Gini of the ex-post distribution on a
//             halving alpha grid through the generic quadrature path and
//             Richardson-extrapolates the difference quotients.

namespace iniquity {

struct FiniteDifferenceResult {
  double value = 0.0;
  std::vector<double> alpha_grid;
  std::vector<double> gini_values;                // G(q_alpha) per grid point
  std::vector<std::vector<double>> richardson;    // extrapolation tableau rows
};

struct IniquityReport {
  double gini_ex_ante = 0.0;
  double analytic = 0.0;
  double finite_difference = 0.0;
  double agreement_gap = 0.0;
  double area_income = 0.0;   // A
  double area_cost = 0.0;     // B
  double social_cost = 0.0;   // C
  double mu = 0.0;
  std::vector<double> alpha_grid;
  std::vector<double> gini_ex_post;
};

inline std::vector<double> default_alpha_grid(double alpha0 = 1e-2,
                                              int halvings = 8) {
  std::vector<double> grid;
  double a = alpha0;
  for (int i = 0; i < halvings; ++i) {
    grid.push_back(a);
    a *= 0.5;
  }
  return grid;
}

inline double iniquity_analytic(const QuantileFunction& q,
                                const EquilibriumResult& result,
                                double quad_tol = 1e-12) {
  const double mu = mean(q, quad_tol);
  if (!(mu > 0.0)) {
    throw std::domain_error("iniquity_analytic: zero-mean income distribution");
  }
  // A = int Q = int (1-x) q(x) dx by Fubini; B likewise in one pass.
  const double a_int = integrate_with_knots(
      [&](double x) { return (1.0 - x) * q(x); }, 0.0, 1.0, q.interior_knots(),
      quad_tol);
  const double b_int = integrate_with_knots(
      [&](double t) { return (1.0 - t) * result.cost(t); }, 0.0, 1.0,
      result.cost_knots, quad_tol);
  const double c_int = result.social_cost;
  return 2.0 * (b_int * mu - a_int * c_int) / (mu * mu);
}

// Difference quotients (G(q_alpha) - G(q)) / alpha on the given grid, with
// a Richardson tableau assuming grid entries halve.  The reported value is
// the tableau entry with the most settled successive difference, which
// keeps quadrature noise at the smallest alphas from dominating.
inline FiniteDifferenceResult iniquity_finite_difference(
    const QuantileFunction& q, const EquilibriumResult& result,
    const std::vector<double>& alpha_grid, double gini_tol = 1e-13) {
  if (alpha_grid.empty()) {
    throw std::invalid_argument("iniquity_finite_difference: empty alpha grid");
  }
  FiniteDifferenceResult fd;
  fd.alpha_grid = alpha_grid;
  const double g0 = gini_numeric(q, gini_tol);
  std::vector<double> quotients;
  for (double alpha : alpha_grid) {
    const auto qa = ex_post(q, result, alpha, result.model);
    const double ga = gini_numeric(qa, gini_tol);
    fd.gini_values.push_back(ga);
    quotients.push_back((ga - g0) / alpha);
  }
  const std::size_t n = quotients.size();
  std::vector<std::vector<double>> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    t[i].resize(i + 1);
    t[i][0] = quotients[i];
    for (std::size_t k = 1; k <= i; ++k) {
      const double pow2 = std::pow(2.0, static_cast<double>(k));
      t[i][k] = (pow2 * t[i][k - 1] - t[i - 1][k - 1]) / (pow2 - 1.0);
    }
  }
  fd.richardson = t;
  double best = t[n - 1][n - 1];
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t k = 1; k <= i; ++k) {
      const double gap = std::abs(t[i][k] - t[i][k - 1]);
      if (gap < best_gap) {
        best_gap = gap;
        best = t[i][k];
      }
    }
  }
  fd.value = best;
  return fd;
}

inline IniquityReport iniquity_report(const QuantileFunction& q,
                                      const EquilibriumResult& result,
                                      const std::vector<double>& alpha_grid) {
  IniquityReport rep;
  rep.mu = mean(q);
  rep.gini_ex_ante = gini(q);
  rep.area_income = integrate_with_knots(
      [&](double x) { return (1.0 - x) * q(x); }, 0.0, 1.0, q.interior_knots(),
      1e-12);
  rep.area_cost = integrate_with_knots(
      [&](double t) { return (1.0 - t) * result.cost(t); }, 0.0, 1.0,
      result.cost_knots, 1e-12);
  rep.social_cost = result.social_cost;
  rep.analytic = iniquity_analytic(q, result);
  const auto fd = iniquity_finite_difference(q, result, alpha_grid);
  rep.finite_difference = fd.value;
  rep.agreement_gap = std::abs(rep.analytic - rep.finite_difference);
  rep.alpha_grid = fd.alpha_grid;
  rep.gini_ex_post = fd.gini_values;
  return rep;
}

struct ScaleInvarianceRow {
  double lambda = 0.0;
  double value = 0.0;
  double gap = 0.0;
};

struct ScaleInvarianceReport {
  double base_value = 0.0;
  std::vector<ScaleInvarianceRow> rows;
  bool all_within = false;
};

// Scales incomes by lambda and tolls by lambda (the toll that preserves the
// optimal flow under canonical costs), re-solves from scratch, and compares
// the analytic index values.
inline ScaleInvarianceReport check_scale_invariance(
    const QuantileFunction& q, const ParallelNetwork& net,
    const std::vector<double>& lambda_grid, double tol = 1e-8) {
  ScaleInvarianceReport rep;
  const auto base = equilibrium_parallel(net, q, CostModel::kCanonical);
  rep.base_value = iniquity_analytic(q, base);
  rep.all_within = true;
  for (double lambda : lambda_grid) {
    const auto q_l = scale(q, lambda);
    const auto net_l = net.with_scaled_tolls(lambda);
    const auto solved = equilibrium_parallel(net_l, q_l, CostModel::kCanonical);
    const double value = iniquity_analytic(q_l, solved);
    const double gap = std::abs(value - rep.base_value);
    rep.rows.push_back({lambda, value, gap});
    if (!(gap <= tol)) rep.all_within = false;
  }
  return rep;
}

}  // namespace iniquity
