#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "iniquity/income.hpp"

// Two-commodity counterexamples where tolls improve the population-wide
// Gini even though inequality worsens within each commodity.  Both
// instances use income q(x) = x and split [0, 1] into a poor commodity D1
// and a rich commodity D2 with separate path sets.
//
// Baselines: the "no income effect" game is the plain latency equilibrium
// with zero tolls; its money cost (income times latency) subtracted from q
// gives the baseline distribution q0.  The tolled, income-aware game gives
// the ex-post distribution qhat.  Within-commodity Ginis are computed on
// the renormalized conditional distribution of the commodity's interval.

namespace iniquity {

// Fixed instance: D1 = [0, 1/2] rides a free zero-latency link;
// D2 = [1/2, 1] plays a Pigou pair with upper latency 1 (no toll) and lower
// latency z carrying toll 3/4.  At equilibrium the richest mass
// m = 1 - sqrt(3)/2 of the whole population takes the tolled link, pinned
// by (1 - m)^2 = 3/4.
struct Fig7Result {
  double alpha = 0.0;
  double tolled_mass = 0.0;
  double boundary = 0.0;           // poorest tolled agent
  double quad_residual = 0.0;      // |(1-m)^2 - 3/4|
  double boundary_residual = 0.0;  // indifference at the boundary agent
  double alpha_max = 0.0;          // largest alpha keeping incomes positive
  double gini_ex_ante = 0.0;       // G(q)
  double gini_baseline = 0.0;      // G(q0)
  double gini_ex_post = 0.0;       // G(qhat)
  double gini_d2_ex_ante = 0.0;
  double gini_d2_baseline = 0.0;
  double gini_d2_ex_post = 0.0;
};

inline Fig7Result solve_fig7(double alpha = 0.01) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("solve_fig7: alpha must lie in (0, 1)");
  }
  Fig7Result r;
  r.alpha = alpha;
  const double m = 1.0 - std::sqrt(3.0) / 2.0;
  const double xb = 1.0 - m;  // = sqrt(3)/2
  r.tolled_mass = m;
  r.boundary = xb;
  r.quad_residual = std::abs((1.0 - m) * (1.0 - m) - 0.75);
  // boundary agent: upper cost q*1 vs lower cost q*m + 3/4
  r.boundary_residual = std::abs(xb * 1.0 - (xb * m + 0.75));
  // positivity binds only through the multiplicative factors (1 - alpha)
  // and (1 - alpha m); both stay positive for alpha < 1
  r.alpha_max = 1.0;

  // ex ante: q(x) = x uniform on (0, 1)
  const std::vector<ValueSegment> ex_ante{{0.0, 1.0, 1.0}};
  r.gini_ex_ante = segment_gini(ex_ante);

  // baseline (zero tolls, no income effect): D1 cost 0; D2 all on the
  // variable link at congestion 1/2, money cost x/2
  const std::vector<ValueSegment> baseline{
      {0.0, 0.5, 0.5},
      {0.5 * (1.0 - 0.5 * alpha), 1.0 - 0.5 * alpha, 0.5},
  };
  r.gini_baseline = segment_gini(baseline);

  // tolled, income-aware equilibrium:
  //   D1: cost 0                          -> x            on (0, 1/2]
  //   D2 upper (x in (1/2, xb]): cost x   -> x (1 - alpha)
  //   D2 lower (x in (xb, 1]): cost xm + 3/4
  const std::vector<ValueSegment> post{
      {0.0, 0.5, 0.5},
      {0.5 * (1.0 - alpha), xb * (1.0 - alpha), xb - 0.5},
      {xb * (1.0 - alpha * m) - 0.75 * alpha, (1.0 - alpha * m) - 0.75 * alpha, m},
  };
  r.gini_ex_post = segment_gini(post);

  // conditional views of D2 = (1/2, 1]
  r.gini_d2_ex_ante = segment_gini({{0.5, 1.0, 1.0}});
  r.gini_d2_baseline = segment_gini(
      {{0.5 * (1.0 - 0.5 * alpha), 1.0 - 0.5 * alpha, 1.0}});
  r.gini_d2_ex_post = segment_gini({
      {0.5 * (1.0 - alpha), xb * (1.0 - alpha), (xb - 0.5) * 2.0},
      {xb * (1.0 - alpha * m) - 0.75 * alpha, (1.0 - alpha * m) - 0.75 * alpha,
       m * 2.0},
  });
  return r;
}

// Parametric instance: D1 = [0, x*] rides the middle link (latency z) that
// D2's lower path shares; D2 = [x*, 1] chooses between an upper path with
// latency 1 + z and a lower path through the shared link plus a tolled
// zero-latency tail.  The toll tau = 2 h* (h* - x*) splits D2 in half at
// the boundary income h* = (1 + x*) / 2.
struct Gamma2Result {
  double x_star = 0.0;
  double h_star = 0.0;
  double upper_mass = 0.0;  // f, D2 mass on the untolled upper path
  double tau = 0.0;
  double alpha = 0.0;
  double boundary_residual = 0.0;
  double gini_baseline = 0.0;    // G(q0)
  double gini_ex_post = 0.0;     // G(qhat)
  double gini_d2_baseline = 0.0;
  double gini_d2_ex_post = 0.0;
};

inline Gamma2Result solve_gamma2(double x_star, double alpha = 0.01) {
  if (!(x_star > 0.0 && x_star < 1.0)) {
    throw std::invalid_argument("solve_gamma2: x* must lie in (0, 1)");
  }
  if (!(alpha > 0.0 && alpha < 0.5)) {
    throw std::invalid_argument("solve_gamma2: alpha must lie in (0, 0.5)");
  }
  Gamma2Result r;
  r.x_star = x_star;
  r.alpha = alpha;
  r.h_star = 0.5 * (1.0 + x_star);
  r.upper_mass = r.h_star - x_star;  // = (1 - x*) / 2
  r.tau = 2.0 * r.h_star * (r.h_star - x_star);

  const double f = r.upper_mass;
  const double shared = x_star + (1.0 - x_star - f);  // congestion on the
  // shared link; equals h* for the half split
  // boundary agent h*: upper h*(1+f) vs lower h* * shared + tau
  r.boundary_residual =
      std::abs(r.h_star * (1.0 + f) - (r.h_star * shared + r.tau));

  // baseline (zero tolls, no income effect): everyone on the lower chain,
  // shared congestion 1, money cost x -> q0 = (1 - alpha) x
  r.gini_baseline = segment_gini({{0.0, 1.0 - alpha, 1.0}});
  r.gini_d2_baseline =
      segment_gini({{x_star * (1.0 - alpha), 1.0 - alpha, 1.0}});

  // tolled, income-aware equilibrium:
  //   D1 (x <= x*):          cost x * shared
  //   D2 upper (x*, h*]:     cost x (1 + f)
  //   D2 lower (h*, 1]:      cost x * shared + tau
  const double k1 = 1.0 - alpha * shared;
  const double ku = 1.0 - alpha * (1.0 + f);
  const std::vector<ValueSegment> post{
      {0.0, x_star * k1, x_star},
      {x_star * ku, r.h_star * ku, r.h_star - x_star},
      {r.h_star * k1 - alpha * r.tau, k1 - alpha * r.tau, 1.0 - r.h_star},
  };
  r.gini_ex_post = segment_gini(post);
  r.gini_d2_ex_post = segment_gini({
      {x_star * ku, r.h_star * ku, (r.h_star - x_star) / (1.0 - x_star)},
      {r.h_star * k1 - alpha * r.tau, k1 - alpha * r.tau,
       (1.0 - r.h_star) / (1.0 - x_star)},
  });
  return r;
}

inline std::vector<double> default_gamma2_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 17; ++i) grid.push_back(0.1 + 0.05 * i);
  return grid;
}

inline std::vector<Gamma2Result> gamma2_sweep(const std::vector<double>& grid,
                                              double alpha = 0.01) {
  std::vector<Gamma2Result> rows;
  rows.reserve(grid.size());
  for (double x : grid) rows.push_back(solve_gamma2(x, alpha));
  return rows;
}

}  // namespace iniquity
