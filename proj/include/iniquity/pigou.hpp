#pragma once

#include <cmath>
#include <stdexcept>

#include "iniquity/game.hpp"
#include "iniquity/income.hpp"
#include "iniquity/quadrature.hpp"

// Closed forms for the two-link Pigou network (latencies 1 and z) with
// income q(x) = (beta+1) x^beta, used as ground truth for the numeric
// pipeline.  The switching point c is the mass of the poorest agents on the
// constant link; tolls and switching points are interchangeable through
// tau = q(c) * c.

namespace iniquity {

inline ParallelNetwork pigou_network(double lower_toll) {
  return ParallelNetwork({{LatencyFunction::constant(1.0), 0.0},
                          {LatencyFunction::linear(1.0, 0.0), lower_toll}});
}

// q(x) = (beta+1) x^beta, normalized so that the mean income is 1.
inline QuantileFunction pigou_income(double beta) {
  return QuantileFunction::power_law(beta, beta + 1.0);
}

// Equilibrium toll difference supporting switching point c: tau = q(c) * c.
inline double toll_for_switchpoint(const QuantileFunction& q, double c) {
  if (!(c >= 0.0 && c <= 1.0)) {
    throw std::invalid_argument("toll_for_switchpoint: c must lie in [0, 1]");
  }
  return q(c) * c;
}

// The toll minimizing actual latency (c = 1/2) for the mean-one income
// q(x) = (beta+1) x^beta ...
inline double pigou_optimal_toll(double beta) {
  return (beta + 1.0) * std::pow(2.0, -(beta + 1.0));
}

// ... and for the unnormalized income q(x) = x^beta.  The two are related
// by scale invariance: scaling income by lambda scales the optimal toll by
// lambda (here lambda = beta + 1).
inline double pigou_optimal_toll_unscaled(double beta) {
  return std::pow(2.0, -(beta + 1.0));
}

// Social cost (total money cost) as a function of the switching point, for
// q(x) = 2x: 1 - c + 2c^2 - c^3.  Minimum 23/27 at c = 1/3.
inline double social_cost_curve(double c) {
  return 1.0 - c + 2.0 * c * c - c * c * c;
}

// Actual latency (time wasted) as a function of the switching point, for
// any income distribution: c + (1-c)^2.  Minimum 3/4 at c = 1/2.
inline double actual_latency_curve(double c) {
  return c + (1.0 - c) * (1.0 - c);
}

// Perceived latency (time plus toll over income) for q(x) = 2x:
// 1 - c + c^2 - c^2 ln c, extended by its limit 1 at c = 0.
inline double perceived_latency_cf1_curve(double c) {
  if (!(c >= 0.0 && c <= 1.0)) {
    throw std::invalid_argument("perceived_latency_cf1_curve: c must lie in [0, 1]");
  }
  if (c == 0.0) return 1.0;
  return 1.0 - c + c * c - c * c * std::log(c);
}

// d G(alpha)/d alpha at alpha = 0 under the latency-minimizing toll:
// beta (beta+1) / ((beta+2) 2^(beta+3)).
inline double iniquity_closed_form(double beta) {
  if (!(beta >= 0.0)) {
    throw std::invalid_argument("iniquity_closed_form: beta must be >= 0");
  }
  return beta * (beta + 1.0) /
         ((beta + 2.0) * std::pow(2.0, beta + 3.0));
}

// Maximizer of the closed form on [0, 10]; lands near 1.688.
inline double iniquity_argmax() {
  return golden_section_max([](double b) { return iniquity_closed_form(b); },
                            0.0, 10.0, 1e-6);
}

struct GiniExpansion {
  double exact = 0.0;   // G(alpha) at the latency-minimizing toll
  double linear = 0.0;  // two-term Maclaurin form G(0) + G'(0) alpha
};

// Post-game Gini for q(x) = (beta+1) x^beta with the latency-minimizing
// toll, as an exact rational function of alpha:
//   G(alpha) = 1 - 2 (A - alpha B) / (mu - alpha C)
// with A, B, C evaluated in closed form at c = 1/2 (s = 2^-(beta+1)):
//   mu = 1,  A = 1/(beta+2),  C = 1/2 + s (beta+2)/2,
//   B = s (beta+3) / (4 (beta+2)) + 1/(2 (beta+2)) + (beta+1) s / 8.
inline GiniExpansion gini_expansion(double beta, double alpha) {
  if (!(beta >= 0.0)) {
    throw std::invalid_argument("gini_expansion: beta must be >= 0");
  }
  const double s = std::pow(2.0, -(beta + 1.0));
  const double a_int = 1.0 / (beta + 2.0);
  const double c_int = 0.5 + 0.5 * s * (beta + 2.0);
  const double b_int = s * (beta + 3.0) / (4.0 * (beta + 2.0)) +
                       0.5 / (beta + 2.0) + (beta + 1.0) * s / 8.0;
  const double denom = 1.0 - alpha * c_int;
  if (denom == 0.0) {
    throw std::domain_error("gini_expansion: alpha makes the mean vanish");
  }
  GiniExpansion g;
  g.exact = 1.0 - 2.0 * (a_int - alpha * b_int) / denom;
  g.linear = beta / (beta + 2.0) + iniquity_closed_form(beta) * alpha;
  return g;
}

}  // namespace iniquity
