#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "iniquity/income.hpp"
#include "iniquity/quadrature.hpp"

namespace iniquity {

// Nonnegative, nondecreasing latency on [0, 1].
class LatencyFunction {
 public:
  enum class Kind { kConstant, kLinear, kPolynomial, kPiecewiseConstant };

  static LatencyFunction constant(double c) {
    require(c >= 0.0 && std::isfinite(c), "constant latency must be >= 0");
    LatencyFunction l;
    l.kind_ = Kind::kConstant;
    l.coeffs_ = {c};
    return l;
  }

  static LatencyFunction linear(double a, double b) {
    require(a >= 0.0 && b >= 0.0 && std::isfinite(a) && std::isfinite(b),
            "linear latency a*z + b needs a, b >= 0");
    LatencyFunction l;
    l.kind_ = Kind::kLinear;
    l.coeffs_ = {b, a};
    return l;
  }

  static LatencyFunction polynomial(std::vector<double> coeffs) {
    require(!coeffs.empty(), "polynomial latency needs coefficients");
    for (double c : coeffs) {
      require(c >= 0.0 && std::isfinite(c),
              "polynomial latency needs nonnegative coefficients");
    }
    LatencyFunction l;
    l.kind_ = Kind::kPolynomial;
    l.coeffs_ = std::move(coeffs);
    return l;
  }

  // Step latency with breaks at multiples of 1/n: level[j] applies on
  // ((j)/n, (j+1)/n]; levels are integer-valued and nondecreasing.
  static LatencyFunction piecewise_constant(std::vector<int> levels) {
    require(!levels.empty(), "step latency needs at least one level");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      require(levels[i] >= 0, "step latency levels must be >= 0");
      if (i > 0) require(levels[i] >= levels[i - 1], "step latency must be nondecreasing");
    }
    LatencyFunction l;
    l.kind_ = Kind::kPiecewiseConstant;
    l.levels_ = std::move(levels);
    return l;
  }

  double operator()(double z) const {
    switch (kind_) {
      case Kind::kConstant:
        return coeffs_[0];
      case Kind::kLinear:
        return coeffs_[0] + coeffs_[1] * z;
      case Kind::kPolynomial: {
        double acc = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
          acc = acc * z + *it;
        }
        return acc;
      }
      case Kind::kPiecewiseConstant: {
        const auto n = static_cast<double>(levels_.size());
        auto j = static_cast<long>(std::ceil(z * n));
        j = std::clamp<long>(j, 1, static_cast<long>(levels_.size()));
        return static_cast<double>(levels_[static_cast<std::size_t>(j - 1)]);
      }
    }
    return 0.0;  // unreachable
  }

  // Largest slope on [0, 1]; infinite for step latencies.
  double max_slope() const {
    switch (kind_) {
      case Kind::kConstant:
        return 0.0;
      case Kind::kLinear:
        return coeffs_[1];
      case Kind::kPolynomial: {
        double acc = 0.0;  // derivative coefficients are nonnegative, max at z = 1
        for (std::size_t i = 1; i < coeffs_.size(); ++i) {
          acc += static_cast<double>(i) * coeffs_[i];
        }
        return acc;
      }
      case Kind::kPiecewiseConstant: {
        bool flat = true;
        for (std::size_t i = 1; i < levels_.size(); ++i) {
          if (levels_[i] != levels_[0]) flat = false;
        }
        return flat ? 0.0 : std::numeric_limits<double>::infinity();
      }
    }
    return 0.0;
  }

  bool has_bounded_slope() const { return std::isfinite(max_slope()); }

  Kind kind() const { return kind_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  const std::vector<int>& levels() const { return levels_; }

 private:
  static void require(bool ok, const char* msg) {
    if (!ok) throw std::invalid_argument(msg);
  }

  Kind kind_ = Kind::kConstant;
  std::vector<double> coeffs_;  // constant: {c}; linear: {b, a}; polynomial: ascending
  std::vector<int> levels_;
};

struct Link {
  LatencyFunction latency;
  double toll = 0.0;
};

class ParallelNetwork {
 public:
  explicit ParallelNetwork(std::vector<Link> links) : links_(std::move(links)) {
    if (links_.size() < 2) {
      throw std::invalid_argument("ParallelNetwork: need at least 2 links");
    }
    for (const auto& l : links_) {
      if (!(l.toll >= 0.0) || !std::isfinite(l.toll)) {
        throw std::invalid_argument("ParallelNetwork: tolls must be finite and >= 0");
      }
    }
  }

  const std::vector<Link>& links() const { return links_; }
  std::size_t size() const { return links_.size(); }

  ParallelNetwork with_scaled_tolls(double lambda) const {
    auto ls = links_;
    for (auto& l : ls) l.toll *= lambda;
    return ParallelNetwork(std::move(ls));
  }

 private:
  std::vector<Link> links_;
};

// The three agent-cost shapes over the canonical edge form
// f_e(q, z, tau) = tau/q + l(z):
//   CF1        cost = tau/q + l          (time units)
//   CF2        cost = q * (tau/q + l)    ( = tau + q l, money units)
//   Canonical  cost = q l + tau          (money units; identical to CF2 here)
enum class CostModel { kCF1, kCF2, kCanonical };

inline const char* to_string(CostModel m) {
  switch (m) {
    case CostModel::kCF1: return "cf1";
    case CostModel::kCF2: return "cf2";
    case CostModel::kCanonical: return "canonical";
  }
  return "?";
}

inline double agent_cost(CostModel model, double income, double path_latency,
                         double toll) {
  switch (model) {
    case CostModel::kCanonical:
    case CostModel::kCF2:
      return income * path_latency + toll;
    case CostModel::kCF1:
      if (toll == 0.0) return path_latency;  // no division by income needed
      if (!(income > 0.0)) {
        throw std::domain_error("agent_cost: CF1 divides a toll by zero income");
      }
      return toll / income + path_latency;
  }
  return 0.0;  // unreachable
}

// A finitary flow: breakpoints 0 = b0 < b1 < ... < bk = 1, with interval
// (b_i, b_{i+1}] mapped to one link; x = 0 joins the first interval.
struct Flow {
  std::vector<double> breakpoints;
  std::vector<int> link_of_interval;

  void validate(std::size_t num_links) const {
    if (breakpoints.size() < 2 || breakpoints.front() != 0.0 ||
        breakpoints.back() != 1.0) {
      throw std::invalid_argument("Flow: breakpoints must run from 0 to 1");
    }
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
      if (!(breakpoints[i] > breakpoints[i - 1])) {
        throw std::invalid_argument("Flow: breakpoints must strictly increase");
      }
    }
    if (link_of_interval.size() + 1 != breakpoints.size()) {
      throw std::invalid_argument("Flow: one link per interval required");
    }
    for (int e : link_of_interval) {
      if (e < 0 || static_cast<std::size_t>(e) >= num_links) {
        throw std::invalid_argument("Flow: link index out of range");
      }
    }
  }

  int link_at(double x) const {
    // interval (b_i, b_{i+1}]; x <= b_1 goes to the first interval
    auto it = std::lower_bound(breakpoints.begin() + 1, breakpoints.end() - 1, x);
    return link_of_interval[static_cast<std::size_t>(it - breakpoints.begin() - 1)];
  }

  std::vector<double> congestion(std::size_t num_links) const {
    std::vector<double> c(num_links, 0.0);
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
      c[static_cast<std::size_t>(link_of_interval[i])] +=
          breakpoints[i + 1] - breakpoints[i];
    }
    return c;
  }
};

struct EquilibriumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EquilibriumResult {
  Flow flow;
  CostModel model = CostModel::kCanonical;
  std::vector<double> congestion;        // per link, sums to 1
  std::vector<double> boundary_incomes;  // q at interior breakpoints
  std::vector<double> link_latency;      // l_e(c_e) per link
  std::vector<double> cost_knots;        // breakpoints + income knots, interior
  std::function<double(double)> cost;       // cost^F(x) in the requested model
  std::function<double(double)> edge_cost;  // l + tau/q, nonincreasing in x
  double social_cost = 0.0;              // integral of cost^F
  double actual_latency_total = 0.0;     // integral of the latency alone
  double toll_revenue = 0.0;
  double worst_boundary_residual = 0.0;
  double worst_deviation_gain = 0.0;
  int solver_sweeps = 0;
};

inline double social_cost(const EquilibriumResult& r) { return r.social_cost; }
inline double actual_latency_total(const EquilibriumResult& r) {
  return r.actual_latency_total;
}

namespace detail {

// Builds a full result (cost evaluators, integrals, diagnostics) from a
// given flow, without any equilibrium assumption.
inline EquilibriumResult build_result(const ParallelNetwork& net,
                                      const QuantileFunction& q, CostModel model,
                                      Flow flow, double quad_tol = 1e-12) {
  flow.validate(net.size());
  EquilibriumResult r;
  r.model = model;
  r.congestion = flow.congestion(net.size());
  r.link_latency.resize(net.size());
  for (std::size_t e = 0; e < net.size(); ++e) {
    r.link_latency[e] = net.links()[e].latency(r.congestion[e]);
    r.toll_revenue += r.congestion[e] * net.links()[e].toll;
    r.actual_latency_total += r.congestion[e] * r.link_latency[e];
  }
  for (std::size_t i = 1; i + 1 < flow.breakpoints.size(); ++i) {
    r.boundary_incomes.push_back(q(flow.breakpoints[i]));
  }

  std::vector<double> knots = q.interior_knots();
  knots.insert(knots.end(), flow.breakpoints.begin() + 1, flow.breakpoints.end() - 1);
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  r.cost_knots = knots;

  const auto links = net.links();
  const auto latency = r.link_latency;
  auto fl = flow;
  r.cost = [links, latency, fl, q, model](double x) {
    const int e = fl.link_at(x);
    return agent_cost(model, q(x), latency[static_cast<std::size_t>(e)],
                      links[static_cast<std::size_t>(e)].toll);
  };
  r.edge_cost = [links, latency, fl, q](double x) {
    const int e = fl.link_at(x);
    return agent_cost(CostModel::kCF1, q(x), latency[static_cast<std::size_t>(e)],
                      links[static_cast<std::size_t>(e)].toll);
  };
  r.flow = std::move(fl);
  r.social_cost =
      integrate_with_knots(r.cost, 0.0, 1.0, r.cost_knots, quad_tol);
  return r;
}

// Cost of using link e at its current congestion, for income qx, in money
// units (the canonical comparison; equivalent ordering to CF1 for qx > 0).
inline double money_cost(const Link& link, double latency_value, double qx) {
  return qx * latency_value + link.toll;
}

struct ChainCandidate {
  std::vector<int> order;            // link indices, poorest first
  std::vector<double> breakpoints;   // 0, a_1, ..., 1
  int sweeps = 0;
};

// Worst deviation gain over sample points for a candidate flow; gains are
// measured in the canonical money units.
inline double worst_gain(const ParallelNetwork& net, const QuantileFunction& q,
                         const std::vector<double>& latency,
                         const Flow& flow) {
  std::vector<double> xs;
  const int strata = 64;
  for (int j = 0; j < strata; ++j) xs.push_back((j + 0.5) / strata);
  for (std::size_t i = 0; i + 1 < flow.breakpoints.size(); ++i) {
    const double a = flow.breakpoints[i], b = flow.breakpoints[i + 1];
    xs.push_back(0.5 * (a + b));
    xs.push_back(std::min(b, a + 1e-9 * (b - a) + 1e-15));
    xs.push_back(b);
  }
  for (double k : q.interior_knots()) {
    if (k > 0.0 && k < 1.0) xs.push_back(k);
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (double x : xs) {
    const double qx = q(x);
    const auto e = static_cast<std::size_t>(flow.link_at(x));
    const double own = money_cost(net.links()[e], latency[e], qx);
    double best = own;
    for (std::size_t a = 0; a < net.size(); ++a) {
      if (a == e) continue;
      best = std::min(best, money_cost(net.links()[a], latency[a], qx));
    }
    worst = std::max(worst, own - best);
  }
  return worst;
}

}  // namespace detail

// Evaluates an arbitrary flow (no equilibrium requirement): congestion,
// cost evaluators, social cost, diagnostics.
inline EquilibriumResult evaluate_flow(const ParallelNetwork& net,
                                       const QuantileFunction& q,
                                       CostModel model, Flow flow) {
  auto r = detail::build_result(net, q, model, std::move(flow));
  r.worst_deviation_gain =
      detail::worst_gain(net, q, r.link_latency, r.flow);
  return r;
}

// Wardrop equilibrium on parallel links for an income-heterogeneous
// population.  At equilibrium the used links, ordered poorest to richest
// user, have nonincreasing latency and nondecreasing toll; each interior
// breakpoint is a sign change of the boundary indifference residual
//   r_k(a) = q(a) * (l_left(c_left) - l_right(c_right)) - (toll_right - toll_left).
// For continuous income the residual vanishes at the breakpoint; for step
// income the crossing may sit at a cell edge with a nonzero jump, which is
// still an equilibrium (no interior agent gains by switching).
//
// Candidate used-link subsets are tried smallest-first in index order, each
// ordered by (toll, index); the first candidate whose flow survives the
// deviation check is returned.  CF1 and CF2/canonical admit the same flows
// (CF1 costs are the canonical ones divided by income), so the flow is
// always solved in money units and only the cost evaluators differ.
inline EquilibriumResult equilibrium_parallel(const ParallelNetwork& net,
                                              const QuantileFunction& q,
                                              CostModel model) {
  const std::size_t K = net.size();
  const double gain_tol = 1e-10;
  const int max_sweeps = 100000;

  double best_failed_gain = std::numeric_limits<double>::infinity();

  // subsets enumerated by size then lexicographically
  std::vector<std::vector<int>> subsets;
  for (std::size_t size = 1; size <= K; ++size) {
    std::vector<int> idx(size);
    std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int start) {
      if (pos == size) {
        subsets.push_back(idx);
        return;
      }
      for (int e = start; e < static_cast<int>(K); ++e) {
        idx[pos] = e;
        rec(pos + 1, e + 1);
      }
    };
    rec(0, 0);
  }

  for (auto order : subsets) {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return net.links()[static_cast<std::size_t>(a)].toll <
             net.links()[static_cast<std::size_t>(b)].toll;
    });
    const std::size_t m = order.size();
    std::vector<double> a(m + 1);
    a.front() = 0.0;
    a.back() = 1.0;
    for (std::size_t k = 1; k < m; ++k) {
      a[k] = static_cast<double>(k) / static_cast<double>(m);
    }

    const auto residual = [&](std::size_t k, double ak) {
      const auto& left = net.links()[static_cast<std::size_t>(order[k - 1])];
      const auto& right = net.links()[static_cast<std::size_t>(order[k])];
      const double ll = left.latency(ak - a[k - 1]);
      const double lr = right.latency(a[k + 1] - ak);
      return q(ak) * (ll - lr) - (right.toll - left.toll);
    };

    int sweeps = 0;
    if (m > 1) {
      bool converged = false;
      for (; sweeps < max_sweeps && !converged; ++sweeps) {
        double max_move = 0.0;
        for (std::size_t k = 1; k < m; ++k) {
          const double target = bisect_sign_change(
              [&](double x) { return residual(k, x); }, a[k - 1], a[k + 1]);
          const double next = a[k] + 0.5 * (target - a[k]);
          max_move = std::max(max_move, std::abs(next - a[k]));
          a[k] = next;
        }
        converged = max_move <= 1e-16;
      }
      // undamped final polish so two-link instances land on the exact root
      for (std::size_t k = 1; k < m; ++k) {
        a[k] = bisect_sign_change([&](double x) { return residual(k, x); },
                                  a[k - 1], a[k + 1]);
      }
    }

    // reject collapsed intervals: a smaller subset covers that equilibrium
    bool collapsed = false;
    for (std::size_t k = 0; k < m; ++k) {
      if (a[k + 1] - a[k] < 1e-9) collapsed = true;
    }
    if (collapsed) continue;

    Flow flow;
    flow.breakpoints = a;
    flow.link_of_interval = order;
    std::vector<double> latency(K);
    const auto congestion = flow.congestion(K);
    for (std::size_t e = 0; e < K; ++e) {
      latency[e] = net.links()[e].latency(congestion[e]);
    }
    const double gain = detail::worst_gain(net, q, latency, flow);
    double cost_scale = 1.0;
    for (std::size_t e = 0; e < K; ++e) {
      cost_scale = std::max(cost_scale, std::abs(q(1.0) * latency[e] +
                                                 net.links()[e].toll));
    }
    if (gain <= gain_tol * cost_scale) {
      auto r = detail::build_result(net, q, model, std::move(flow));
      r.worst_deviation_gain = gain;
      r.solver_sweeps = sweeps;
      double worst_res = 0.0;
      if (q.interior_knots().empty()) {  // continuous income: residual applies
        for (std::size_t k = 1; k < m; ++k) {
          worst_res = std::max(worst_res, std::abs(residual(k, a[k])));
        }
      }
      r.worst_boundary_residual = worst_res;
      return r;
    }
    best_failed_gain = std::min(best_failed_gain, gain);
  }

  throw EquilibriumError(
      "equilibrium_parallel: no used-link subset passed the deviation check; "
      "best residual gain = " +
      std::to_string(best_failed_gain));
}

struct VerificationReport {
  bool ok = false;
  double worst_gain = 0.0;
  double worst_x = 0.0;
};

// Checks the Wardrop condition on stratified income samples: assigned-link
// cost must not exceed any alternative by more than tol.
inline VerificationReport verify_equilibrium(const EquilibriumResult& result,
                                             const ParallelNetwork& net,
                                             const QuantileFunction& q,
                                             CostModel model, int samples,
                                             double tol) {
  VerificationReport rep;
  rep.worst_gain = -std::numeric_limits<double>::infinity();
  std::vector<double> xs;
  for (int j = 0; j < samples; ++j) {
    xs.push_back((j + 0.5) / samples);
  }
  const auto& bps = result.flow.breakpoints;
  for (std::size_t i = 0; i + 1 < bps.size(); ++i) {
    xs.push_back(0.5 * (bps[i] + bps[i + 1]));
    xs.push_back(bps[i + 1]);
  }
  for (double x : xs) {
    const double qx = q(x);
    const auto e = static_cast<std::size_t>(result.flow.link_at(x));
    const double own = agent_cost(model, qx, result.link_latency[e],
                                  net.links()[e].toll);
    for (std::size_t alt = 0; alt < net.size(); ++alt) {
      if (alt == e) continue;
      double alt_cost;
      try {
        alt_cost = agent_cost(model, qx, result.link_latency[alt],
                              net.links()[alt].toll);
      } catch (const std::domain_error&) {
        continue;  // CF1 alternative with zero income: infinitely costly
      }
      const double gain = own - alt_cost;
      if (gain > rep.worst_gain) {
        rep.worst_gain = gain;
        rep.worst_x = x;
      }
    }
  }
  rep.ok = rep.worst_gain <= tol;
  return rep;
}

// Ex-post income distribution x -> q(x) - alpha * cost^F(x).  Verified
// nondecreasing and positive; violations mean alpha is too large for this
// instance (or, for CF1, that the poorest agents carry an unbounded cost).
inline QuantileFunction ex_post(const QuantileFunction& q,
                                const EquilibriumResult& result, double alpha,
                                CostModel model) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("ex_post: alpha must be finite and >= 0");
  }
  if (model != result.model) {
    throw std::invalid_argument("ex_post: cost model differs from the solved result");
  }
  auto cost = result.cost;
  auto eval = [q, cost, alpha](double x) { return q(x) - alpha * cost(x); };

  // order preservation and positivity, sampled on a knot-aware grid
  std::vector<double> grid;
  std::vector<double> cuts = result.cost_knots;
  cuts.insert(cuts.begin(), 0.0);
  cuts.push_back(1.0);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b <= a) continue;
    const int pts = 64;
    grid.push_back(a == 0.0 ? 0.0 : a + 1e-12 * (b - a));
    for (int j = 1; j < pts; ++j) {
      grid.push_back(a + (b - a) * j / pts);
    }
    grid.push_back(b);
  }
  double prev = -std::numeric_limits<double>::infinity();
  double vmax = 0.0;
  for (double x : grid) {
    const double v = eval(x);
    vmax = std::max(vmax, std::abs(v));
    if (!(v > 0.0) && !(x == 0.0 && v >= -1e-15)) {
      throw std::domain_error(
          "ex_post: alpha too large, ex-post income becomes nonpositive");
    }
    if (v < prev - 1e-12 * std::max(1.0, vmax)) {
      throw std::domain_error(
          "ex_post: alpha too large, ex-post incomes are no longer ordered");
    }
    prev = std::max(prev, v);
  }
  return QuantileFunction::derived(std::move(eval), result.cost_knots);
}

}  // namespace iniquity
