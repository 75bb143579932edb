#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "iniquity/game.hpp"
#include "iniquity/income.hpp"

// Repeated play with no-regret dynamics.  A population with finitely many
// income levels turns the income-typed game into an ordinary congestion
// game: each link e acquires one constant-cost auxiliary edge per level i
// carrying tau_e / w_i, so the reduced path cost l_e(z) + tau_e / w_i equals
// the CF1 cost of the original game exactly.  Every level then runs
// multiplicative weights over its own paths.

namespace iniquity {

struct LeveledPopulation {
  std::vector<double> incomes;  // strictly increasing, positive
  std::vector<double> masses;   // positive, summing to 1

  void validate() const {
    if (incomes.empty() || incomes.size() != masses.size()) {
      throw std::invalid_argument("LeveledPopulation: mismatched or empty levels");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < incomes.size(); ++i) {
      if (!(incomes[i] > 0.0)) {
        throw std::invalid_argument("LeveledPopulation: incomes must be positive");
      }
      if (i > 0 && incomes[i] <= incomes[i - 1]) {
        throw std::invalid_argument("LeveledPopulation: incomes must increase");
      }
      if (!(masses[i] > 0.0)) {
        throw std::invalid_argument("LeveledPopulation: masses must be positive");
      }
      total += masses[i];
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("LeveledPopulation: masses must sum to 1");
    }
  }
};

// Equal-mass midpoint discretization of a quantile function.
inline LeveledPopulation levels_from_quantile(const QuantileFunction& q,
                                              int levels) {
  if (levels < 1) throw std::invalid_argument("levels_from_quantile: levels < 1");
  LeveledPopulation pop;
  for (int i = 0; i < levels; ++i) {
    pop.incomes.push_back(q((i + 0.5) / levels));
    pop.masses.push_back(1.0 / levels);
  }
  pop.validate();
  return pop;
}

class ReducedGame {
 public:
  ReducedGame(ParallelNetwork net, LeveledPopulation pop)
      : net_(std::move(net)), pop_(std::move(pop)) {
    pop_.validate();
    aux_.resize(pop_.incomes.size());
    for (std::size_t i = 0; i < pop_.incomes.size(); ++i) {
      aux_[i].resize(net_.size());
      for (std::size_t e = 0; e < net_.size(); ++e) {
        aux_[i][e] = net_.links()[e].toll / pop_.incomes[i];
      }
    }
  }

  std::size_t num_levels() const { return pop_.incomes.size(); }
  std::size_t num_paths() const { return net_.size(); }
  const ParallelNetwork& network() const { return net_; }
  const LeveledPopulation& population() const { return pop_; }

  // constant cost of the auxiliary edge for (level, link)
  double aux_cost(std::size_t level, std::size_t link) const {
    return aux_[level][link];
  }

  // full reduced path cost at congestion z on the link
  double path_cost(std::size_t level, std::size_t link, double z) const {
    return net_.links()[link].latency(z) + aux_[level][link];
  }

 private:
  ParallelNetwork net_;
  LeveledPopulation pop_;
  std::vector<std::vector<double>> aux_;
};

// Builds the reduction and verifies payoff equivalence against the CF1
// agent cost on every (level, path) pair.
inline ReducedGame reduce(const ParallelNetwork& net,
                          const LeveledPopulation& pop) {
  ReducedGame g(net, pop);
  for (std::size_t i = 0; i < g.num_levels(); ++i) {
    for (std::size_t e = 0; e < g.num_paths(); ++e) {
      for (double z : {0.0, 0.25, 0.5, 1.0}) {
        const double reduced = g.path_cost(i, e, z);
        const double direct = agent_cost(CostModel::kCF1, pop.incomes[i],
                                         net.links()[e].latency(z),
                                         net.links()[e].toll);
        if (std::abs(reduced - direct) > 1e-14) {
          throw std::logic_error("reduce: payoff equivalence violated");
        }
      }
    }
  }
  return g;
}

inline ReducedGame reduce(const ParallelNetwork& net,
                          const LeveledPopulation& pop,
                          const std::vector<double>& tolls) {
  if (tolls.size() != net.size()) {
    throw std::invalid_argument("reduce: toll override size mismatch");
  }
  auto links = net.links();
  for (std::size_t e = 0; e < links.size(); ++e) links[e].toll = tolls[e];
  return reduce(ParallelNetwork(std::move(links)), pop);
}

struct Trajectory {
  double alpha = 0.0;
  std::vector<std::vector<double>> regret;  // [round][level], running average
  std::vector<double> inst_gini;            // per-round ex-post Gini
  std::vector<double> avg_gini;             // running time average
  std::vector<double> eps_ne;               // per-round aggregate deviation gain
  std::vector<std::vector<double>> final_mix;  // [level][path]
  std::vector<double> final_flow;              // per-link congestion
  int clipped_rounds = 0;
};

using StepSchedule = std::function<double(int round, int num_paths)>;

inline double default_step(int round, int num_paths) {
  return std::sqrt(8.0 * std::log(static_cast<double>(num_paths)) /
                   static_cast<double>(round));
}

// Multiplicative-weights dynamics: every level updates a mixed strategy
// over its paths with the anytime schedule eta_t (losses scaled into [0, 1]
// by the level's worst-case path cost).  With grains_per_level > 0 each
// level is carried by that many atoms sampling paths from the mixed
// strategy (seeded), which adds stochastic noise; the default is the exact
// nonatomic mass dynamic.
//
// Per-round records: population regret per level against the best fixed
// path in hindsight, the ex-post income Gini of the fractional assignment
// (incomes w_i - alpha * cf1-cost, clipped at zero if needed), and the
// aggregate deviation gain (the epsilon of the round's flow).
inline Trajectory run_no_regret(const ReducedGame& game, int rounds,
                                double alpha = 0.01,
                                const StepSchedule& schedule = default_step,
                                int grains_per_level = 0, unsigned seed = 0) {
  if (rounds < 1) throw std::invalid_argument("run_no_regret: rounds < 1");
  for (const auto& link : game.network().links()) {
    if (!link.latency.has_bounded_slope()) {
      throw std::invalid_argument("run_no_regret: latency slope must be bounded");
    }
  }
  const std::size_t levels = game.num_levels();
  const std::size_t paths = game.num_paths();
  const auto& pop = game.population();

  std::vector<double> range(levels, 0.0);
  for (std::size_t i = 0; i < levels; ++i) {
    for (std::size_t e = 0; e < paths; ++e) {
      range[i] = std::max(range[i], game.path_cost(i, e, 1.0));
    }
    range[i] = std::max(range[i], 1e-12);
  }

  std::vector<std::vector<double>> weights(
      levels, std::vector<double>(paths, 1.0 / static_cast<double>(paths)));
  std::vector<std::vector<double>> cum_path_cost(
      levels, std::vector<double>(paths, 0.0));
  std::vector<double> cum_realized(levels, 0.0);

  std::mt19937_64 rng(seed);
  Trajectory traj;
  traj.alpha = alpha;
  traj.regret.reserve(static_cast<std::size_t>(rounds));
  double gini_sum = 0.0;

  std::vector<std::vector<double>> mix = weights;
  for (int t = 1; t <= rounds; ++t) {
    // mixed strategies for the round
    for (std::size_t i = 0; i < levels; ++i) {
      double norm = 0.0;
      for (double w : weights[i]) norm += w;
      for (std::size_t e = 0; e < paths; ++e) mix[i][e] = weights[i][e] / norm;
    }
    std::vector<std::vector<double>> share = mix;  // mass fractions per path
    if (grains_per_level > 0) {
      for (std::size_t i = 0; i < levels; ++i) {
        std::vector<int> counts(paths, 0);
        std::discrete_distribution<int> pick(mix[i].begin(), mix[i].end());
        for (int g = 0; g < grains_per_level; ++g) ++counts[static_cast<std::size_t>(pick(rng))];
        for (std::size_t e = 0; e < paths; ++e) {
          share[i][e] = static_cast<double>(counts[e]) / grains_per_level;
        }
      }
    }

    std::vector<double> flow(paths, 0.0);
    for (std::size_t i = 0; i < levels; ++i) {
      for (std::size_t e = 0; e < paths; ++e) {
        flow[e] += pop.masses[i] * share[i][e];
      }
    }

    std::vector<std::vector<double>> cost(levels, std::vector<double>(paths));
    for (std::size_t i = 0; i < levels; ++i) {
      for (std::size_t e = 0; e < paths; ++e) {
        cost[i][e] = game.path_cost(i, e, flow[e]);
      }
    }

    // bookkeeping: regret, epsilon, gini
    std::vector<double> round_regret(levels);
    double eps = 0.0;
    for (std::size_t i = 0; i < levels; ++i) {
      double realized = 0.0;
      double round_best = std::numeric_limits<double>::infinity();
      for (std::size_t e = 0; e < paths; ++e) {
        realized += share[i][e] * cost[i][e];
        cum_path_cost[i][e] += cost[i][e];
        round_best = std::min(round_best, cost[i][e]);
      }
      cum_realized[i] += realized;
      const double best_fixed =
          *std::min_element(cum_path_cost[i].begin(), cum_path_cost[i].end());
      round_regret[i] = (cum_realized[i] - best_fixed) / t;
      eps += pop.masses[i] * (realized - round_best);
    }
    traj.regret.push_back(round_regret);
    traj.eps_ne.push_back(eps);

    std::vector<double> values;
    std::vector<double> masses;
    bool clipped = false;
    for (std::size_t i = 0; i < levels; ++i) {
      for (std::size_t e = 0; e < paths; ++e) {
        if (share[i][e] <= 0.0) continue;
        double v = pop.incomes[i] - alpha * cost[i][e];
        if (v < 0.0) {
          v = 0.0;
          clipped = true;
        }
        values.push_back(v);
        masses.push_back(pop.masses[i] * share[i][e]);
      }
    }
    if (clipped) ++traj.clipped_rounds;
    const double g = gini_weighted(values, masses);
    gini_sum += g;
    traj.inst_gini.push_back(g);
    traj.avg_gini.push_back(gini_sum / t);

    // multiplicative-weights update on range-normalized losses
    const double eta = schedule(t, static_cast<int>(paths));
    for (std::size_t i = 0; i < levels; ++i) {
      for (std::size_t e = 0; e < paths; ++e) {
        weights[i][e] *= std::exp(-eta * cost[i][e] / range[i]);
      }
      const double norm =
          std::accumulate(weights[i].begin(), weights[i].end(), 0.0);
      for (std::size_t e = 0; e < paths; ++e) weights[i][e] /= norm;
    }

    if (t == rounds) {
      traj.final_mix = share;
      traj.final_flow = flow;
    }
  }
  return traj;
}

struct ConvergenceReport {
  bool applicable = false;  // enough rounds to assert anything
  double gini_gap = 0.0;    // |time-averaged Gini - equilibrium Gini|
  bool gini_within = false;
  std::vector<double> final_regret;
  double max_final_regret = 0.0;
  // fraction of rounds whose aggregate deviation gain exceeds the median
  // epsilon, over the first and second halves of the run
  double early_noneq_fraction = 0.0;
  double late_noneq_fraction = 0.0;
};

inline ConvergenceReport check_convergence(const Trajectory& traj,
                                           double equilibrium_gini,
                                           double eps) {
  ConvergenceReport rep;
  const auto rounds = traj.avg_gini.size();
  if (rounds == 0) return rep;
  rep.gini_gap = std::abs(traj.avg_gini.back() - equilibrium_gini);
  rep.gini_within = rep.gini_gap <= eps;
  rep.final_regret = traj.regret.back();
  for (double r : rep.final_regret) {
    rep.max_final_regret = std::max(rep.max_final_regret, r);
  }
  rep.applicable = rounds >= 100;
  if (rep.applicable) {
    std::vector<double> sorted = traj.eps_ne;
    std::sort(sorted.begin(), sorted.end());
    const double threshold = sorted[sorted.size() / 2];
    const std::size_t half = rounds / 2;
    std::size_t early = 0, late = 0;
    for (std::size_t t = 0; t < rounds; ++t) {
      if (traj.eps_ne[t] > threshold) {
        (t < half ? early : late) += 1;
      }
    }
    rep.early_noneq_fraction = static_cast<double>(early) / half;
    rep.late_noneq_fraction = static_cast<double>(late) / (rounds - half);
  }
  return rep;
}

}  // namespace iniquity
