#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "iniquity/income.hpp"

// Discrete efficiency-equality trade-off on parallel links: n income
// quantiles, K links with integer piecewise-constant delay tables, and a
// weight lambda on post-game inequality.  Minimizing
//   total delay + lambda * post-game Gini
// linearizes (for costs small against incomes) to
//   min sum_i alpha_i d_i + beta_i tau_i
// over equilibrium allocations: contiguous quantile blocks per link with
// delays nonincreasing and tolls nondecreasing in income.  Tolls are pinned
// by boundary indifference and normalized to zero on the poorest block.

namespace iniquity {

struct TradeoffInstance {
  std::vector<double> quantiles;             // q_1 <= ... <= q_n, positive
  std::vector<std::vector<int>> link_delays; // [link][load-1], integers >= 1
  double lambda = 0.0;

  std::size_t num_quantiles() const { return quantiles.size(); }
  std::size_t num_links() const { return link_delays.size(); }

  int delay(std::size_t link, std::size_t load) const {
    return link_delays[link][load - 1];
  }

  void validate() const {
    const std::size_t n = quantiles.size();
    if (n == 0) throw std::invalid_argument("tradeoff: needs quantiles");
    if (link_delays.empty()) throw std::invalid_argument("tradeoff: needs links");
    if (link_delays.size() > 16) {
      throw std::invalid_argument("tradeoff: more than 16 links unsupported");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw std::invalid_argument("tradeoff: lambda must be finite and >= 0");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!(quantiles[i] > 0.0)) {
        throw std::invalid_argument("tradeoff: quantiles must be positive");
      }
      if (i > 0 && quantiles[i] < quantiles[i - 1]) {
        throw std::invalid_argument("tradeoff: quantiles must be nondecreasing");
      }
    }
    for (const auto& table : link_delays) {
      if (table.size() != n) {
        throw std::invalid_argument("tradeoff: each delay table needs n entries");
      }
      for (std::size_t l = 0; l < n; ++l) {
        if (table[l] < 1) {
          throw std::invalid_argument("tradeoff: delays must be integers >= 1");
        }
        if (l > 0 && table[l] < table[l - 1]) {
          throw std::invalid_argument("tradeoff: delays must be nondecreasing in load");
        }
      }
    }
  }
};

struct ObjectiveWeights {
  std::vector<double> alpha;
  std::vector<double> beta;
};

// alpha_i = 1 + lambda' (n+1-i) q_i and beta_i = lambda' (n+1-i), with
// lambda' = 2 lambda / (n sum_j q_j): the exact linearization of
// total delay + lambda * Gini(q - delta) around delta = 0, dropping terms
// constant in the allocation.  The (n+1-i) weight counts how many Lorenz
// partial sums contain quantile i.
inline ObjectiveWeights derive_weights(const std::vector<double>& quantiles,
                                       double lambda) {
  const std::size_t n = quantiles.size();
  if (n == 0) throw std::invalid_argument("derive_weights: empty quantile list");
  if (!(lambda >= 0.0)) throw std::invalid_argument("derive_weights: lambda < 0");
  const double total = std::accumulate(quantiles.begin(), quantiles.end(), 0.0);
  if (!(total > 0.0)) throw std::invalid_argument("derive_weights: zero total income");
  const double lp = 2.0 * lambda / (static_cast<double>(n) * total);
  ObjectiveWeights w;
  w.alpha.resize(n);
  w.beta.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rank = static_cast<double>(n - i);  // n+1-i for 1-based i
    w.alpha[i] = 1.0 + lp * rank * quantiles[i];
    w.beta[i] = lp * rank;
  }
  return w;
}

struct AllocationBlock {
  int link = 0;
  int first = 0;  // 1-based quantile range, inclusive
  int last = 0;
  int delay = 0;
  double toll = 0.0;
};

struct Allocation {
  std::vector<AllocationBlock> blocks;  // poorest block first
  double objective = 0.0;
};

struct AllocationEvaluation {
  double objective = 0.0;
  double post_game_gini = 0.0;
  bool clipped = false;  // some post-game income fell below zero
  std::vector<double> post_incomes;
};

namespace detail {

inline void validate_allocation(const TradeoffInstance& inst,
                                const Allocation& alloc) {
  const int n = static_cast<int>(inst.num_quantiles());
  if (alloc.blocks.empty()) throw std::invalid_argument("allocation: no blocks");
  int expect = 1;
  int prev_delay = std::numeric_limits<int>::max();
  double prev_toll = -1.0;
  std::uint32_t used = 0;
  for (const auto& b : alloc.blocks) {
    if (b.first != expect || b.last < b.first || b.last > n) {
      throw std::invalid_argument("allocation: blocks must partition 1..n in order");
    }
    if (b.link < 0 || static_cast<std::size_t>(b.link) >= inst.num_links()) {
      throw std::invalid_argument("allocation: link index out of range");
    }
    if (used & (1u << b.link)) {
      throw std::invalid_argument("allocation: link used twice");
    }
    used |= 1u << b.link;
    const int load = b.last - b.first + 1;
    if (inst.delay(static_cast<std::size_t>(b.link),
                   static_cast<std::size_t>(load)) != b.delay) {
      throw std::invalid_argument("allocation: stored delay mismatches the table");
    }
    if (b.delay > prev_delay) {
      throw std::invalid_argument("allocation: delays must not increase with income");
    }
    if (b.toll < prev_toll - 1e-12) {
      throw std::invalid_argument("allocation: tolls must not decrease with income");
    }
    prev_delay = b.delay;
    prev_toll = b.toll;
    expect = b.last + 1;
  }
  if (expect != n + 1) {
    throw std::invalid_argument("allocation: blocks do not cover all quantiles");
  }
  if (std::abs(alloc.blocks.front().toll) > 1e-12) {
    throw std::invalid_argument("allocation: poorest block must carry toll 0");
  }
}

}  // namespace detail

// Objective and exact (non-linearized) post-game Gini of an allocation.
// The equilibrium cost of quantile i is delta_i = q_i d_i + tau_i; the
// post-game income is q_i - importance * delta_i, with the same small
// importance factor used by the continuous pipeline (an integer delay of 1
// would otherwise wipe out the full income).  Negative post-game incomes
// are clipped to zero and flagged.
inline AllocationEvaluation evaluate_allocation(const TradeoffInstance& inst,
                                                const ObjectiveWeights& weights,
                                                const Allocation& alloc,
                                                double importance = 0.01) {
  inst.validate();
  detail::validate_allocation(inst, alloc);
  const std::size_t n = inst.num_quantiles();
  if (weights.alpha.size() != n || weights.beta.size() != n) {
    throw std::invalid_argument("evaluate_allocation: weight size mismatch");
  }
  if (!(importance >= 0.0)) {
    throw std::invalid_argument("evaluate_allocation: importance must be >= 0");
  }
  AllocationEvaluation ev;
  ev.post_incomes.resize(n);
  for (const auto& b : alloc.blocks) {
    for (int i = b.first; i <= b.last; ++i) {
      const auto idx = static_cast<std::size_t>(i - 1);
      ev.objective += weights.alpha[idx] * static_cast<double>(b.delay) +
                      weights.beta[idx] * b.toll;
      const double delta =
          inst.quantiles[idx] * static_cast<double>(b.delay) + b.toll;
      double post = inst.quantiles[idx] - importance * delta;
      if (post < 0.0) {
        ev.clipped = true;
        post = 0.0;
      }
      ev.post_incomes[idx] = post;
    }
  }
  std::vector<double> sorted = ev.post_incomes;
  std::sort(sorted.begin(), sorted.end());
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  if (total > 0.0) {
    const auto dn = static_cast<double>(n);
    double weighted = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      weighted += static_cast<double>(i + 1) * sorted[i];
    }
    ev.post_game_gini = 2.0 * weighted / (dn * total) - (dn + 1.0) / dn;
  } else {
    ev.post_game_gini = std::numeric_limits<double>::quiet_NaN();
    ev.clipped = true;
  }
  return ev;
}

// Exhaustive oracle over ordered contiguous partitions with injective
// link assignment and nonincreasing delays; tolls rebuilt bottom-up from
// boundary indifference.  Enumeration is lexicographic in the link
// sequence (then block sizes), and only strict improvements are kept, so
// ties resolve to the lexicographically smallest optimum.
inline Allocation brute_force_optimal(const TradeoffInstance& inst,
                                      const ObjectiveWeights& weights) {
  inst.validate();
  const int n = static_cast<int>(inst.num_quantiles());
  const int K = static_cast<int>(inst.num_links());
  if (K > 4 || n > 10) {
    throw std::invalid_argument("brute_force_optimal: instance exceeds oracle bounds");
  }
  Allocation best;
  double best_obj = std::numeric_limits<double>::infinity();
  Allocation current;
  std::uint32_t used = 0;

  std::function<void(int, int, double)> rec = [&](int next, int prev_delay,
                                                  double prev_toll) {
    if (next > n) {
      const double obj = evaluate_allocation(inst, weights, current).objective;
      if (obj < best_obj) {
        best_obj = obj;
        best = current;
        best.objective = obj;
      }
      return;
    }
    for (int e = 0; e < K; ++e) {
      if (used & (1u << e)) continue;
      for (int r = 1; next + r - 1 <= n; ++r) {
        const int d = inst.delay(static_cast<std::size_t>(e),
                                 static_cast<std::size_t>(r));
        if (d > prev_delay) break;  // delays rise with load
        double toll = 0.0;
        if (!current.blocks.empty()) {
          toll = prev_toll +
                 inst.quantiles[static_cast<std::size_t>(next - 2)] *
                     static_cast<double>(prev_delay - d);
        }
        current.blocks.push_back({e, next, next + r - 1, d, toll});
        used |= 1u << e;
        rec(next + r, d, toll);
        used &= ~(1u << e);
        current.blocks.pop_back();
      }
    }
  };
  rec(1, std::numeric_limits<int>::max(), 0.0);
  if (!std::isfinite(best_obj)) {
    throw std::runtime_error("brute_force_optimal: no feasible allocation");
  }
  return best;
}

// Subset dynamic program.  State (S, m, d): least objective over
// equilibrium allocations of the lowest m quantiles to exactly the links in
// S, where d is the delay of the richest block placed so far.  A transition
// stacks a new block of r quantiles on link e with delay d_new = delay_e(r)
// <= d; its toll increment q_m (d - d_new) is paid by every richer
// quantile, so the charge uses the suffix sum of the toll weights:
//   charge = d_new * (Apre(m+r) - Apre(m)) + q_m (d - d_new) * Bsuf(m+1).
// The reported objective is re-derived from the reconstructed allocation so
// that it matches the oracle bit for bit on identical allocations.
inline Allocation dp_optimal(const TradeoffInstance& inst,
                             const ObjectiveWeights& weights) {
  inst.validate();
  const int n = static_cast<int>(inst.num_quantiles());
  const int K = static_cast<int>(inst.num_links());
  if (weights.alpha.size() != static_cast<std::size_t>(n) ||
      weights.beta.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("dp_optimal: weight size mismatch");
  }

  std::vector<int> dvals;
  for (const auto& table : inst.link_delays) {
    dvals.insert(dvals.end(), table.begin(), table.end());
  }
  std::sort(dvals.begin(), dvals.end());
  dvals.erase(std::unique(dvals.begin(), dvals.end()), dvals.end());
  const int nd = static_cast<int>(dvals.size());
  std::vector<int> dindex(static_cast<std::size_t>(dvals.back()) + 1, -1);
  for (int i = 0; i < nd; ++i) {
    dindex[static_cast<std::size_t>(dvals[i])] = i;
  }

  const std::size_t num_masks = std::size_t{1} << K;
  const std::size_t num_states = num_masks * static_cast<std::size_t>(n + 1) *
                                 static_cast<std::size_t>(nd);
  if (num_states > std::size_t{50'000'000}) {
    throw std::invalid_argument("dp_optimal: state space too large");
  }

  std::vector<double> apre(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<double> bsuf(static_cast<std::size_t>(n) + 2, 0.0);
  for (int i = 1; i <= n; ++i) {
    apre[static_cast<std::size_t>(i)] =
        apre[static_cast<std::size_t>(i - 1)] +
        weights.alpha[static_cast<std::size_t>(i - 1)];
  }
  for (int i = n; i >= 1; --i) {
    bsuf[static_cast<std::size_t>(i)] =
        bsuf[static_cast<std::size_t>(i + 1)] +
        weights.beta[static_cast<std::size_t>(i - 1)];
  }

  const double inf = std::numeric_limits<double>::infinity();
  const auto at = [&](std::size_t mask, int m, int di) {
    return (mask * static_cast<std::size_t>(n + 1) +
            static_cast<std::size_t>(m)) *
               static_cast<std::size_t>(nd) +
           static_cast<std::size_t>(di);
  };
  std::vector<double> cost(num_states, inf);
  struct Parent {
    std::int32_t mask = -1;
    std::int16_t m = 0;
    std::int16_t di = 0;
    std::int16_t link = -1;
    std::int16_t r = 0;
  };
  std::vector<Parent> parent(num_states);

  for (int e = 0; e < K; ++e) {
    for (int m = 1; m <= n; ++m) {
      const int d = inst.delay(static_cast<std::size_t>(e),
                               static_cast<std::size_t>(m));
      const std::size_t s = at(std::size_t{1} << e, m,
                               dindex[static_cast<std::size_t>(d)]);
      const double val = static_cast<double>(d) * apre[static_cast<std::size_t>(m)];
      if (val < cost[s]) {
        cost[s] = val;
        parent[s] = {0, 0, 0, static_cast<std::int16_t>(e),
                     static_cast<std::int16_t>(m)};
      }
    }
  }

  for (std::size_t mask = 1; mask < num_masks; ++mask) {
    for (int m = 1; m < n; ++m) {
      for (int di = 0; di < nd; ++di) {
        const double base = cost[at(mask, m, di)];
        if (!std::isfinite(base)) continue;
        const int d_prev = dvals[static_cast<std::size_t>(di)];
        const double boundary_q = inst.quantiles[static_cast<std::size_t>(m - 1)];
        for (int e = 0; e < K; ++e) {
          if (mask & (std::size_t{1} << e)) continue;
          for (int r = 1; m + r <= n; ++r) {
            const int d_new = inst.delay(static_cast<std::size_t>(e),
                                         static_cast<std::size_t>(r));
            if (d_new > d_prev) break;  // delays rise with load
            const double charge =
                static_cast<double>(d_new) *
                    (apre[static_cast<std::size_t>(m + r)] -
                     apre[static_cast<std::size_t>(m)]) +
                boundary_q * static_cast<double>(d_prev - d_new) *
                    bsuf[static_cast<std::size_t>(m + 1)];
            const std::size_t s = at(mask | (std::size_t{1} << e), m + r,
                                     dindex[static_cast<std::size_t>(d_new)]);
            if (base + charge < cost[s]) {
              cost[s] = base + charge;
              parent[s] = {static_cast<std::int32_t>(mask),
                           static_cast<std::int16_t>(m),
                           static_cast<std::int16_t>(di),
                           static_cast<std::int16_t>(e),
                           static_cast<std::int16_t>(r)};
            }
          }
        }
      }
    }
  }

  std::size_t best_mask = 0;
  int best_di = -1;
  double best_val = inf;
  for (std::size_t mask = 1; mask < num_masks; ++mask) {
    for (int di = 0; di < nd; ++di) {
      const double v = cost[at(mask, n, di)];
      if (v < best_val) {
        best_val = v;
        best_mask = mask;
        best_di = di;
      }
    }
  }
  if (!std::isfinite(best_val)) {
    throw std::runtime_error("dp_optimal: no feasible allocation");
  }

  // reconstruct blocks richest-first, then rebuild tolls poorest-first
  std::vector<AllocationBlock> rev;
  std::size_t mask = best_mask;
  int m = n;
  int di = best_di;
  while (m > 0) {
    const Parent p = parent[at(mask, m, di)];
    AllocationBlock b;
    b.link = p.link;
    b.first = m - p.r + 1;
    b.last = m;
    b.delay = inst.delay(static_cast<std::size_t>(p.link),
                         static_cast<std::size_t>(p.r));
    rev.push_back(b);
    mask = static_cast<std::size_t>(p.mask);
    m = p.m;
    di = p.di;
  }
  Allocation alloc;
  alloc.blocks.assign(rev.rbegin(), rev.rend());
  for (std::size_t i = 1; i < alloc.blocks.size(); ++i) {
    const auto& prev = alloc.blocks[i - 1];
    alloc.blocks[i].toll =
        prev.toll +
        inst.quantiles[static_cast<std::size_t>(prev.last - 1)] *
            static_cast<double>(prev.delay - alloc.blocks[i].delay);
  }
  alloc.objective = evaluate_allocation(inst, weights, alloc).objective;
  return alloc;
}

}  // namespace iniquity
