#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "iniquity/income.hpp"
#include "oracles.hpp"

using namespace iniquity;

TEST_CASE("mean of the basic distributions") {
  CHECK(mean(QuantileFunction::power_law(1.0, 2.0)) == Catch::Approx(1.0));
  CHECK(mean(QuantileFunction::power_law(0.0, 3.5)) == Catch::Approx(3.5));
  CHECK(mean(QuantileFunction::piecewise_constant({1.0, 3.0})) ==
        Catch::Approx(2.0));
}

TEST_CASE("gini of the basic distributions") {
  // q(x) = (beta+1) x^beta at beta = 1 has G = beta/(beta+2) = 1/3
  CHECK(gini(QuantileFunction::power_law(1.0, 2.0)) == Catch::Approx(1.0 / 3.0));
  CHECK(gini(QuantileFunction::power_law(0.0, 5.0)) == Catch::Approx(0.0));
  CHECK(gini(QuantileFunction::piecewise_constant({1.0, 3.0})) ==
        Catch::Approx(0.25).margin(1e-12));
  CHECK(oracle::gini_pairwise({1.0, 3.0}) == Catch::Approx(0.25));
}

TEST_CASE("power-law gini matches beta/(beta+2) through quadrature") {
  for (double beta : {0.0, 0.5, 1.0, 2.0, 5.0}) {
    const auto q = QuantileFunction::power_law(beta, 1.7);
    CHECK(gini_numeric(q) == Catch::Approx(beta / (beta + 2.0)).margin(1e-9));
    CHECK(gini(q) == Catch::Approx(beta / (beta + 2.0)).margin(1e-12));
  }
}

TEST_CASE("gini_discrete examples and oracle agreement") {
  CHECK(gini_discrete({5.0, 5.0, 5.0}) == Catch::Approx(0.0).margin(1e-15));
  CHECK(gini_discrete({1.0, 3.0}) == Catch::Approx(0.25));
  const std::vector<double> v{0.5, 1.5, 2.0};
  CHECK(gini_discrete(v) == Catch::Approx(oracle::gini_pairwise(v)).margin(1e-13));
  CHECK(gini_discrete(v) == Catch::Approx(0.25).margin(1e-13));
}

TEST_CASE("gini_discrete agrees with the continuous step-function path") {
  std::mt19937_64 rng(20240811);
  std::uniform_real_distribution<double> u(0.1, 9.0);
  for (int rep = 0; rep < 40; ++rep) {
    const int n = 1 + static_cast<int>(rng() % 12);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    std::sort(v.begin(), v.end());
    const double cont = gini(QuantileFunction::piecewise_constant(v));
    CHECK(gini_discrete(v) == Catch::Approx(cont).margin(1e-12));
    CHECK(gini_discrete(v) ==
          Catch::Approx(oracle::gini_pairwise(v)).margin(1e-12));
  }
}

TEST_CASE("scaling preserves gini exactly") {
  const auto q = QuantileFunction::power_law(1.0, 2.0);
  const auto q3 = scale(q, 3.0);
  CHECK(q3(0.5) == Catch::Approx(3.0));  // 3 * 2 * 0.5
  CHECK(gini(q3) == Catch::Approx(1.0 / 3.0));

  const auto c = QuantileFunction::power_law(0.0, 4.0);
  CHECK(gini(scale(c, 2.5)) == Catch::Approx(0.0));
  CHECK(scale(c, 2.5)(0.3) == Catch::Approx(10.0));

  const auto d = scale(QuantileFunction::piecewise_constant({1.0, 3.0}), 2.0);
  CHECK(d(0.1) == Catch::Approx(2.0));
  CHECK(d(0.9) == Catch::Approx(6.0));
  CHECK(gini(d) == Catch::Approx(0.25).margin(1e-12));

  CHECK_THROWS_AS(scale(q, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(scale(q, -1.0), std::invalid_argument);
}

TEST_CASE("gini is scale invariant along the numeric path") {
  const std::vector<QuantileFunction> qs = {
      QuantileFunction::power_law(0.7, 1.3),
      QuantileFunction::piecewise_constant({0.4, 1.0, 1.0, 2.7}),
      QuantileFunction::tabulated({{0.0, 0.5}, {0.4, 1.1}, {1.0, 3.0}}),
  };
  for (const auto& q : qs) {
    const double base = gini_numeric(q);
    for (double lambda : {0.1, 1.0, 7.3}) {
      CHECK(std::abs(gini_numeric(scale(q, lambda)) - base) <= 1e-12);
    }
  }
}

TEST_CASE("transfer principle: rich-to-poor transfers lower the gini") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.5, 4.0);
  for (int rep = 0; rep < 60; ++rep) {
    const int n = 3 + static_cast<int>(rng() % 6);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    std::sort(v.begin(), v.end());
    if (v.back() - v.front() < 1e-6) continue;
    const double before = gini_discrete(v);
    // move delta < gap from the richest to the poorest cell
    const double delta =
        0.4 * (v.back() - v.front()) * std::uniform_real_distribution<double>(
                                           0.1, 0.9)(rng);
    auto w = v;
    w.back() -= delta;
    w.front() += delta;
    std::sort(w.begin(), w.end());
    CHECK(gini_discrete(w) < before);
  }
}

TEST_CASE("population independence: duplicating cells keeps gini") {
  const std::vector<double> v{0.5, 1.0, 2.5, 2.5, 6.0};
  std::vector<double> doubled;
  for (double x : v) {
    doubled.push_back(x);
    doubled.push_back(x);
  }
  std::sort(doubled.begin(), doubled.end());
  CHECK(std::abs(gini_discrete(doubled) - gini_discrete(v)) <= 1e-12);
}

TEST_CASE("lorenz curve invariants on a dense grid") {
  const std::vector<QuantileFunction> qs = {
      QuantileFunction::power_law(1.0, 2.0),
      QuantileFunction::power_law(0.5, 1.0),
      QuantileFunction::piecewise_constant({1.0, 2.0, 2.0, 7.0}),
      QuantileFunction::tabulated({{0.0, 0.2}, {0.5, 0.9}, {1.0, 4.0}}),
  };
  for (const auto& q : qs) {
    const auto L = lorenz(q);
    CHECK(L(0.0) == 0.0);
    CHECK(L(1.0) == 1.0);
    const int grid = 1000;
    double prev_l = 0.0;
    double prev_slope = -1.0;
    for (int i = 1; i <= grid; ++i) {
      const double t = static_cast<double>(i) / grid;
      const double l = L(t);
      CHECK(l <= t + 1e-9);
      const double slope = (l - prev_l) * grid;
      CHECK(slope >= prev_slope - 1e-7);  // convexity
      prev_slope = slope;
      prev_l = l;
    }
  }
}

TEST_CASE("tabulated quantile interpolates monotonically") {
  const auto q = QuantileFunction::tabulated({{0.0, 1.0}, {0.25, 2.0}, {1.0, 2.0}});
  CHECK(q(0.0) == Catch::Approx(1.0));
  CHECK(q(0.125) == Catch::Approx(1.5));
  CHECK(q(0.6) == Catch::Approx(2.0));
  CHECK_THROWS_AS(
      QuantileFunction::tabulated({{0.0, 2.0}, {0.5, 1.0}, {1.0, 3.0}}),
      std::invalid_argument);
  CHECK_THROWS_AS(QuantileFunction::tabulated({{0.1, 1.0}, {1.0, 2.0}}),
                  std::invalid_argument);
}

TEST_CASE("constructor and domain errors") {
  CHECK_THROWS_AS(QuantileFunction::power_law(-0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(QuantileFunction::power_law(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(QuantileFunction::piecewise_constant({}), std::invalid_argument);
  CHECK_THROWS_AS(QuantileFunction::piecewise_constant({1.0, -2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(QuantileFunction::piecewise_constant({2.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(gini_discrete({}), std::invalid_argument);
  CHECK_THROWS_AS(gini_discrete({1.0, 0.0}), std::invalid_argument);
  // zero-mean distribution has no Gini
  const auto flat0 = QuantileFunction::tabulated({{0.0, 0.0}, {1.0, 0.0}});
  CHECK_THROWS_AS(gini(flat0), std::domain_error);
}

TEST_CASE("weighted gini matches the equal-mass and pairwise routes") {
  const std::vector<double> v{0.5, 1.5, 2.0};
  CHECK(gini_weighted(v, {1.0, 1.0, 1.0}) ==
        Catch::Approx(gini_discrete(v)).margin(1e-13));
  const std::vector<double> vals{1.0, 2.0, 5.0};
  const std::vector<double> mass{0.2, 0.5, 0.3};
  CHECK(gini_weighted(vals, mass) ==
        Catch::Approx(oracle::gini_pairwise_weighted(vals, mass)).margin(1e-13));
}

TEST_CASE("segment gini: uniform closed form and mixtures") {
  // uniform on [a, b]: G = (b - a) / (3 (a + b))
  CHECK(segment_gini({{1.0, 3.0, 1.0}}) == Catch::Approx(2.0 / 12.0).margin(1e-13));
  CHECK(segment_gini({{2.0, 2.0, 1.0}}) == Catch::Approx(0.0).margin(1e-13));
  // splitting one uniform chunk into two adjacent chunks changes nothing
  const double whole = segment_gini({{0.5, 2.5, 1.0}});
  const double split = segment_gini({{0.5, 1.5, 0.5}, {1.5, 2.5, 0.5}});
  CHECK(whole == Catch::Approx(split).margin(1e-13));
  // against a sampled oracle on an interleaved mixture
  const std::vector<ValueSegment> mix{{0.2, 1.0, 0.3}, {0.8, 1.6, 0.5}, {1.5, 1.5, 0.2}};
  std::vector<double> samples;
  std::vector<double> weights;
  const int n = 4000;
  for (const auto& s : mix) {
    for (int i = 0; i < n; ++i) {
      samples.push_back(s.lo + (s.hi - s.lo) * (i + 0.5) / n);
      weights.push_back(s.mass / n);
    }
  }
  CHECK(segment_gini(mix) ==
        Catch::Approx(oracle::gini_pairwise_weighted(samples, weights)).margin(1e-6));
}
