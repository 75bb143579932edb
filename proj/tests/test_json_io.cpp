#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "iniquity/json_io.hpp"
#include "iniquity/pigou.hpp"

using namespace iniquity;

TEST_CASE("income schema round trip preserves the evaluator") {
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> u(0.1, 4.0);
  for (int rep = 0; rep < 30; ++rep) {
    QuantileFunction q = [&]() {
      switch (rep % 3) {
        case 0:
          return QuantileFunction::power_law(2.0 * u(rng), u(rng));
        case 1: {
          std::vector<double> v{u(rng), u(rng), u(rng)};
          std::sort(v.begin(), v.end());
          return QuantileFunction::piecewise_constant(v);
        }
        default: {
          std::vector<double> v{u(rng), u(rng), u(rng)};
          std::sort(v.begin(), v.end());
          return QuantileFunction::tabulated(
              {{0.0, v[0]}, {0.4, v[1]}, {1.0, v[2]}});
        }
      }
    }();
    const auto back = quantile_from_json(to_json(q));
    CHECK(back.kind() == q.kind());
    for (int j = 0; j <= 20; ++j) {
      const double x = j / 20.0;
      CHECK(back(x) == q(x));  // payload copies exactly
    }
  }
}

TEST_CASE("income schema uses the documented field names") {
  const auto j = to_json(QuantileFunction::power_law(1.0, 2.0));
  CHECK(j.at("kind") == "power_law");
  CHECK(j.at("beta") == 1.0);
  CHECK(j.at("scale") == 2.0);
  const auto q = quantile_from_json(
      json::parse(R"({"kind":"piecewise","values":[1.0,3.0]})"));
  CHECK(gini(q) == Catch::Approx(0.25).margin(1e-12));
  CHECK_THROWS_AS(quantile_from_json(json::parse(R"({"kind":"normal"})")),
                  std::invalid_argument);
}

TEST_CASE("network schema round trip") {
  const auto net = json::parse(
      R"({"links":[{"latency":{"kind":"linear","a":1,"b":0},"toll":0.25},
                   {"latency":{"kind":"constant","c":1.0},"toll":0}]})");
  const auto parsed = network_from_json(net);
  CHECK(parsed.size() == 2);
  CHECK(parsed.links()[0].toll == 0.25);
  CHECK(parsed.links()[0].latency(0.5) == Catch::Approx(0.5));
  const auto again = network_from_json(to_json(parsed));
  CHECK(again.links()[1].latency(0.9) == Catch::Approx(1.0));

  const auto step = network_from_json(to_json(ParallelNetwork(
      {{LatencyFunction::piecewise_constant({1, 2, 4}), 0.1},
       {LatencyFunction::polynomial({0.0, 1.0, 2.0}), 0.0}})));
  CHECK(step.links()[0].latency(0.5) == 2.0);
  CHECK(step.links()[1].latency(1.0) == Catch::Approx(3.0));
}

TEST_CASE("tradeoff schema round trip") {
  const auto j = json::parse(
      R"({"quantiles":[1.0,2.0],"links":[{"delays":[2,2]},{"delays":[1,3]}],"lambda":3.0})");
  const auto inst = tradeoff_from_json(j);
  CHECK(inst.lambda == 3.0);
  CHECK(inst.delay(1, 2) == 3);
  const auto back = tradeoff_from_json(to_json(inst));
  CHECK(back.quantiles == inst.quantiles);
  CHECK(back.link_delays == inst.link_delays);

  const auto w = derive_weights(inst.quantiles, 0.0);
  const auto alloc = dp_optimal(inst, w);
  const auto dump = to_json(alloc, evaluate_allocation(inst, w, alloc));
  CHECK(dump.at("objective").get<double>() == Catch::Approx(3.0));
  CHECK(dump.at("blocks").size() == 2);
}

TEST_CASE("iniquity report serialization carries the integrals") {
  const auto r = equilibrium_parallel(pigou_network(pigou_optimal_toll(1.0)),
                                      pigou_income(1.0), CostModel::kCanonical);
  const auto rep =
      iniquity_report(pigou_income(1.0), r, default_alpha_grid(1e-2, 4));
  const auto j = to_json(rep);
  CHECK(j.at("analytic").get<double>() == Catch::Approx(1.0 / 24.0).margin(1e-9));
  CHECK(j.at("integrals").at("mu").get<double>() == Catch::Approx(1.0));
  CHECK(j.at("alpha_grid").size() == 4);
}
