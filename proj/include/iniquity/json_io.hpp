#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "iniquity/game.hpp"
#include "iniquity/income.hpp"
#include "iniquity/iniquity_index.hpp"
#include "iniquity/tradeoff.hpp"

// JSON schemas:
//   income    {"kind":"power_law","beta":1.0,"scale":2.0}
//             {"kind":"piecewise","values":[...]}
//             {"kind":"tabulated","knots":[[x,q],...]}
//   latency   {"kind":"constant","c":1.0} | {"kind":"linear","a":1,"b":0}
//             {"kind":"polynomial","coeffs":[...]}
//             {"kind":"piecewise_constant","levels":[...]}
//   network   {"links":[{"latency":{...},"toll":0.25},...]}
//   tradeoff  {"quantiles":[...],"links":[{"delays":[...]},...],"lambda":0}

namespace iniquity {

using nlohmann::json;

inline json to_json(const QuantileFunction& q) {
  switch (q.kind()) {
    case QuantileFunction::Kind::kPowerLaw:
      return json{{"kind", "power_law"}, {"beta", q.beta()}, {"scale", q.scale_factor()}};
    case QuantileFunction::Kind::kPiecewiseConstant:
      return json{{"kind", "piecewise"}, {"values", q.cell_values()}};
    case QuantileFunction::Kind::kTabulated: {
      json knots = json::array();
      for (const auto& [x, v] : q.tab_knots()) {
        knots.push_back(json::array({x, v}));
      }
      return json{{"kind", "tabulated"}, {"knots", knots}};
    }
    case QuantileFunction::Kind::kDerived:
      throw std::invalid_argument("to_json: derived quantile functions are not serializable");
  }
  throw std::logic_error("to_json: unknown quantile kind");
}

inline QuantileFunction quantile_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "power_law") {
    return QuantileFunction::power_law(j.at("beta").get<double>(),
                                       j.at("scale").get<double>());
  }
  if (kind == "piecewise") {
    return QuantileFunction::piecewise_constant(
        j.at("values").get<std::vector<double>>());
  }
  if (kind == "tabulated") {
    std::vector<std::pair<double, double>> knots;
    for (const auto& k : j.at("knots")) {
      knots.emplace_back(k.at(0).get<double>(), k.at(1).get<double>());
    }
    return QuantileFunction::tabulated(std::move(knots));
  }
  throw std::invalid_argument("quantile_from_json: unknown kind '" + kind + "'");
}

inline json to_json(const LatencyFunction& l) {
  switch (l.kind()) {
    case LatencyFunction::Kind::kConstant:
      return json{{"kind", "constant"}, {"c", l.coefficients()[0]}};
    case LatencyFunction::Kind::kLinear:
      return json{{"kind", "linear"},
                  {"a", l.coefficients()[1]},
                  {"b", l.coefficients()[0]}};
    case LatencyFunction::Kind::kPolynomial:
      return json{{"kind", "polynomial"}, {"coeffs", l.coefficients()}};
    case LatencyFunction::Kind::kPiecewiseConstant:
      return json{{"kind", "piecewise_constant"}, {"levels", l.levels()}};
  }
  throw std::logic_error("to_json: unknown latency kind");
}

inline LatencyFunction latency_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return LatencyFunction::constant(j.at("c").get<double>());
  if (kind == "linear") {
    return LatencyFunction::linear(j.at("a").get<double>(), j.at("b").get<double>());
  }
  if (kind == "polynomial") {
    return LatencyFunction::polynomial(j.at("coeffs").get<std::vector<double>>());
  }
  if (kind == "piecewise_constant") {
    return LatencyFunction::piecewise_constant(j.at("levels").get<std::vector<int>>());
  }
  throw std::invalid_argument("latency_from_json: unknown kind '" + kind + "'");
}

inline json to_json(const ParallelNetwork& net) {
  json links = json::array();
  for (const auto& l : net.links()) {
    links.push_back(json{{"latency", to_json(l.latency)}, {"toll", l.toll}});
  }
  return json{{"links", links}};
}

inline ParallelNetwork network_from_json(const json& j) {
  std::vector<Link> links;
  for (const auto& l : j.at("links")) {
    links.push_back({latency_from_json(l.at("latency")),
                     l.value("toll", 0.0)});
  }
  return ParallelNetwork(std::move(links));
}

inline json to_json(const TradeoffInstance& inst) {
  json links = json::array();
  for (const auto& table : inst.link_delays) {
    links.push_back(json{{"delays", table}});
  }
  return json{{"quantiles", inst.quantiles},
              {"links", links},
              {"lambda", inst.lambda}};
}

inline TradeoffInstance tradeoff_from_json(const json& j) {
  TradeoffInstance inst;
  inst.quantiles = j.at("quantiles").get<std::vector<double>>();
  for (const auto& l : j.at("links")) {
    inst.link_delays.push_back(l.at("delays").get<std::vector<int>>());
  }
  inst.lambda = j.value("lambda", 0.0);
  inst.validate();
  return inst;
}

inline json to_json(const Allocation& alloc, const AllocationEvaluation& ev) {
  json blocks = json::array();
  for (const auto& b : alloc.blocks) {
    blocks.push_back(json{{"link", b.link},
                          {"first", b.first},
                          {"last", b.last},
                          {"delay", b.delay},
                          {"toll", b.toll}});
  }
  return json{{"blocks", blocks},
              {"objective", alloc.objective},
              {"post_game_gini", ev.post_game_gini},
              {"clipped", ev.clipped}};
}

inline json to_json(const IniquityReport& rep) {
  return json{{"gini_ex_ante", rep.gini_ex_ante},
              {"analytic", rep.analytic},
              {"finite_difference", rep.finite_difference},
              {"agreement_gap", rep.agreement_gap},
              {"integrals",
               {{"A", rep.area_income},
                {"B", rep.area_cost},
                {"C", rep.social_cost},
                {"mu", rep.mu}}},
              {"alpha_grid", rep.alpha_grid},
              {"gini_ex_post", rep.gini_ex_post}};
}

}  // namespace iniquity
