// Experiment runner for the congestion-with-tolls inequality toolkit.
//
// Subcommands:
//   pigou-sweep   sweep the switching point of the two-link network and
//                 report social cost / actual latency / perceived latency
//                 through the numeric pipeline, plus the located minimum
//   iniquity      iniquity index of an instance (analytic, finite
//                 difference, or both), JSON report
//   tradeoff      delay/equality trade-off optimizer on a discrete
//                 instance, optional brute-force cross-check
//   learn         multiplicative-weights dynamics on a leveled population,
//                 CSV trajectory
//   asym          two-commodity counterexamples (fig7 instance or the
//                 parametric gamma2 sweep)
//   gini          Gini coefficient of a value list or income file
//
// Exit codes: 0 ok, 1 numeric-agreement failure, 2 oracle mismatch,
// 64 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iniquity/asymmetric.hpp"
#include "iniquity/csv.hpp"
#include "iniquity/game.hpp"
#include "iniquity/income.hpp"
#include "iniquity/iniquity_index.hpp"
#include "iniquity/json_io.hpp"
#include "iniquity/learning.hpp"
#include "iniquity/parallel.hpp"
#include "iniquity/pigou.hpp"
#include "iniquity/quadrature.hpp"
#include "iniquity/tradeoff.hpp"

namespace {

using iniquity::json;

struct OutputTarget {
  std::ofstream file;
  std::ostream* stream = &std::cout;

  void open(const std::string& path) {
    if (path.empty()) return;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    stream = &file;
  }
};

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  json j;
  in >> j;
  return j;
}

// ---------------------------------------------------------------- pigou-sweep

struct PigouSweepOptions {
  double beta = 1.0;
  int points = 101;
  std::string curve = "social";
  std::string output;
  unsigned jobs = iniquity::default_jobs();
};

double pigou_curve_value(double beta, double c, const std::string& curve) {
  using namespace iniquity;
  const auto q = pigou_income(beta);
  if (curve == "latency") {
    const auto r = equilibrium_parallel(pigou_network(toll_for_switchpoint(q, c)),
                                        q, CostModel::kCanonical);
    return actual_latency_total(r);
  }
  const auto model = curve == "cf1" ? CostModel::kCF1 : CostModel::kCanonical;
  const auto r =
      equilibrium_parallel(pigou_network(toll_for_switchpoint(q, c)), q, model);
  return social_cost(r);
}

int run_pigou_sweep(const PigouSweepOptions& opt) {
  using namespace iniquity;
  OutputTarget out;
  out.open(opt.output);
  const auto q = pigou_income(opt.beta);

  std::vector<double> cs(static_cast<std::size_t>(opt.points));
  for (int i = 0; i < opt.points; ++i) {
    cs[static_cast<std::size_t>(i)] =
        static_cast<double>(i) / (opt.points - 1);
  }
  std::vector<double> values(cs.size());
  parallel_for(cs.size(), opt.jobs, [&](std::size_t i) {
    values[i] = pigou_curve_value(opt.beta, cs[i], opt.curve);
  });

  // locate the minimum: coarse scan plus golden refinement
  const int scan = 512;
  double arg = 0.0, best = std::numeric_limits<double>::infinity();
  std::vector<double> scan_vals(static_cast<std::size_t>(scan) + 1);
  parallel_for(scan_vals.size(), opt.jobs, [&](std::size_t i) {
    scan_vals[i] = pigou_curve_value(opt.beta, static_cast<double>(i) / scan,
                                     opt.curve);
  });
  for (int i = 0; i <= scan; ++i) {
    if (scan_vals[static_cast<std::size_t>(i)] < best) {
      best = scan_vals[static_cast<std::size_t>(i)];
      arg = static_cast<double>(i) / scan;
    }
  }
  const double lo = std::max(0.0, arg - 1.0 / scan);
  const double hi = std::min(1.0, arg + 1.0 / scan);
  const double c_min = golden_section_min(
      [&](double c) { return pigou_curve_value(opt.beta, c, opt.curve); }, lo,
      hi, 1e-9);
  const double v_min = pigou_curve_value(opt.beta, c_min, opt.curve);

  CsvWriter csv(*out.stream);
  csv.header({"c", "tau", "value", "row"});
  for (std::size_t i = 0; i < cs.size(); ++i) {
    csv.mixed_row({format_number(cs[i]),
                   format_number(toll_for_switchpoint(q, cs[i])),
                   format_number(values[i]), "grid"});
  }
  csv.mixed_row({format_number(c_min),
                 format_number(toll_for_switchpoint(q, c_min)),
                 format_number(v_min), "min"});
  return 0;
}

// ------------------------------------------------------------------- iniquity

struct IniquityOptions {
  std::optional<double> beta;
  std::string instance;
  std::string method = "both";
  std::string output;
  double alpha0 = 1e-2;
  int halvings = 8;
};

int run_iniquity(const IniquityOptions& opt) {
  using namespace iniquity;
  OutputTarget out;
  out.open(opt.output);

  QuantileFunction q = pigou_income(opt.beta.value_or(1.0));
  ParallelNetwork net = pigou_network(pigou_optimal_toll(opt.beta.value_or(1.0)));
  CostModel model = CostModel::kCanonical;
  if (!opt.instance.empty()) {
    const auto j = load_json(opt.instance);
    q = quantile_from_json(j.at("income"));
    net = network_from_json(j.at("network"));
    const std::string m = j.value("model", "canonical");
    model = m == "cf1" ? CostModel::kCF1
                       : m == "cf2" ? CostModel::kCF2 : CostModel::kCanonical;
  }
  const auto solved = equilibrium_parallel(net, q, model);

  json report;
  double analytic = 0.0, fd_value = 0.0;
  if (opt.method == "analytic") {
    analytic = iniquity_analytic(q, solved);
    report = json{{"analytic", analytic}};
  } else if (opt.method == "fd") {
    const auto fd = iniquity_finite_difference(
        q, solved, default_alpha_grid(opt.alpha0, opt.halvings));
    fd_value = fd.value;
    report = json{{"finite_difference", fd.value},
                  {"alpha_grid", fd.alpha_grid},
                  {"gini_ex_post", fd.gini_values}};
  } else {
    const auto rep =
        iniquity_report(q, solved, default_alpha_grid(opt.alpha0, opt.halvings));
    analytic = rep.analytic;
    fd_value = rep.finite_difference;
    report = to_json(rep);
  }
  *out.stream << report.dump(2) << '\n';
  if (opt.method == "both" && std::abs(analytic - fd_value) > 1e-5) {
    std::cerr << "iniquity: analytic and finite-difference routes disagree\n";
    return 1;
  }
  return 0;
}

// ------------------------------------------------------------------- tradeoff

struct TradeoffOptions {
  std::string instance;
  std::optional<double> lambda;
  bool oracle = false;
  std::string output;
};

int run_tradeoff(const TradeoffOptions& opt) {
  using namespace iniquity;
  OutputTarget out;
  out.open(opt.output);
  auto inst = tradeoff_from_json(load_json(opt.instance));
  if (opt.lambda) inst.lambda = *opt.lambda;
  const auto weights = derive_weights(inst.quantiles, inst.lambda);
  const auto alloc = dp_optimal(inst, weights);
  const auto ev = evaluate_allocation(inst, weights, alloc);
  json report = to_json(alloc, ev);
  if (opt.oracle) {
    const auto reference = brute_force_optimal(inst, weights);
    report["oracle_objective"] = reference.objective;
    report["oracle_match"] = reference.objective == alloc.objective;
    if (reference.objective != alloc.objective) {
      *out.stream << report.dump(2) << '\n';
      std::cerr << "tradeoff: dp and brute-force objectives differ\n";
      return 2;
    }
  }
  *out.stream << report.dump(2) << '\n';
  return 0;
}

// ---------------------------------------------------------------------- learn

struct LearnCliOptions {
  std::string network;
  std::string income;
  int levels = 32;
  int rounds = 10000;
  double alpha = 0.01;
  int grains = 0;
  unsigned seed = 0;
  std::string output;
};

int run_learn(const LearnCliOptions& opt) {
  using namespace iniquity;
  OutputTarget out;
  out.open(opt.output);
  const ParallelNetwork net =
      opt.network.empty() ? pigou_network(pigou_optimal_toll(1.0))
                          : network_from_json(load_json(opt.network));
  const QuantileFunction q = opt.income.empty()
                                 ? pigou_income(1.0)
                                 : quantile_from_json(load_json(opt.income));
  const auto pop = levels_from_quantile(q, opt.levels);
  const auto game = reduce(net, pop);
  const auto traj = run_no_regret(game, opt.rounds, opt.alpha, default_step,
                                  opt.grains, opt.seed);

  CsvWriter csv(*out.stream);
  std::vector<std::string> cols{"round"};
  for (std::size_t i = 0; i < game.num_levels(); ++i) {
    cols.push_back("regret_" + std::to_string(i));
  }
  cols.push_back("inst_gini");
  cols.push_back("avg_gini");
  csv.header(cols);
  for (std::size_t t = 0; t < traj.inst_gini.size(); ++t) {
    std::vector<double> row{static_cast<double>(t + 1)};
    row.insert(row.end(), traj.regret[t].begin(), traj.regret[t].end());
    row.push_back(traj.inst_gini[t]);
    row.push_back(traj.avg_gini[t]);
    csv.row(row);
  }
  return 0;
}

// ----------------------------------------------------------------------- asym

struct AsymOptions {
  std::string experiment = "fig7";
  double alpha = 0.01;
  std::optional<double> xstar;
  int grid_points = 17;
  std::string output;
  unsigned jobs = iniquity::default_jobs();
};

int run_asym(const AsymOptions& opt) {
  using namespace iniquity;
  OutputTarget out;
  out.open(opt.output);
  if (opt.experiment == "fig7") {
    const auto r = solve_fig7(opt.alpha);
    const json j{{"alpha", r.alpha},
                 {"tolled_mass", r.tolled_mass},
                 {"boundary", r.boundary},
                 {"quad_residual", r.quad_residual},
                 {"boundary_residual", r.boundary_residual},
                 {"alpha_max", r.alpha_max},
                 {"gini",
                  {{"ex_ante", r.gini_ex_ante},
                   {"baseline", r.gini_baseline},
                   {"ex_post", r.gini_ex_post}}},
                 {"gini_d2",
                  {{"ex_ante", r.gini_d2_ex_ante},
                   {"baseline", r.gini_d2_baseline},
                   {"ex_post", r.gini_d2_ex_post}}}};
    *out.stream << j.dump(2) << '\n';
    return 0;
  }
  if (opt.xstar) {
    const auto r = solve_gamma2(*opt.xstar, opt.alpha);
    const json j{{"x_star", r.x_star},
                 {"h_star", r.h_star},
                 {"upper_mass", r.upper_mass},
                 {"tau", r.tau},
                 {"alpha", r.alpha},
                 {"boundary_residual", r.boundary_residual},
                 {"G_q0", r.gini_baseline},
                 {"G_qhat", r.gini_ex_post},
                 {"G_q0_D2", r.gini_d2_baseline},
                 {"G_qhat_D2", r.gini_d2_ex_post}};
    *out.stream << j.dump(2) << '\n';
    return 0;
  }
  std::vector<double> grid;
  if (opt.grid_points == 17) {
    grid = default_gamma2_grid();
  } else {
    for (int i = 0; i < opt.grid_points; ++i) {
      grid.push_back(0.1 + 0.8 * i / (opt.grid_points - 1));
    }
  }
  std::vector<Gamma2Result> rows(grid.size());
  parallel_for(grid.size(), opt.jobs,
               [&](std::size_t i) { rows[i] = solve_gamma2(grid[i], opt.alpha); });
  CsvWriter csv(*out.stream);
  csv.header({"x_star", "tau", "G_q0", "G_qhat", "G_q0_D2", "G_qhat_D2"});
  for (const auto& r : rows) {
    csv.row({r.x_star, r.tau, r.gini_baseline, r.gini_ex_post,
             r.gini_d2_baseline, r.gini_d2_ex_post});
  }
  return 0;
}

// ----------------------------------------------------------------------- gini

struct GiniOptions {
  std::string values;
  std::string income;
  std::string output;
};

int run_gini(const GiniOptions& opt) {
  using namespace iniquity;
  OutputTarget out;
  out.open(opt.output);
  if (!opt.values.empty()) {
    std::vector<double> v;
    std::stringstream ss(opt.values);
    std::string token;
    while (std::getline(ss, token, ',')) {
      v.push_back(std::stod(token));
    }
    std::sort(v.begin(), v.end());
    *out.stream << format_number(gini_discrete(v)) << '\n';
    return 0;
  }
  if (!opt.income.empty()) {
    const auto q = quantile_from_json(load_json(opt.income));
    *out.stream << format_number(gini(q)) << '\n';
    return 0;
  }
  std::cerr << "gini: provide --values or --income\n";
  return 64;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"income-heterogeneous congestion games with tolls"};
  app.require_subcommand(1);

  unsigned seed = 0;
  app.add_option("--seed", seed, "seed for stochastic variants");

  PigouSweepOptions pigou_opt;
  auto* sweep = app.add_subcommand(
      "pigou-sweep", "sweep the two-link network over switching points");
  sweep->add_option("--beta", pigou_opt.beta, "income exponent")
      ->check(CLI::NonNegativeNumber);
  sweep->add_option("--points", pigou_opt.points, "grid size")
      ->check(CLI::Range(2, 1000000));
  sweep->add_option("--curve", pigou_opt.curve, "social | latency | cf1")
      ->check(CLI::IsMember({"social", "latency", "cf1"}));
  sweep->add_option("--jobs", pigou_opt.jobs, "worker threads");
  sweep->add_option("--output,-o", pigou_opt.output, "output CSV path");

  IniquityOptions iniq_opt;
  auto* iniq = app.add_subcommand("iniquity", "iniquity index of an instance");
  auto* beta_flag = iniq->add_option("--beta", iniq_opt.beta,
                                     "two-link instance with this exponent");
  iniq->add_option("--instance", iniq_opt.instance,
                   "JSON file with network/income/model")
      ->excludes(beta_flag);
  iniq->add_option("--method", iniq_opt.method, "analytic | fd | both")
      ->check(CLI::IsMember({"analytic", "fd", "both"}));
  iniq->add_option("--alpha0", iniq_opt.alpha0, "largest alpha in the grid");
  iniq->add_option("--halvings", iniq_opt.halvings, "alpha grid size")
      ->check(CLI::Range(2, 24));
  iniq->add_option("--output,-o", iniq_opt.output, "output JSON path");

  TradeoffOptions trade_opt;
  auto* trade = app.add_subcommand("tradeoff", "delay/equality optimizer");
  trade->add_option("--instance", trade_opt.instance, "instance JSON file")
      ->required();
  trade->add_option("--lambda", trade_opt.lambda, "equality weight override");
  trade->add_flag("--oracle", trade_opt.oracle,
                  "cross-check against exhaustive enumeration");
  trade->add_option("--output,-o", trade_opt.output, "output JSON path");

  LearnCliOptions learn_opt;
  auto* learn = app.add_subcommand("learn", "multiplicative-weights dynamics");
  learn->add_option("--network", learn_opt.network, "network JSON file");
  learn->add_option("--income", learn_opt.income, "income JSON file");
  learn->add_option("--levels", learn_opt.levels, "income levels")
      ->check(CLI::Range(1, 4096));
  learn->add_option("--rounds", learn_opt.rounds, "number of rounds")
      ->check(CLI::Range(1, 100000000));
  learn->add_option("--alpha", learn_opt.alpha, "cost importance");
  learn->add_option("--grains", learn_opt.grains,
                    "atoms per level (0 = exact mass dynamics)");
  learn->add_option("--output,-o", learn_opt.output, "output CSV path");

  AsymOptions asym_opt;
  auto* asym = app.add_subcommand("asym", "two-commodity counterexamples");
  asym->add_option("--experiment", asym_opt.experiment, "fig7 | gamma2")
      ->check(CLI::IsMember({"fig7", "gamma2"}));
  asym->add_option("--alpha", asym_opt.alpha, "cost importance");
  asym->add_option("--xstar", asym_opt.xstar, "single gamma2 split point");
  asym->add_option("--grid-points", asym_opt.grid_points, "sweep grid size")
      ->check(CLI::Range(2, 100000));
  asym->add_option("--jobs", asym_opt.jobs, "worker threads");
  asym->add_option("--output,-o", asym_opt.output, "output path");

  GiniOptions gini_opt;
  auto* gini_cmd = app.add_subcommand("gini", "Gini coefficient");
  gini_cmd->add_option("--values", gini_opt.values, "comma-separated values");
  gini_cmd->add_option("--income", gini_opt.income, "income JSON file");
  gini_cmd->add_option("--output,-o", gini_opt.output, "output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  if (const char* env = std::getenv("INIQUITY_LAB_SEED")) {
    seed = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
  }
  learn_opt.seed = seed;

  try {
    if (sweep->parsed()) return run_pigou_sweep(pigou_opt);
    if (iniq->parsed()) return run_iniquity(iniq_opt);
    if (trade->parsed()) return run_tradeoff(trade_opt);
    if (learn->parsed()) return run_learn(learn_opt);
    if (asym->parsed()) return run_asym(asym_opt);
    if (gini_cmd->parsed()) return run_gini(gini_opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 64;
}
