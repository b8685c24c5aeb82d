#include <cmath>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "peec/analysis.hpp"
#include "peec/error.hpp"
#include "peec/io.hpp"

namespace peec {
namespace {

double parse_price(const std::string& s) {
  if (s == "inf") return kInfinitePrice;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size()) throw Error(ErrorCode::SchemaError, "price \"" + s + "\" is not a number");
  return v;
}

std::string price_text(double O) {
  if (std::isinf(O)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", O);
  return buf;
}

struct Pipeline {
  GameSpec spec;
  TimeGrid grid;
  RiccatiSolution riccati;
  GramianCache cache;
  SolverOptions solver;

  explicit Pipeline(const RunConfig& cfg)
      : spec(cfg.game),
        grid(cfg.game.T, cfg.numerics.riccati_steps),
        riccati(solve_riccati_finite(spec, grid)),
        cache(spec, grid) {
    solver.eps = cfg.numerics.eps * std::max(1.0, spec.T);
  }
};

void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty()) {
    out << text;
  } else {
    write_text_file(path, text);
  }
}

}  // namespace

int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Solver and simulator for the pursuit-evasion game with costly observations"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string op_override;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON run configuration")->required();
    sub->add_option("--Op", op_override, "override the pursuer's observation price (number or inf)");
  };

  auto* solve = app.add_subcommand("solve", "Nash observation schedule of the finite-horizon game");
  add_common(solve);
  solve->add_option("-o,--out", out_path, "write JSON here instead of stdout");

  std::string csv_path;
  std::string svg_path;
  std::optional<std::uint64_t> seed;
  std::uint64_t path_index = 0;
  std::vector<double> instants;
  bool no_observations = false;
  auto* sim = app.add_subcommand("simulate", "one closed-loop path under the Nash schedule");
  add_common(sim);
  sim->add_option("--csv", csv_path, "trajectory CSV output")->required();
  sim->add_option("--svg", svg_path, "four-panel SVG output");
  sim->add_option("--seed", seed, "noise seed (default from config)");
  sim->add_option("--path", path_index, "path index within the seed");
  auto* inst_opt = sim->add_option("--instants", instants, "pursuer instants instead of the solved plan");
  sim->add_flag("--no-observations", no_observations, "simulate without any observation")
      ->excludes(inst_opt);

  std::optional<int> paths;
  auto* mc = app.add_subcommand("montecarlo", "Monte Carlo cost against the closed form");
  add_common(mc);
  mc->add_option("--paths", paths, "number of paths (default from config)")
      ->check(CLI::Range(2, 100000000));
  mc->add_option("--seed", seed, "base seed (default from config)");
  mc->add_option("-o,--out", out_path, "write JSON here instead of stdout");

  auto* period = app.add_subcommand("period", "optimal period of the stationary game");
  add_common(period);
  period->add_option("-o,--out", out_path, "write JSON here instead of stdout");

  std::string param;
  std::vector<std::string> values;
  auto* sweep = app.add_subcommand("sweep", "optimal count and cost over a parameter range");
  sweep->add_option("-c,--config", config_path, "JSON run configuration")->required();
  sweep->add_option("--param", param, "parameter to sweep")->required()->check(CLI::IsMember({"Op"}));
  sweep->add_option("--values", values, "values (numbers or inf)")->required();
  sweep->add_option("-o,--out", out_path, "write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (!op_override.empty()) {
      cfg.game.Op = parse_price(op_override);
      cfg.game = validate_spec(std::move(cfg.game));
    }

    if (*solve) {
      Pipeline p(cfg);
      const CESolution sol = solve_ce_game(p.spec, p.cache, p.riccati, p.solver);
      emit(out, out_path, solution_to_json(p.spec, sol));
    } else if (*sim) {
      Pipeline p(cfg);
      ObservationPlan plan_p;
      if (!instants.empty()) {
        plan_p = make_plan(instants, p.spec.T);
      } else if (!no_observations) {
        plan_p = solve_ce_game(p.spec, p.cache, p.riccati, p.solver).pursuer_plan;
      }
      const auto traj = simulate(p.spec, p.riccati, plan_p, ObservationPlan{},
                                 seed.value_or(cfg.numerics.seed), cfg.numerics.sim_steps,
                                 path_index);
      export_trajectory_csv(traj, csv_path);
      if (!svg_path.empty()) write_text_file(svg_path, emit_plot_svg(traj));
      out << "realized_cost " << traj.realized_cost << "\n";
    } else if (*mc) {
      Pipeline p(cfg);
      const CESolution sol = solve_ce_game(p.spec, p.cache, p.riccati, p.solver);
      if (sol.pursuer_plan.observe_always) {
        throw Error(ErrorCode::InvalidPlan, "Op = 0 asks for continuous observation");
      }
      MonteCarloOptions mo;
      mo.n_sim_steps = cfg.numerics.sim_steps;
      mo.threads = cfg.experiment.threads;
      mo.keep_costs = false;
      const auto s = monte_carlo(p.spec, p.riccati, sol.pursuer_plan, sol.evader_plan,
                                 paths.value_or(cfg.experiment.monte_carlo_paths),
                                 seed.value_or(cfg.numerics.seed), mo);
      const auto cost = expected_cost(p.spec, p.cache, p.riccati, sol.pursuer_plan, sol.evader_plan);
      nlohmann::ordered_json j;
      j["kind"] = "monte_carlo";
      j["M"] = s.M;
      j["instants"] = sol.pursuer_plan.instants;
      j["mean_cost"] = s.mean_cost;
      j["std_cost"] = s.std_cost;
      j["ci95_halfwidth"] = s.ci95_halfwidth;
      j["mean_terminal_distance"] = s.mean_terminal_distance;
      j["expected_cost"] = {{"estimation", cost.estimation_term},
                            {"observation_price", cost.obs_price_term},
                            {"baseline", cost.baseline_term},
                            {"total", cost.total}};
      j["within_3ci95"] = std::abs(s.mean_cost - cost.total) <= 3.0 * s.ci95_halfwidth;
      emit(out, out_path, j.dump(2) + "\n");
    } else if (*period) {
      const Matrix K_inf = solve_riccati_algebraic(cfg.game);
      emit(out, out_path, periodic_to_json(periodic_period(cfg.game, K_inf, cfg.game.Op)));
    } else if (*sweep) {
      std::string table = "Op,Np,F,instants\n";
      for (const auto& v : values) {
        cfg.game.Op = parse_price(v);
        cfg.game = validate_spec(std::move(cfg.game));
        Pipeline p(cfg);
        const CESolution sol = solve_ce_game(p.spec, p.cache, p.riccati, p.solver);
        char F[40];
        std::snprintf(F, sizeof F, "%.10g", sol.objective);
        table += price_text(p.spec.Op) + "," +
                 (sol.pursuer_plan.observe_always ? std::string("always")
                                                  : std::to_string(sol.pursuer_plan.count())) +
                 "," + F + ",";
        for (std::size_t i = 0; i < sol.pursuer_plan.instants.size(); ++i) {
          char t[32];
          std::snprintf(t, sizeof t, "%s%.6f", i ? " " : "", sol.pursuer_plan.instants[i]);
          table += t;
        }
        table += "\n";
      }
      emit(out, out_path, table);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return is_numeric_failure(e.code()) ? 3 : 2;
  }
  return 0;
}

}  // namespace peec
