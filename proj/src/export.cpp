#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "peec/error.hpp"
#include "peec/io.hpp"

namespace peec {
namespace {

using ordered_json = nlohmann::ordered_json;

ordered_json price_json(double O) { return std::isinf(O) ? ordered_json("inf") : ordered_json(O); }

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

ordered_json plan_json(const ObservationPlan& plan) {
  ordered_json display = ordered_json::array();
  for (double t : plan.instants) display.push_back(fixed2(t));
  return {{"count", plan.count()},
          {"observe_always", plan.observe_always},
          {"instants", plan.instants},
          {"instants_display", std::move(display)}};
}

void append_g12(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  line += buf;
}

}  // namespace

std::string solution_to_json(const GameSpec& spec, const CESolution& sol) {
  ordered_json j;
  j["kind"] = "ce_game";
  j["dominance"] = to_string(sol.dominance);
  j["reason"] = sol.reason;
  j["Op"] = price_json(spec.Op);
  j["Oe"] = price_json(spec.Oe);
  j["Np"] = sol.pursuer_plan.count();
  j["Ne"] = sol.evader_plan.count();
  j["instants"] = sol.pursuer_plan.instants;
  j["instants_display"] = plan_json(sol.pursuer_plan)["instants_display"];
  j["pursuer"] = plan_json(sol.pursuer_plan);
  j["evader"] = plan_json(sol.evader_plan);
  j["objective"] = sol.objective;
  j["first_order_residuals"] = sol.first_order_residuals;
  j["first_order_tolerance"] = sol.fo_tolerance;
  j["N_upper"] = sol.N_upper ? ordered_json(*sol.N_upper) : ordered_json(nullptr);
  j["N_upper_tight"] = sol.N_upper_tight ? ordered_json(*sol.N_upper_tight) : ordered_json(nullptr);
  j["eps"] = sol.eps;
  ordered_json table = ordered_json::array();
  for (const auto& [n, F] : sol.F_table) {
    const auto it = sol.instants_table.find(n);
    table.push_back({{"N", n},
                     {"F", F},
                     {"instants", it == sol.instants_table.end() ? std::vector<double>{}
                                                                  : it->second}});
  }
  j["F_table"] = std::move(table);
  return j.dump(2) + "\n";
}

std::string periodic_to_json(const PeriodicSolution& sol) {
  ordered_json j;
  j["kind"] = "periodic";
  j["Op"] = price_json(sol.Op);
  j["dT_star"] = sol.dT_star;
  j["dT_star_display"] = fixed2(sol.dT_star);
  j["average_cost"] = sol.avg_cost;
  j["second_derivative"] = sol.second_derivative;
  j["residual"] = sol.residual;
  return j.dump(2) + "\n";
}

void export_solution_json(const GameSpec& spec, const CESolution& solution,
                          const std::filesystem::path& path) {
  write_text_file(path, solution_to_json(spec, solution));
}

void export_solution_json(const PeriodicSolution& solution, const std::filesystem::path& path) {
  write_text_file(path, periodic_to_json(solution));
}

std::string trajectory_csv(const TrajectoryRecord& traj) {
  if (traj.size() == 0) throw Error(ErrorCode::IoError, "empty trajectory");
  const Eigen::Index n = traj.x[0].size();
  const Eigen::Index mp = traj.u_p[0].size();
  const Eigen::Index me = traj.u_e[0].size();
  std::string out = "t";
  for (Eigen::Index i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  for (Eigen::Index i = 1; i <= n; ++i) out += ",xhat" + std::to_string(i);
  for (Eigen::Index i = 1; i <= mp; ++i) out += ",up" + std::to_string(i);
  for (Eigen::Index i = 1; i <= me; ++i) out += ",ue" + std::to_string(i);
  out += ",obs,cost_to_date\n";
  std::string line;
  for (std::size_t r = 0; r < traj.size(); ++r) {
    line.clear();
    append_g12(line, traj.times[r]);
    for (const Vector* v : {&traj.x[r], &traj.x_hat[r], &traj.u_p[r], &traj.u_e[r]}) {
      for (Eigen::Index i = 0; i < v->size(); ++i) {
        line += ',';
        append_g12(line, (*v)(i));
      }
    }
    line += traj.obs_flags[r] ? ",1," : ",0,";
    append_g12(line, traj.cost_to_date[r]);
    line += '\n';
    out += line;
  }
  return out;
}

void export_trajectory_csv(const TrajectoryRecord& traj, const std::filesystem::path& path) {
  write_text_file(path, trajectory_csv(traj));
}

}  // namespace peec
