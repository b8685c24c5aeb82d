#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "peec/ce_solver.hpp"
#include "peec/engine.hpp"
#include "peec/model.hpp"

namespace peec {

struct Numerics {
  int riccati_steps = kDefaultRiccatiSteps;
  int sim_steps = kDefaultSimSteps;
  double eps = 1e-5;  // relative; the bisection width is eps * max(1, T)
  std::uint64_t seed = 42;
};

struct Experiment {
  int monte_carlo_paths = 1000;
  int threads = 0;
};

/// Game in (y1, v1, y2, v2)-style row-major matrices plus numerics and
/// experiment settings. Prices may be the string "inf".
struct RunConfig {
  GameSpec game;
  Numerics numerics;
  Experiment experiment;
};

/// Strict parse: unknown keys are rejected, numerics and experiment are
/// optional. Throws ParseError (with line and column), SchemaError (naming
/// the field, e.g. "game.Re") or the model's validation errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Inverse of parse_config.
std::string config_to_json(const RunConfig& config);

std::string solution_to_json(const GameSpec& spec, const CESolution& solution);
std::string periodic_to_json(const PeriodicSolution& solution);
void export_solution_json(const GameSpec& spec, const CESolution& solution,
                          const std::filesystem::path& path);
void export_solution_json(const PeriodicSolution& solution, const std::filesystem::path& path);

/// Header t,x1..xn,xhat1..xhatn,up1..,ue1..,obs,cost_to_date; 12 significant
/// digits, LF line endings.
std::string trajectory_csv(const TrajectoryRecord& traj);
void export_trajectory_csv(const TrajectoryRecord& traj, const std::filesystem::path& path);

/// Which state components are the two relative-position coordinates. Without
/// explicit indices the state must be 4-dimensional, ordered (y1, v1, y2, v2).
struct PlotStyle {
  std::optional<int> pos1;
  std::optional<int> pos2;
  int panel_width = 420;
  int panel_height = 300;
};

/// Four panels: relative position in the plane (true and estimated), position
/// components over time, estimation-error norm and distance norm over time.
/// Observation instants are marked. Throws UnsupportedLayout.
std::string emit_plot_svg(const TrajectoryRecord& traj, const PlotStyle& style = {});

void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Entry point of the command-line tool: solve, simulate, montecarlo, period
/// and sweep. Returns 0 on success, 2 for configuration errors and 3 for
/// numerical failures.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace peec
