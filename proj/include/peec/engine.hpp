#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "peec/ce_solver.hpp"
#include "peec/lqg_core.hpp"
#include "peec/model.hpp"

namespace peec {

inline constexpr int kDefaultSimSteps = 6000;

/// Standard normal draws addressed by (seed, path, step, component), so any
/// path can be regenerated on its own. Each key is hashed with the SplitMix64
/// finalizer into two 53-bit uniforms u1 in (0, 1], u2 in [0, 1), and the
/// draw is sqrt(-2 ln u1) cos(2 pi u2).
class CounterNormal {
 public:
  explicit CounterNormal(std::uint64_t seed) : seed_(seed) {}
  double operator()(std::uint64_t path, std::uint64_t step, std::uint64_t component) const;

 private:
  std::uint64_t seed_;
};

/// One simulated realization. Row j holds the state after any observation
/// reset at times[j]; controls are those applied from times[j] onward.
struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<Vector> x;
  std::vector<Vector> x_hat;
  std::vector<Vector> u_p;
  std::vector<Vector> u_e;
  std::vector<bool> obs_flags;
  std::vector<double> cost_to_date;
  double realized_cost = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t path = 0;

  std::size_t size() const { return times.size(); }
};

/// up = -Rp^-1 Bp' K(t) x_hat, ue = -Re^-1 Be' K(t) x_hat.
std::pair<Vector, Vector> nash_controls(const GameSpec& spec, const RiccatiSolution& riccati,
                                        const Vector& x_hat, double t);

/// One RK4 step of dx_hat/dt = (A - D K(t)) x_hat.
Vector propagate_estimate(const GameSpec& spec, const RiccatiSolution& riccati,
                          const Vector& x_hat, double t, double dt);

/// Uniform simulation nodes with the observation instants spliced in.
/// flags[j] marks nodes that are observation instants.
struct SimulationGrid {
  std::vector<double> times;
  std::vector<bool> flags;
};
SimulationGrid simulation_grid(double T, int n_sim_steps, const std::vector<double>& instants);

/// Closed-loop path under Nash controls. The drift of (x, x_hat) takes one
/// RK4 step per node and x receives the increment C sqrt(dt) xi on top; the
/// estimate is reset to x at every merged instant.
/// Realized cost is the trapezoid running cost plus terminal cost plus
/// Op Np - Oe Ne. Deterministic in (seed, path).
TrajectoryRecord simulate(const GameSpec& spec, const RiccatiSolution& riccati,
                          const ObservationPlan& plan_p, const ObservationPlan& plan_e,
                          std::uint64_t seed, int n_sim_steps = kDefaultSimSteps,
                          std::uint64_t path = 0);

struct MonteCarloSummary {
  int M = 0;
  double mean_cost = 0.0;
  double std_cost = 0.0;
  double ci95_halfwidth = 0.0;
  double mean_terminal_distance = 0.0;
  std::vector<double> costs;
};

struct MonteCarloOptions {
  int n_sim_steps = kDefaultSimSteps;
  int threads = 0;  // 0 = hardware concurrency
  bool keep_costs = true;
};

/// Path k uses noise keyed by (base_seed, k). Statistics are accumulated in
/// path order, so the thread count never changes the numbers.
MonteCarloSummary monte_carlo(const GameSpec& spec, const RiccatiSolution& riccati,
                              const ObservationPlan& plan_p, const ObservationPlan& plan_e, int M,
                              std::uint64_t base_seed, const MonteCarloOptions& opts = {});

/// Per-node ensemble moments over M paths.
struct EnsembleMoments {
  std::vector<double> times;
  std::vector<bool> flags;
  std::vector<Vector> mean_x;
  std::vector<double> mean_sq_norm;    // E ||x||^2
  std::vector<Vector> mean_error;      // E[x - x_hat]
  std::vector<Matrix> error_cov;       // E[(x - x_hat)(x - x_hat)']
  int M = 0;
};

EnsembleMoments ensemble_moments(const GameSpec& spec, const RiccatiSolution& riccati,
                                 const ObservationPlan& plan_p, const ObservationPlan& plan_e,
                                 int M, std::uint64_t base_seed,
                                 int n_sim_steps = kDefaultSimSteps);

}  // namespace peec
