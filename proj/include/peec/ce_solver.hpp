#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "peec/lqg_core.hpp"
#include "peec/model.hpp"

namespace peec {

/// A player's observation schedule: strictly increasing instants in (0, T).
/// `observe_always` encodes continuous observation, which has no finite list.
struct ObservationPlan {
  std::vector<double> instants;
  bool observe_always = false;

  int count() const { return static_cast<int>(instants.size()); }
  bool empty() const { return instants.empty() && !observe_always; }
};

/// Sorts, collapses instants closer than 1e-9 T and drops anything outside
/// (0, T). A repeated observation costs a price but buys nothing.
ObservationPlan make_plan(std::vector<double> instants, double T);

/// Throws InvalidPlan unless the instants are strictly increasing in (0, T).
void check_plan(const ObservationPlan& plan, double T);

/// Union of both players' instants, sorted and deduplicated.
std::vector<double> merge_instants(const ObservationPlan& p, const ObservationPlan& e, double T);

/// Tr[Sigma(t_i - t_prev) phi(t_i)]: left side of the first-order condition.
double lhs_lp(const GramianCache& cache, const RiccatiSolution& riccati, double t_prev, double t_i);

/// int_{t_i}^{t_end} Tr[e^{A(t-t_i)} C C' e^{A(t-t_i)'} phi(t)] dt.
double rhs_rp(const GramianCache& cache, const RiccatiSolution& riccati, double t_i, double t_end);

/// Instant t_next in [t_i, T] with rhs_rp(t_i, t_next) = lhs_lp(t_prev, t_i),
/// or nothing when even rhs_rp(t_i, T) falls short.
std::optional<double> next_instant(const GramianCache& cache, const RiccatiSolution& riccati,
                                   double t_prev, double t_i, double eps_inner);

struct InstantSearch {
  std::vector<double> instants;  // t_1 .. t_N as chained from t_1*
  double chain_end = 0.0;        // chained t_{N+1}, ideally T
  int outer_iterations = 0;
  int polish_iterations = 0;  // extra halvings spent closing the terminal gap
};

/// Bisection on the first instant; every guess is chained forward through the
/// first-order condition. eps is the final bracket width on t_1. If the chain
/// then still misses T by more than a relative 1e-7 in r_p, the same bracket
/// is halved further.
InstantSearch binary_search_instants(const GramianCache& cache, const RiccatiSolution& riccati,
                                     int count, double eps);

/// Estimation cost of the gaps between 0, the instants and T, plus Op N.
double objective_F(const GramianCache& cache, const RiccatiSolution& riccati,
                   const std::vector<double>& instants, double Op);

/// |lhs_lp(t_{i-1}, t_i) - rhs_rp(t_i, t_{i+1})| with t_0 = 0, t_{N+1} = T.
std::vector<double> first_order_residuals(const GramianCache& cache,
                                          const RiccatiSolution& riccati,
                                          const std::vector<double>& instants);

/// floor(int_0^T Tr[Sigma(t) phi(t)] dt / Op). Throws ZeroCost for Op = 0;
/// returns 0 for Op = +infinity.
long np_upper_bound(const GramianCache& cache, const RiccatiSolution& riccati, double Op);

/// Bound on the optimal count from one computed value: F(N*) >= Op N* and
/// F(N*) <= F(k), hence N* <= floor(F(k) / Op).
long tightened_bound(double F_k, double Op);

struct SolverOptions {
  double eps = 0.0;  // <= 0 selects 1e-5 max(1, T)
  long max_count = 100000;
};

double default_eps(double T);

struct CESolution {
  Dominance dominance = Dominance::PursuerDominant;
  ObservationPlan pursuer_plan;
  ObservationPlan evader_plan;
  std::map<int, double> F_table;
  std::map<int, std::vector<double>> instants_table;
  std::optional<long> N_upper;        // empty when Op = 0
  std::optional<long> N_upper_tight;
  std::vector<double> first_order_residuals;
  double objective = 0.0;
  double fo_tolerance = 0.0;
  double eps = 0.0;
  std::string reason;
};

/// Nash observation strategies of the concealment-exposure game: the evader
/// never observes under dominance; the pursuer's count is enumerated upward
/// with the bound tightened after every computed F value.
CESolution solve_ce_game(const GameSpec& spec, const GramianCache& cache,
                         const RiccatiSolution& riccati, const SolverOptions& opts = {});

struct PeriodicSolution {
  double dT_star = 0.0;
  double avg_cost = 0.0;
  double second_derivative = 0.0;
  double residual = 0.0;  // left side minus right side of the stationarity condition
  double Op = 0.0;
};

/// f(dT) = (int_0^dT Tr[Sigma(t) phi~] dt + Op) / dT with phi~ = K~ D K~.
double periodic_average_cost(const GameSpec& spec, const Matrix& K_inf, double dT, double Op);

/// dT Tr[Sigma(dT) phi~] - int_0^dT Tr[Sigma(t) phi~] dt - Op; increasing in dT.
double periodic_condition(const GameSpec& spec, const Matrix& K_inf, double dT, double Op);

/// Optimal inter-observation period for the stationary game, by bisection on
/// periodic_condition after bracketing by doubling. Throws NoBracket.
PeriodicSolution periodic_period(const GameSpec& spec, const Matrix& K_inf, double Op);

}  // namespace peec
