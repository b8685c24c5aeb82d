#pragma once

#include <complex>
#include <optional>
#include <vector>

#include "peec/ce_solver.hpp"
#include "peec/lqg_core.hpp"
#include "peec/model.hpp"

namespace peec {

/// Expected game cost under Nash controls, split into its three parts.
struct CostBreakdown {
  double estimation_term = 0.0;  // sum over merged gaps of int Tr[Sigma phi]
  double obs_price_term = 0.0;   // Op Np - Oe Ne
  double baseline_term = 0.0;    // x0' K(0) x0 + int Tr(K C C') dt
  double total = 0.0;
};

/// Sum of trace_cost_integral over the gaps between 0, the merged instants and T.
double estimation_cost(const GramianCache& cache, const RiccatiSolution& riccati,
                       const std::vector<double>& merged);

CostBreakdown expected_cost(const GameSpec& spec, const GramianCache& cache,
                            const RiccatiSolution& riccati, const ObservationPlan& plan_p,
                            const ObservationPlan& plan_e);

/// Estimation plus price terms only; the evader maximizes, the pursuer minimizes.
double observation_cost(const GameSpec& spec, const GramianCache& cache,
                        const RiccatiSolution& riccati, const ObservationPlan& plan_p,
                        const ObservationPlan& plan_e);

struct ClosedLoopReport {
  std::vector<std::complex<double>> eigenvalues;  // of A - D K~
  double max_real_part = 0.0;
  bool hurwitz = false;
  std::optional<double> sampling_period;
  std::optional<double> sampled_spectral_radius;  // of e^{(A - D K~) h}
};

inline constexpr double kHurwitzMargin = 1e-9;

/// Spectrum of A - D K~. With a period h the spectral radius of the sampled
/// map is reported as well.
ClosedLoopReport closed_loop_eigs(const GameSpec& spec, const Matrix& K_inf,
                                  std::optional<double> h = std::nullopt);

struct MonotonicityReport {
  double term_coarse = 0.0;  // estimation term with the smaller set
  double term_fine = 0.0;    // estimation term with the superset
  bool holds = false;        // term_fine <= term_coarse within 1e-9 relative
};

/// Compares estimation terms of T1 and T2 where T2 contains T1. Throws NotSubset.
MonotonicityReport monotonicity_check(const GameSpec& spec, const GramianCache& cache,
                                      const RiccatiSolution& riccati,
                                      const std::vector<double>& T1,
                                      const std::vector<double>& T2);

}  // namespace peec
