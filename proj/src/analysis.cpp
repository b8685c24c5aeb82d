#include "peec/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "peec/error.hpp"

namespace peec {
namespace {

double price(double O, int count) { return count == 0 ? 0.0 : O * count; }

std::vector<double> finite_merge(const GameSpec& spec, const ObservationPlan& p,
                                 const ObservationPlan& e) {
  if (p.observe_always || e.observe_always) {
    throw Error(ErrorCode::InvalidPlan, "continuous observation has no finite cost breakdown");
  }
  check_plan(p, spec.T);
  check_plan(e, spec.T);
  return merge_instants(p, e, spec.T);
}

}  // namespace

double estimation_cost(const GramianCache& cache, const RiccatiSolution& riccati,
                       const std::vector<double>& merged) {
  const double T = riccati.grid().T;
  double total = 0.0;
  double prev = 0.0;
  for (double t : merged) {
    total += trace_cost_integral(cache, riccati, prev, t, prev);
    prev = t;
  }
  return total + trace_cost_integral(cache, riccati, prev, T, prev);
}

CostBreakdown expected_cost(const GameSpec& spec, const GramianCache& cache,
                            const RiccatiSolution& riccati, const ObservationPlan& plan_p,
                            const ObservationPlan& plan_e) {
  const auto merged = finite_merge(spec, plan_p, plan_e);
  CostBreakdown c;
  c.estimation_term = estimation_cost(cache, riccati, merged);
  c.obs_price_term = price(spec.Op, plan_p.count()) - price(spec.Oe, plan_e.count());
  c.baseline_term = spec.x0.dot(riccati.K_node(0) * spec.x0) + riccati_noise_integral(cache, riccati);
  c.total = c.estimation_term + c.obs_price_term + c.baseline_term;
  return c;
}

double observation_cost(const GameSpec& spec, const GramianCache& cache,
                        const RiccatiSolution& riccati, const ObservationPlan& plan_p,
                        const ObservationPlan& plan_e) {
  const auto merged = finite_merge(spec, plan_p, plan_e);
  return estimation_cost(cache, riccati, merged) + price(spec.Op, plan_p.count()) -
         price(spec.Oe, plan_e.count());
}

ClosedLoopReport closed_loop_eigs(const GameSpec& spec, const Matrix& K_inf,
                                  std::optional<double> h) {
  const Matrix closed = spec.A - maneuverability_gap(spec) * K_inf;
  Eigen::EigenSolver<Matrix> es(closed, false);
  ClosedLoopReport r;
  r.max_real_part = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    r.eigenvalues.push_back(es.eigenvalues()(i));
    r.max_real_part = std::max(r.max_real_part, es.eigenvalues()(i).real());
  }
  std::sort(r.eigenvalues.begin(), r.eigenvalues.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  r.hurwitz = r.max_real_part < -kHurwitzMargin;
  if (h) {
    if (!(*h > 0.0)) throw Error(ErrorCode::OutOfRange, "sampling period must be positive");
    r.sampling_period = *h;
    Eigen::EigenSolver<Matrix> sampled(matrix_exp(closed, *h), false);
    double rho = 0.0;
    for (Eigen::Index i = 0; i < sampled.eigenvalues().size(); ++i) {
      rho = std::max(rho, std::abs(sampled.eigenvalues()(i)));
    }
    r.sampled_spectral_radius = rho;
  }
  return r;
}

MonotonicityReport monotonicity_check(const GameSpec& spec, const GramianCache& cache,
                                      const RiccatiSolution& riccati,
                                      const std::vector<double>& T1,
                                      const std::vector<double>& T2) {
  const auto coarse = make_plan(T1, spec.T).instants;
  const auto fine = make_plan(T2, spec.T).instants;
  const double tol = 1e-9 * spec.T;
  for (double t : coarse) {
    const bool found = std::any_of(fine.begin(), fine.end(),
                                   [&](double s) { return std::abs(s - t) <= tol; });
    if (!found) throw Error(ErrorCode::NotSubset, "instant missing from the finer set");
  }
  MonotonicityReport r;
  r.term_coarse = estimation_cost(cache, riccati, coarse);
  r.term_fine = estimation_cost(cache, riccati, fine);
  r.holds = r.term_fine <= r.term_coarse + 1e-9 * std::max(1.0, std::abs(r.term_coarse));
  return r;
}

}  // namespace peec
