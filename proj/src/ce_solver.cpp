#include "peec/ce_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

#include <boost/math/quadrature/gauss.hpp>

#include "peec/detail/quadrature.hpp"
#include "peec/error.hpp"

namespace peec {
namespace {

constexpr double kCollapseRel = 1e-9;
constexpr double kTieRel = 1e-9;
constexpr double kFoTolRel = 1e-4;

double price(double O, int count) { return count == 0 ? 0.0 : O * count; }

long floor_ratio(double value, double Op, long cap) {
  if (std::isinf(Op)) return 0;
  const double r = std::floor(value / Op);
  if (!(r < static_cast<double>(cap))) return cap;
  return std::max(0L, static_cast<long>(r));
}

constexpr double kTerminalGapRel = 1e-7;

struct Chain {
  bool broken = false;
  std::vector<double> points;  // t_0 = 0, t_1, ..., t_{N+1}
};

Chain chain_from(const GramianCache& cache, const RiccatiSolution& riccati, int count, double t1,
                 double eps_inner) {
  Chain c;
  c.points.reserve(static_cast<std::size_t>(count) + 2);
  c.points.push_back(0.0);
  c.points.push_back(t1);
  for (int i = 1; i <= count; ++i) {
    const auto next = next_instant(cache, riccati, c.points[i - 1], c.points[i], eps_inner);
    if (!next) {
      c.broken = true;
      return c;
    }
    c.points.push_back(*next);
  }
  return c;
}

}  // namespace

ObservationPlan make_plan(std::vector<double> instants, double T) {
  std::sort(instants.begin(), instants.end());
  const double tol = kCollapseRel * T;
  ObservationPlan plan;
  for (double t : instants) {
    if (!(t > tol && t < T - tol)) continue;
    if (!plan.instants.empty() && t - plan.instants.back() <= tol) continue;
    plan.instants.push_back(t);
  }
  return plan;
}

void check_plan(const ObservationPlan& plan, double T) {
  double prev = 0.0;
  for (double t : plan.instants) {
    if (!std::isfinite(t) || !(t > prev) || !(t < T)) {
      std::ostringstream os;
      os << "instant " << t << " is not strictly increasing inside (0, " << T << ")";
      throw Error(ErrorCode::InvalidPlan, os.str());
    }
    prev = t;
  }
}

std::vector<double> merge_instants(const ObservationPlan& p, const ObservationPlan& e, double T) {
  check_plan(p, T);
  check_plan(e, T);
  std::vector<double> all = p.instants;
  all.insert(all.end(), e.instants.begin(), e.instants.end());
  return make_plan(std::move(all), T).instants;
}

double lhs_lp(const GramianCache& cache, const RiccatiSolution& riccati, double t_prev,
              double t_i) {
  if (!(t_prev <= t_i)) {
    throw Error(ErrorCode::OutOfRange, "lhs_lp needs t_prev <= t_i");
  }
  if (t_i == t_prev) return 0.0;
  return detail::trace_product(cache.sigma(t_i - t_prev), phi_at(riccati, t_i));
}

double rhs_rp(const GramianCache& cache, const RiccatiSolution& riccati, double t_i,
              double t_end) {
  if (!(t_i <= t_end) || t_i < 0.0) {
    throw Error(ErrorCode::OutOfRange, "rhs_rp needs 0 <= t_i <= t_end");
  }
  if (t_end > riccati.grid().T * (1.0 + 1e-12)) {
    throw Error(ErrorCode::OutOfRange, "rhs_rp end beyond the horizon");
  }
  double total = 0.0;
  detail::walk_panels(cache, riccati, detail::Kernel::NoiseRate, t_i, t_i,
                      std::min(t_end, riccati.grid().T), [&](const detail::Panel& p) {
                        total += p.value;
                        return true;
                      });
  return total;
}

std::optional<double> next_instant(const GramianCache& cache, const RiccatiSolution& riccati,
                                   double t_prev, double t_i, double eps_inner) {
  const double T = riccati.grid().T;
  if (!(t_prev <= t_i) || !(t_i <= T)) {
    throw Error(ErrorCode::OutOfRange, "next_instant needs t_prev <= t_i <= T");
  }
  const double target = lhs_lp(cache, riccati, t_prev, t_i);
  if (target <= 0.0) return t_i;

  // March the cumulative right-hand integral panel by panel and stop in the
  // panel where it first reaches the target.
  double cumulative = 0.0;
  bool found = false;
  double left = t_i;
  double right = t_i;
  double before = 0.0;
  Matrix S_left;
  detail::walk_panels(cache, riccati, detail::Kernel::NoiseRate, t_i, t_i, T,
                      [&](const detail::Panel& p) {
                        if (cumulative + p.value >= target) {
                          found = true;
                          left = p.left;
                          right = p.right;
                          before = cumulative;
                          S_left = *p.S_left;
                          return false;
                        }
                        cumulative += p.value;
                        return true;
                      });
  if (!found) return std::nullopt;

  double lo = left;
  double hi = right;
  while (hi - lo > eps_inner) {
    const double mid = 0.5 * (lo + hi);
    const double value =
        before + detail::partial_panel(cache, riccati, detail::Kernel::NoiseRate, left, S_left, mid);
    if (value < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

InstantSearch binary_search_instants(const GramianCache& cache, const RiccatiSolution& riccati,
                                     int count, double eps) {
  if (count < 1) throw Error(ErrorCode::OutOfRange, "binary search needs at least one instant");
  if (!(eps > 0.0)) throw Error(ErrorCode::OutOfRange, "eps must be positive");
  const double T = riccati.grid().T;
  const double eps_inner = eps / 10.0;
  const double eps_terminal = 10.0 * eps;

  InstantSearch out;
  double t_low = 0.0;
  double t_up = T;
  double t1 = 0.5 * (t_low + t_up);
  bool accepted = false;
  while (std::abs(t_up - t_low) > eps) {
    ++out.outer_iterations;
    const Chain c = chain_from(cache, riccati, count, t1, eps_inner);
    if (c.broken) {
      // Some r_p(t_i, T) < l_p(t_{i-1}, t_i): the first instant is too late.
      t_up = t1;
      t1 = 0.5 * (t_low + t1);
    } else if (c.points.back() < T - eps_terminal) {
      // The chain ends before T: the first instant is too early.
      t_low = t1;
      t1 = 0.5 * (t_up + t1);
    } else {
      t_low = t1;
      accepted = true;
      break;
    }
  }

  Chain best = chain_from(cache, riccati, count, accepted ? t_low : 0.5 * (t_low + t_up), eps_inner);
  if (best.broken) best = chain_from(cache, riccati, count, t_low, eps_inner);
  if (best.broken) {
    throw Error(ErrorCode::ChainBroken,
                "first-order chain broke at the converged first instant; tighten the quadrature");
  }

  // The chain-end window is in time units; where phi is steep near T it can
  // still leave a terminal gap r_p(t_N, T) - l_p(t_{N-1}, t_N) well above the
  // first-order tolerance. Keep halving the same bracket until the gap is small.
  auto terminal_gap = [&](const Chain& c) {
    const double t_N = c.points[c.points.size() - 2];
    const double l = lhs_lp(cache, riccati, c.points[c.points.size() - 3], t_N);
    return std::pair{rhs_rp(cache, riccati, t_N, T) - l, l};
  };
  const double polish_inner = eps_inner * 1e-4;
  for (auto [gap, l] = terminal_gap(best);
       gap > kTerminalGapRel * (1.0 + l) && t_up - t_low > 1e-13 * T;) {
    ++out.polish_iterations;
    const double mid = 0.5 * (t_low + t_up);
    Chain c = chain_from(cache, riccati, count, mid, polish_inner);
    if (c.broken) {
      t_up = mid;
      continue;
    }
    t_low = mid;
    best = std::move(c);
    std::tie(gap, l) = terminal_gap(best);
  }
  out.instants.assign(best.points.begin() + 1, best.points.end() - 1);
  out.chain_end = best.points.back();
  return out;
}

double objective_F(const GramianCache& cache, const RiccatiSolution& riccati,
                   const std::vector<double>& instants, double Op) {
  const double T = riccati.grid().T;
  check_plan(ObservationPlan{instants, false}, T);
  double total = 0.0;
  double prev = 0.0;
  for (double t : instants) {
    total += trace_cost_integral(cache, riccati, prev, t, prev);
    prev = t;
  }
  total += trace_cost_integral(cache, riccati, prev, T, prev);
  return total + price(Op, static_cast<int>(instants.size()));
}

std::vector<double> first_order_residuals(const GramianCache& cache,
                                          const RiccatiSolution& riccati,
                                          const std::vector<double>& instants) {
  const double T = riccati.grid().T;
  std::vector<double> out;
  out.reserve(instants.size());
  for (std::size_t i = 0; i < instants.size(); ++i) {
    const double prev = i == 0 ? 0.0 : instants[i - 1];
    const double next = i + 1 == instants.size() ? T : instants[i + 1];
    out.push_back(std::abs(lhs_lp(cache, riccati, prev, instants[i]) -
                           rhs_rp(cache, riccati, instants[i], next)));
  }
  return out;
}

long np_upper_bound(const GramianCache& cache, const RiccatiSolution& riccati, double Op) {
  if (Op == 0.0) {
    throw Error(ErrorCode::ZeroCost, "free observations: the pursuer observes continuously");
  }
  if (std::isinf(Op)) return 0;
  const double T = riccati.grid().T;
  return floor_ratio(trace_cost_integral(cache, riccati, 0.0, T, 0.0), Op,
                     std::numeric_limits<long>::max() / 2);
}

long tightened_bound(double F_k, double Op) {
  return floor_ratio(F_k, Op, std::numeric_limits<long>::max() / 2);
}

double default_eps(double T) { return 1e-5 * std::max(1.0, T); }

CESolution solve_ce_game(const GameSpec& spec, const GramianCache& cache,
                         const RiccatiSolution& riccati, const SolverOptions& opts) {
  const double T = riccati.grid().T;
  CESolution sol;
  sol.eps = opts.eps > 0.0 ? opts.eps : default_eps(T);
  sol.dominance = classify_dominance(spec).kind;

  if (sol.dominance == Dominance::NotDominant) {
    throw Error(ErrorCode::NotDominantSpec,
                "evader out-maneuvers the pursuer; the game value is unbounded");
  }
  if (sol.dominance == Dominance::Equal) {
    // phi vanishes, so only prices remain and neither player observes.
    sol.F_table[0] = 0.0;
    sol.instants_table[0] = {};
    sol.N_upper = 0;
    sol.N_upper_tight = 0;
    sol.objective = 0.0;
    sol.fo_tolerance = kFoTolRel;
    sol.reason = "equal maneuverability";
    return sol;
  }

  sol.reason = "pursuer dominant; evader conceals";
  const double F0 = objective_F(cache, riccati, {}, spec.Op);
  sol.F_table[0] = F0;
  sol.instants_table[0] = {};

  if (spec.Op == 0.0) {
    sol.pursuer_plan.observe_always = true;
    sol.objective = 0.0;
    sol.fo_tolerance = kFoTolRel;
    sol.reason = "free observations; pursuer observes continuously";
    return sol;
  }

  const long bound = std::min(np_upper_bound(cache, riccati, spec.Op), opts.max_count);
  sol.N_upper = bound;
  long tight = bound;
  for (long count = 1; count <= tight; ++count) {
    const InstantSearch search =
        binary_search_instants(cache, riccati, static_cast<int>(count), sol.eps);
    const std::vector<double> instants = make_plan(search.instants, T).instants;
    const double F = objective_F(cache, riccati, instants, spec.Op);
    sol.F_table[static_cast<int>(count)] = F;
    sol.instants_table[static_cast<int>(count)] = instants;
    tight = std::min(tight, tightened_bound(F, spec.Op));
  }
  sol.N_upper_tight = tight;

  double best = std::numeric_limits<double>::infinity();
  for (const auto& [count, F] : sol.F_table) best = std::min(best, F);
  for (const auto& [count, F] : sol.F_table) {
    if (F <= best + kTieRel * std::abs(best)) {
      sol.pursuer_plan.instants = sol.instants_table[count];
      break;
    }
  }
  sol.objective = objective_F(cache, riccati, sol.pursuer_plan.instants, spec.Op);
  sol.first_order_residuals = first_order_residuals(cache, riccati, sol.pursuer_plan.instants);
  sol.fo_tolerance = kFoTolRel * (1.0 + std::abs(sol.objective));
  return sol;
}

namespace {

Matrix stationary_phi(const GameSpec& spec, const Matrix& K_inf) {
  const Matrix phi = K_inf * maneuverability_gap(spec) * K_inf;
  return 0.5 * (phi + phi.transpose());
}

// int_0^dT Tr[Sigma(t) phi] dt by composite 20-point Gauss-Legendre.
double sigma_trace_integral(const Matrix& A, const Matrix& noise, const Matrix& phi, double dT) {
  constexpr int kPanels = 16;
  const double w = dT / kPanels;
  double total = 0.0;
  for (int j = 0; j < kPanels; ++j) {
    total += boost::math::quadrature::gauss<double, 20>::integrate(
        [&](double t) {
          return detail::trace_product(van_loan_propagator(A, noise, t).gramian, phi);
        },
        j * w, (j + 1) * w);
  }
  return total;
}

}  // namespace

double periodic_average_cost(const GameSpec& spec, const Matrix& K_inf, double dT, double Op) {
  if (!(dT > 0.0)) throw Error(ErrorCode::OutOfRange, "period must be positive");
  const Matrix noise = spec.C * spec.C.transpose();
  return (sigma_trace_integral(spec.A, noise, stationary_phi(spec, K_inf), dT) + Op) / dT;
}

double periodic_condition(const GameSpec& spec, const Matrix& K_inf, double dT, double Op) {
  if (dT <= 0.0) return -Op;
  const Matrix noise = spec.C * spec.C.transpose();
  const Matrix phi = stationary_phi(spec, K_inf);
  const double at_end = detail::trace_product(van_loan_propagator(spec.A, noise, dT).gramian, phi);
  return dT * at_end - sigma_trace_integral(spec.A, noise, phi, dT) - Op;
}

PeriodicSolution periodic_period(const GameSpec& spec, const Matrix& K_inf, double Op) {
  if (classify_dominance(spec).kind != Dominance::PursuerDominant) {
    throw Error(ErrorCode::NotDominantSpec, "periodic sampling needs a pursuer-dominant spec");
  }
  if (!(Op > 0.0) || std::isinf(Op)) {
    throw Error(ErrorCode::OutOfRange, "periodic sampling needs a finite positive price");
  }
  auto g = [&](double dT) { return periodic_condition(spec, K_inf, dT, Op); };

  double lo = 0.0;
  double hi = 1.0;
  int doublings = 0;
  while (g(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 200) {
      throw Error(ErrorCode::NoBracket, "Tr[Sigma phi] never outgrows the price");
    }
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = g(mid);
    if (v == 0.0) {
      lo = hi = mid;
      break;
    }
    (v < 0.0 ? lo : hi) = mid;
  }

  PeriodicSolution out;
  out.Op = Op;
  out.dT_star = 0.5 * (lo + hi);
  out.residual = g(out.dT_star);
  out.avg_cost = periodic_average_cost(spec, K_inf, out.dT_star, Op);
  const Matrix E = matrix_exp(spec.A, out.dT_star);
  const Matrix rate = E * spec.C * spec.C.transpose() * E.transpose();
  out.second_derivative =
      detail::trace_product(rate, stationary_phi(spec, K_inf)) / out.dT_star;
  return out;
}

}  // namespace peec
