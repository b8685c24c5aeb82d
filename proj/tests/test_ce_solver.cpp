#include <gtest/gtest.h>

#include <cmath>

#include "peec/ce_solver.hpp"
#include "peec/error.hpp"
#include "test_support.hpp"

namespace peec {
namespace {

using testing::pursuit_spec;
using testing::scalar_spec;

// Scalar A = 0 game frozen at K~ = sqrt(2): phi = 1 everywhere, Sigma(tau) = c^2 tau.
struct ConstantPhi {
  GameSpec spec;
  TimeGrid grid;
  RiccatiSolution ric;
  GramianCache cache;

  explicit ConstantPhi(double c = 1.3, double T = 2.0, int steps = 400)
      : spec(scalar_spec(c, T)),
        grid(T, steps),
        ric(stationary_solution(spec, Matrix::Constant(1, 1, std::sqrt(2.0)), grid)),
        cache(spec, grid) {}
};

struct Pursuit {
  GameSpec spec;
  TimeGrid grid;
  RiccatiSolution ric;
  GramianCache cache;

  explicit Pursuit(double Op, int steps = kDefaultRiccatiSteps)
      : spec(pursuit_spec(Op)),
        grid(spec.T, steps),
        ric(solve_riccati_finite(spec, grid)),
        cache(spec, grid) {}
};

TEST(Plan, CollapsesDuplicatesAndDropsOutside) {
  const auto p = make_plan({3.0, 1.0, 1.0 + 1e-12, -0.5, 6.0, 2.0}, 6.0);
  EXPECT_EQ(p.instants, (std::vector<double>{1.0, 2.0, 3.0}));
  EXPECT_THROW(check_plan(ObservationPlan{{2.0, 1.0}, false}, 6.0), Error);
  EXPECT_THROW(check_plan(ObservationPlan{{0.0}, false}, 6.0), Error);
  EXPECT_NO_THROW(check_plan(ObservationPlan{{0.5, 5.9}, false}, 6.0));
  const auto merged = merge_instants(ObservationPlan{{1.0, 2.0}, false},
                                     ObservationPlan{{2.0, 4.0}, false}, 6.0);
  EXPECT_EQ(merged, (std::vector<double>{1.0, 2.0, 4.0}));
}

TEST(FirstOrder, ConstantWeightClosedForms) {
  const ConstantPhi f(1.3);
  const double c2 = 1.3 * 1.3;
  EXPECT_EQ(lhs_lp(f.cache, f.ric, 0.7, 0.7), 0.0);
  EXPECT_NEAR(lhs_lp(f.cache, f.ric, 0.2, 0.9), c2 * 0.7, 1e-12);
  EXPECT_EQ(rhs_rp(f.cache, f.ric, 0.9, 0.9), 0.0);
  EXPECT_NEAR(rhs_rp(f.cache, f.ric, 0.9, 1.6), c2 * 0.7, 1e-12);
}

TEST(FirstOrder, StationaryPursuitSidesAgree) {
  const GameSpec s = pursuit_spec(900.0);
  const TimeGrid grid(s.T, 1024);
  const auto ric = stationary_solution(s, solve_riccati_algebraic(s), grid);
  const GramianCache cache(s, grid);
  for (double delta : {0.3, 1.1, 2.4}) {
    const double l = lhs_lp(cache, ric, 1.0, 1.0 + delta);
    const double r = rhs_rp(cache, ric, 2.0, 2.0 + delta);
    EXPECT_LE(std::abs(l - r), 1e-9 * l) << delta;
  }
}

TEST(FirstOrder, RhsNondecreasingInEnd) {
  const Pursuit p(900.0, 1024);
  double prev = 0.0;
  for (double t = 1.5; t <= 6.0; t += 0.173) {
    const double v = rhs_rp(p.cache, p.ric, 1.5, t);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(NextInstant, ZeroTargetEqualSpacingAndShortfall) {
  const ConstantPhi f;
  EXPECT_EQ(next_instant(f.cache, f.ric, 0.4, 0.4, 1e-7).value(), 0.4);
  const auto t = next_instant(f.cache, f.ric, 0.2, 0.7, 1e-9);
  ASSERT_TRUE(t.has_value());
  EXPECT_NEAR(*t, 1.2, 1e-8);
  EXPECT_FALSE(next_instant(f.cache, f.ric, 0.0, 1.5, 1e-9).has_value());
}

double brute_1d(const ConstantPhi& f, int points) {
  double best = std::numeric_limits<double>::infinity();
  double arg = 0.0;
  for (int i = 1; i < points - 1; ++i) {
    const double t = f.spec.T * i / (points - 1);
    const double v = objective_F(f.cache, f.ric, {t}, 1.0);
    if (v < best) {
      best = v;
      arg = t;
    }
  }
  return arg;
}

TEST(BinarySearch, SingleInstantIsMidpoint) {
  const ConstantPhi f;
  const auto r = binary_search_instants(f.cache, f.ric, 1, 1e-6);
  ASSERT_EQ(r.instants.size(), 1u);
  EXPECT_NEAR(r.instants[0], 1.0, 1e-5);
  EXPECT_NEAR(brute_1d(f, 201), r.instants[0], f.spec.T / 200);
  EXPECT_LE(r.outer_iterations, static_cast<int>(std::ceil(std::log2(f.spec.T / 1e-6))));
}

TEST(BinarySearch, ThreeInstantsAreEquallySpaced) {
  const ConstantPhi f;
  const auto r = binary_search_instants(f.cache, f.ric, 3, 1e-6);
  ASSERT_EQ(r.instants.size(), 3u);
  EXPECT_NEAR(r.instants[0], 0.5, 1e-5);
  EXPECT_NEAR(r.instants[1], 1.0, 1e-5);
  EXPECT_NEAR(r.instants[2], 1.5, 1e-5);

  // 3-D grid search of the objective on a 41-point lattice.
  const int pts = 41;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> arg;
  for (int i = 1; i < pts; ++i)
    for (int j = i + 1; j < pts; ++j)
      for (int k = j + 1; k < pts - 1; ++k) {
        const std::vector<double> cand{2.0 * i / (pts - 1), 2.0 * j / (pts - 1),
                                       2.0 * k / (pts - 1)};
        const double v = objective_F(f.cache, f.ric, cand, 1.0);
        if (v < best) {
          best = v;
          arg = cand;
        }
      }
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(arg[static_cast<std::size_t>(i)], r.instants[static_cast<std::size_t>(i)], 0.051);
  EXPECT_LE(objective_F(f.cache, f.ric, r.instants, 1.0), best * (1.0 + 1e-9));
}

TEST(Objective, EmptyPlanAndDenseFreeObservations) {
  const Pursuit p(900.0, 1024);
  EXPECT_DOUBLE_EQ(objective_F(p.cache, p.ric, {}, 900.0),
                   trace_cost_integral(p.cache, p.ric, 0.0, 6.0, 0.0));
  double prev = std::numeric_limits<double>::infinity();
  for (int m : {8, 64, 512}) {
    std::vector<double> dense;
    for (int k = 1; k < m; ++k) dense.push_back(6.0 * k / m);
    const double v = objective_F(p.cache, p.ric, dense, 0.0);
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, 1e-2 * objective_F(p.cache, p.ric, {}, 0.0));
}

TEST(Objective, OptimalCountBeatsNeighbours) {
  const Pursuit p(900.0);
  const auto sol = solve_ce_game(p.spec, p.cache, p.ric);
  const int n = sol.pursuer_plan.count();
  ASSERT_GE(n, 1);
  for (int k : {n - 1, n + 1}) {
    const auto other = k == 0 ? std::vector<double>{}
                              : binary_search_instants(p.cache, p.ric, k, default_eps(6.0)).instants;
    EXPECT_LT(sol.objective, objective_F(p.cache, p.ric, other, 900.0)) << k;
  }
}

TEST(Bounds, InfiniteAndLargePrices) {
  const Pursuit p(900.0, 1024);
  EXPECT_EQ(np_upper_bound(p.cache, p.ric, kInfinitePrice), 0);
  const double F0 = trace_cost_integral(p.cache, p.ric, 0.0, 6.0, 0.0);
  EXPECT_EQ(np_upper_bound(p.cache, p.ric, 1.01 * F0), 0);
  EXPECT_EQ(np_upper_bound(p.cache, p.ric, F0 / 3.5), 3);
  EXPECT_THROW(np_upper_bound(p.cache, p.ric, 0.0), Error);
  EXPECT_EQ(tightened_bound(95.0, 10.0), 9);

  GameSpec big = pursuit_spec(1.01 * F0);
  const auto ric = solve_riccati_finite(big, TimeGrid(big.T, 1024));
  const GramianCache cache(big, TimeGrid(big.T, 1024));
  const auto sol = solve_ce_game(big, cache, ric);
  EXPECT_EQ(sol.pursuer_plan.count(), 0);
}

TEST(SolveGame, InfinitePriceNeverObserves) {
  const Pursuit p(kInfinitePrice);
  const auto sol = solve_ce_game(p.spec, p.cache, p.ric);
  EXPECT_EQ(sol.pursuer_plan.count(), 0);
  EXPECT_TRUE(sol.evader_plan.empty());
  EXPECT_EQ(sol.N_upper.value(), 0);
}

TEST(SolveGame, EqualClassAndNotDominant) {
  GameSpec s = pursuit_spec(5.0);
  s.Rp = s.Re;
  s.Oe = 3.0;
  const TimeGrid grid(s.T, 256);
  const auto ric = solve_riccati_finite(s, grid);
  const GramianCache cache(s, grid);
  const auto sol = solve_ce_game(s, cache, ric);
  EXPECT_TRUE(sol.pursuer_plan.empty());
  EXPECT_TRUE(sol.evader_plan.empty());
  EXPECT_EQ(sol.objective, 0.0);
  EXPECT_EQ(sol.reason, "equal maneuverability");

  GameSpec bad = pursuit_spec(5.0);
  bad.Rp = 2.0 * bad.Re;
  try {
    solve_ce_game(bad, cache, ric);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotDominantSpec);
  }
}

TEST(SolveGame, FreeObservationMeansObserveAlways) {
  const Pursuit p(0.0, 512);
  const auto sol = solve_ce_game(p.spec, p.cache, p.ric);
  EXPECT_TRUE(sol.pursuer_plan.observe_always);
  EXPECT_FALSE(sol.N_upper.has_value());
}

TEST(SolveGame, RandomSpecsSatisfyOptimalityConditions) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 6; ++trial) {
    const GameSpec s = testing::random_dominant_spec(rng);
    const TimeGrid grid(s.T, 1024);
    const auto ric = solve_riccati_finite(s, grid);
    const GramianCache cache(s, grid);
    const auto sol = solve_ce_game(s, cache, ric);
    ASSERT_TRUE(sol.N_upper.has_value());
    EXPECT_LE(sol.pursuer_plan.count(), *sol.N_upper);
    EXPECT_LE(sol.pursuer_plan.count(), *sol.N_upper_tight);
    for (double r : sol.first_order_residuals) EXPECT_LE(r, sol.fo_tolerance);
    EXPECT_TRUE(sol.evader_plan.empty());
    // argmin of the table with ties to the smaller count
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [n, F] : sol.F_table) best = std::min(best, F);
    EXPECT_LE(sol.objective, best * (1 + 1e-9));
    for (const auto& [n, F] : sol.F_table) {
      if (n < sol.pursuer_plan.count()) EXPECT_GT(F, best + 1e-9 * std::abs(best));
    }
  }
}

TEST(SolveGame, CheaperObservationsNeverCostMore) {
  const GameSpec base = pursuit_spec(900.0);
  const TimeGrid grid(base.T, 1024);
  const auto ric = solve_riccati_finite(base, grid);
  const GramianCache cache(base, grid);
  double prev = std::numeric_limits<double>::infinity();
  for (double Op : {5000.0, 2000.0, 900.0, 300.0, 100.0}) {
    GameSpec s = base;
    s.Op = Op;
    const double v = solve_ce_game(s, cache, ric).objective;
    EXPECT_LE(v, prev);
    prev = v;
  }
}

TEST(Periodic, ScalarClosedForm) {
  const double c = 1.3;
  const GameSpec s = scalar_spec(c);
  const Matrix K = Matrix::Constant(1, 1, std::sqrt(2.0));
  for (double Op : {0.05, 0.7, 3.0}) {
    const auto sol = periodic_period(s, K, Op);
    const double expected = std::sqrt(2.0 * Op / (1.0 * c * c));
    EXPECT_NEAR(sol.dT_star, expected, 1e-8 * expected);
    EXPECT_LE(std::abs(sol.residual), 1e-8 * (1.0 + Op));
    EXPECT_GT(sol.second_derivative, 0.0);
  }
  EXPECT_LT(periodic_period(s, K, 1e-8).dT_star, 1e-3);
}

TEST(Periodic, PursuitLocalMinimumAndMonotoneCondition) {
  const GameSpec s = pursuit_spec(900.0);
  const Matrix K = solve_riccati_algebraic(s);
  const auto sol = periodic_period(s, K, 900.0);
  EXPECT_LE(std::abs(sol.residual), 1e-8 * 901.0);
  EXPECT_GT(sol.second_derivative, 0.0);
  EXPECT_LE(sol.avg_cost, periodic_average_cost(s, K, 0.9 * sol.dT_star, 900.0));
  EXPECT_LE(sol.avg_cost, periodic_average_cost(s, K, 1.1 * sol.dT_star, 900.0));
  double prev = -std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 40; ++i) {
    const double g = periodic_condition(s, K, sol.dT_star * 2.0 * i / 40, 900.0);
    EXPECT_GT(g, prev);
    prev = g;
  }
}

TEST(Periodic, ZeroWeightHasNoBracket) {
  GameSpec s = scalar_spec();
  try {
    periodic_period(s, Matrix::Zero(1, 1), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoBracket);
  }
}

}  // namespace
}  // namespace peec
