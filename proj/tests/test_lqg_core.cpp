#include <gtest/gtest.h>

#include <random>

#include "peec/error.hpp"
#include "peec/lqg_core.hpp"
#include "test_support.hpp"

namespace peec {
namespace {

using testing::pursuit_spec;
using testing::scalar_spec;

double max_node_error(const RiccatiSolution& coarse, const RiccatiSolution& fine) {
  const int ratio = fine.grid().n_steps / coarse.grid().n_steps;
  double err = 0.0;
  for (int k = 0; k < coarse.grid().node_count(); ++k) {
    err = std::max(err, (coarse.K_node(k) - fine.K_node(k * ratio)).norm());
  }
  return err;
}

TEST(MatrixExp, ZeroAndNilpotent) {
  EXPECT_EQ(matrix_exp(Matrix::Zero(3, 3), 2.5), Matrix::Identity(3, 3));
  Matrix N(2, 2);
  N << 0, 1, 0, 0;
  Matrix expected(2, 2);
  expected << 1, 1.7, 0, 1;
  EXPECT_LT((matrix_exp(N, 1.7) - expected).norm(), 1e-15);
}

TEST(MatrixExp, MatchesScaledTaylorSeries) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix M(4, 4);
    for (int i = 0; i < 16; ++i) M(i / 4, i % 4) = g(rng);
    const Matrix E = matrix_exp(M, 0.7);
    EXPECT_LE((E - testing::taylor_exp(M, 0.7)).norm(), 1e-10 * E.norm());
  }
}

TEST(MatrixExp, RejectsNonFinite) {
  Matrix M = Matrix::Zero(2, 2);
  M(0, 1) = std::numeric_limits<double>::infinity();
  try {
    matrix_exp(M);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteEntry);
  }
}

TEST(Riccati, ZeroWeightsGiveZero) {
  GameSpec s = pursuit_spec(900.0);
  s.Q.setZero();
  s.QT.setZero();
  const auto ric = solve_riccati_finite(s, TimeGrid(s.T, 256));
  for (const auto& K : ric.nodes()) EXPECT_EQ(K.norm(), 0.0);
}

TEST(Riccati, ScalarMatchesTenfoldRefinement) {
  const GameSpec s = scalar_spec();
  const auto coarse = solve_riccati_finite(s, TimeGrid(s.T, 400));
  const auto fine = solve_riccati_finite(s, TimeGrid(s.T, 4000));
  EXPECT_LE(max_node_error(coarse, fine), 1e-6);
  EXPECT_EQ(coarse.K_node(400)(0, 0), 0.0);
}

TEST(Riccati, FourthOrderConvergence) {
  const GameSpec s = pursuit_spec(900.0);
  const auto coarse = solve_riccati_finite(s, TimeGrid(s.T, 16));
  const auto medium = solve_riccati_finite(s, TimeGrid(s.T, 32));
  const auto reference = solve_riccati_finite(s, TimeGrid(s.T, 32 * 4));
  const double e_coarse = max_node_error(coarse, reference);
  const double e_medium = max_node_error(medium, reference);
  EXPECT_GE(e_coarse / e_medium, 8.0) << e_coarse << " " << e_medium;
}

TEST(Riccati, PursuitSolutionIsSymmetricPsdWithExactTerminal) {
  const GameSpec s = pursuit_spec(900.0);
  const auto ric = solve_riccati_finite(s, TimeGrid(s.T, kDefaultRiccatiSteps));
  EXPECT_EQ(ric.K_node(kDefaultRiccatiSteps), s.QT);
  for (const auto& K : ric.nodes()) {
    ASSERT_TRUE(K.allFinite());
    EXPECT_LE((K - K.transpose()).norm(), 1e-10 * (1.0 + K.norm()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(K);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9 * K.norm());
  }
}

TEST(Riccati, InteriorResidualIsSmall) {
  const GameSpec s = pursuit_spec(900.0);
  const TimeGrid grid(s.T, 1024);
  const auto ric = solve_riccati_finite(s, grid);
  const double h = grid.step();
  for (int k = 1; k < grid.n_steps; k += 17) {
    const Matrix dK = (ric.K_node(k + 1) - ric.K_node(k - 1)) / (2 * h);
    const Matrix& K = ric.K_node(k);
    const Matrix rhs = -(s.Q + K * s.A + s.A.transpose() * K - K * ric.gap() * K);
    EXPECT_LE((dK - rhs).norm(), 100.0 * h * h * (1.0 + K.norm()));
  }
}

TEST(Riccati, NotDominantAndEscape) {
  GameSpec s = pursuit_spec(900.0);
  s.Rp = 2.0 * s.Re;
  try {
    solve_riccati_finite(s, TimeGrid(s.T, 64));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotDominantSpec);
  }

  GameSpec u = scalar_spec();
  u.A(0, 0) = 30.0;
  u.Bp(0, 0) = 1e-9;
  u.Be(0, 0) = 0.0;
  u.QT(0, 0) = 1.0;
  u.T = 1.0;
  try {
    solve_riccati_finite(u, TimeGrid(u.T, 2000));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::FiniteEscape);
  }
}

TEST(RiccatiAlgebraic, ScalarClosedForm) {
  const Matrix K = solve_riccati_algebraic(scalar_spec());
  EXPECT_NEAR(K(0, 0), std::sqrt(2.0), 1e-10);
}

TEST(RiccatiAlgebraic, ZeroWeightAndUnobservable) {
  GameSpec s = scalar_spec();
  s.Q.setZero();
  EXPECT_EQ(solve_riccati_algebraic(s).norm(), 0.0);

  GameSpec p = pursuit_spec(900.0);
  p.Q = Matrix::Zero(4, 4);
  p.Q(0, 0) = 1.0;  // second axis invisible
  try {
    solve_riccati_algebraic(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotObservable);
  }
}

TEST(RiccatiAlgebraic, PursuitResidualAndStability) {
  const GameSpec s = pursuit_spec(900.0);
  const Matrix K = solve_riccati_algebraic(s);
  const Matrix D = maneuverability_gap(s);
  EXPECT_LE(riccati_residual(s, D, K).norm(), 1e-8 * (1.0 + K.squaredNorm()));
  Eigen::EigenSolver<Matrix> es(s.A - D * K);
  EXPECT_LT(es.eigenvalues().real().maxCoeff(), 0.0);
}

TEST(Gramian, ZeroLagAndDriftFree) {
  GameSpec s = scalar_spec(1.5);
  const GramianCache cache(s, TimeGrid(s.T, 64));
  EXPECT_EQ(cache.sigma(0.0)(0, 0), 0.0);
  EXPECT_NEAR(cache.sigma(1.3)(0, 0), 1.3 * 2.25, 1e-13);
  EXPECT_THROW(cache.sigma(s.T + 0.1), Error);
  EXPECT_THROW(cache.sigma(-0.1), Error);
}

TEST(Gramian, PursuitMatchesTrapezoidQuadrature) {
  const GameSpec s = pursuit_spec(900.0);
  const GramianCache cache(s, TimeGrid(s.T, 64));
  const Matrix S = cache.sigma(1.0);
  const Matrix oracle = testing::trapezoid_gramian(s.A, s.C, 1.0, 10000);
  EXPECT_LE((S - oracle).norm(), 1e-8 * oracle.norm());
}

TEST(Gramian, MonotoneInLagAndTracePairing) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 30; ++trial) {
    GameSpec s = testing::random_dominant_spec(rng);
    s.A *= (trial % 2 == 0) ? 1.0 : 3.0;  // mix of stable and unstable drifts
    const GramianCache cache(s, TimeGrid(s.T, 64));
    const double tau = 0.3 * s.T;
    const Matrix S1 = cache.sigma(tau);
    const Matrix S2 = cache.sigma(tau + 0.2);
    Eigen::SelfAdjointEigenSolver<Matrix> es(S2 - S1);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9 * (1.0 + S2.norm()));

    const Eigen::Index n = s.state_dim();
    Matrix L(n, n);
    for (Eigen::Index i = 0; i < n * n; ++i) L(i / n, i % n) = g(rng);
    const Matrix Phi = L * L.transpose();
    EXPECT_LE((S1 * Phi).trace(), (S2 * Phi).trace() + 1e-9);
  }
}

TEST(Phi, EqualClassVanishesAndScalarComposes) {
  GameSpec eq = pursuit_spec(900.0);
  eq.Rp = eq.Re;
  const auto ric_eq = solve_riccati_finite(eq, TimeGrid(eq.T, 128));
  for (double t : {0.0, 1.234, 6.0}) EXPECT_EQ(phi_at(ric_eq, t).norm(), 0.0);

  const GameSpec s = scalar_spec();
  const auto ric = solve_riccati_finite(s, TimeGrid(s.T, 400));
  const auto ref = solve_riccati_finite(s, TimeGrid(s.T, 4000));
  const double K0 = ref.K_node(0)(0, 0);
  EXPECT_NEAR(phi_at(ric, 0.0)(0, 0), 0.5 * K0 * K0, 1e-6);
  EXPECT_THROW(phi_at(ric, 2.5), Error);
}

TEST(TraceCost, EmptyConstantAndAdditive) {
  const double c = 1.7;
  const GameSpec s = scalar_spec(c);
  const TimeGrid grid(s.T, 512);
  const auto ric = stationary_solution(s, Matrix::Constant(1, 1, std::sqrt(2.0)), grid);
  const GramianCache cache(s, grid);
  EXPECT_EQ(trace_cost_integral(cache, ric, 0.7, 0.7, 0.2), 0.0);
  // phi = 2 * 0.5 = 1
  const double delta = 1.3;
  EXPECT_NEAR(trace_cost_integral(cache, ric, 0.3, 0.3 + delta, 0.3), c * c * delta * delta / 2,
              1e-12);

  const GameSpec p = pursuit_spec(900.0);
  const TimeGrid pg(p.T, 1024);
  const auto pr = solve_riccati_finite(p, pg);
  const GramianCache pc(p, pg);
  const double whole = trace_cost_integral(pc, pr, 1.01, 5.3, 0.4);
  const double split = trace_cost_integral(pc, pr, 1.01, 2.77, 0.4) +
                       trace_cost_integral(pc, pr, 2.77, 5.3, 0.4);
  EXPECT_GT(whole, 0.0);
  EXPECT_LE(std::abs(whole - split), 1e-9 * whole);
  EXPECT_THROW(trace_cost_integral(pc, pr, 0.3, 1.0, 0.5), Error);
  EXPECT_THROW(trace_cost_integral(pc, pr, 1.0, 6.5, 0.0), Error);
}

}  // namespace
}  // namespace peec
