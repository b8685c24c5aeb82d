#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "peec/error.hpp"
#include "peec/lqg_core.hpp"

namespace peec {
namespace {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Right-hand side in reversed time s = T - t:  dK/ds = Q + K A + A'K - K D K.
Matrix reversed_rhs(const Matrix& A, const Matrix& Q, const Matrix& D, const Matrix& K) {
  const Matrix KA = K * A;
  return Q + KA + KA.transpose() - K * D * K;
}

Matrix rk4_step(const Matrix& A, const Matrix& Q, const Matrix& D, const Matrix& K, double h) {
  const Matrix k1 = reversed_rhs(A, Q, D, K);
  const Matrix k2 = reversed_rhs(A, Q, D, K + 0.5 * h * k1);
  const Matrix k3 = reversed_rhs(A, Q, D, K + 0.5 * h * k2);
  const Matrix k4 = reversed_rhs(A, Q, D, K + h * k3);
  return symmetrized(K + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

Matrix psd_sqrt(const Matrix& Q) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrized(Q));
  const Vector root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

// Solves A_cl' X + X A_cl = -R through the Kronecker-sum system (n <= ~20).
Matrix solve_lyapunov(const Matrix& A_cl, const Matrix& R) {
  const Eigen::Index n = A_cl.rows();
  const Matrix I = Matrix::Identity(n, n);
  Matrix L = Matrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // vec(A' X) = (I kron A') vec X ; vec(X A) = (A' kron I) vec X
      L.block(i * n, j * n, n, n) += I(i, j) * A_cl.transpose();
      L.block(i * n, j * n, n, n) += A_cl(j, i) * I;
    }
  }
  const Vector rhs = -Eigen::Map<const Vector>(R.data(), n * n);
  const Vector x = L.partialPivLu().solve(rhs);
  return symmetrized(Eigen::Map<const Matrix>(x.data(), n, n));
}

}  // namespace

TimeGrid::TimeGrid(double horizon, int steps) : T(horizon), n_steps(steps) {
  if (!(horizon > 0.0)) throw Error(ErrorCode::NonPositiveHorizon, "grid horizon must be positive");
  if (steps < 1) throw Error(ErrorCode::OutOfRange, "grid needs at least one step");
}

int TimeGrid::cell(double t) const {
  const double h = step();
  int k = static_cast<int>(std::floor(t / h));
  k = std::clamp(k, 0, n_steps - 1);
  while (k < n_steps - 1 && node(k + 1) <= t) ++k;
  while (k > 0 && node(k) > t) --k;
  return k;
}

RiccatiSolution::RiccatiSolution(TimeGrid grid, std::vector<Matrix> K, Matrix gap)
    : grid_(grid), K_(std::move(K)), gap_(std::move(gap)) {
  if (static_cast<int>(K_.size()) != grid_.node_count()) {
    throw Error(ErrorCode::DimensionMismatch, "Riccati node count does not match the grid");
  }
  phi_nodes_.reserve(K_.size());
  for (const auto& Kk : K_) phi_nodes_.push_back(symmetrized(Kk * gap_ * Kk));
  phi_mids_.reserve(K_.size() - 1);
  for (std::size_t k = 0; k + 1 < K_.size(); ++k) {
    const Matrix Km = 0.5 * (K_[k] + K_[k + 1]);
    phi_mids_.push_back(symmetrized(Km * gap_ * Km));
  }
}

Matrix RiccatiSolution::K_at(double t) const {
  const double slack = 1e-12 * grid_.T;
  if (!(t >= -slack && t <= grid_.T + slack)) {
    std::ostringstream os;
    os << "t = " << t << " outside [0, " << grid_.T << "]";
    throw Error(ErrorCode::OutOfRange, os.str());
  }
  t = std::clamp(t, 0.0, grid_.T);
  const int k = grid_.cell(t);
  const double w = (t - grid_.node(k)) / grid_.step();
  return (1.0 - w) * K_node(k) + w * K_node(k + 1);
}

Matrix phi_at(const RiccatiSolution& riccati, double t) {
  const Matrix K = riccati.K_at(t);
  return symmetrized(K * riccati.gap() * K);
}

RiccatiSolution solve_riccati_finite(const GameSpec& spec, const TimeGrid& grid) {
  const DominanceClass dom = classify_dominance(spec);
  if (dom.kind == Dominance::NotDominant) {
    throw Error(ErrorCode::NotDominantSpec,
                "evader out-maneuvers the pursuer; the Riccati solution may escape in finite time");
  }
  const Matrix& D = dom.gap;
  const double h = grid.step();
  std::vector<Matrix> K(static_cast<std::size_t>(grid.node_count()));
  K.back() = symmetrized(spec.QT);
  for (int k = grid.n_steps; k > 0; --k) {
    Matrix next = rk4_step(spec.A, spec.Q, D, K[static_cast<std::size_t>(k)], h);
    const double norm = next.norm();
    if (!std::isfinite(norm) || norm > kEscapeNormCap) {
      std::ostringstream os;
      os << "|K| exceeded " << kEscapeNormCap << " at t = " << grid.node(k - 1);
      throw Error(ErrorCode::FiniteEscape, os.str());
    }
    K[static_cast<std::size_t>(k - 1)] = std::move(next);
  }
  return RiccatiSolution(grid, std::move(K), D);
}

RiccatiSolution stationary_solution(const GameSpec& spec, const Matrix& K_inf,
                                    const TimeGrid& grid) {
  std::vector<Matrix> K(static_cast<std::size_t>(grid.node_count()), symmetrized(K_inf));
  RiccatiSolution sol(grid, std::move(K), maneuverability_gap(spec));
  sol.K_inf = symmetrized(K_inf);
  return sol;
}

Matrix riccati_residual(const GameSpec& spec, const Matrix& gap, const Matrix& K) {
  return reversed_rhs(spec.A, spec.Q, gap, K);
}

bool is_observable(const Matrix& A, const Matrix& Q) {
  const Eigen::Index n = A.rows();
  const Matrix root = psd_sqrt(Q);
  Matrix obs(n * n, n);
  Matrix block = root;
  for (Eigen::Index i = 0; i < n; ++i) {
    obs.middleRows(i * n, n) = block;
    block = block * A;
  }
  Eigen::JacobiSVD<Matrix> svd(obs);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return false;
  const double tol = 1e-10 * sv(0) * static_cast<double>(obs.rows());
  return (sv.array() > tol).count() == n;
}

Matrix solve_riccati_algebraic(const GameSpec& spec, const AlgebraicRiccatiOptions& opts) {
  const DominanceClass dom = classify_dominance(spec);
  if (dom.kind != Dominance::PursuerDominant) {
    throw Error(ErrorCode::NotDominantSpec, "algebraic Riccati solution needs a pursuer-dominant spec");
  }
  const Eigen::Index n = spec.state_dim();
  // K = 0 is a fixed point of the flow when Q vanishes.
  if (spec.Q.cwiseAbs().maxCoeff() == 0.0) return Matrix::Zero(n, n);
  if (!is_observable(spec.A, spec.Q)) {
    throw Error(ErrorCode::NotObservable, "(A, Q^1/2) is not observable");
  }
  const Matrix& D = dom.gap;

  Matrix K = Matrix::Zero(n, n);
  bool converged = false;
  for (long step = 0; step < opts.max_steps; ++step) {
    // Keep the RK4 step well inside the stability region of the linearized flow.
    const double rate = 1.0 + 2.0 * (spec.A - D * K).norm();
    const double h = 0.5 / rate;
    Matrix next = rk4_step(spec.A, spec.Q, D, K, h);
    const double change = (next - K).norm();
    if (!std::isfinite(change) || next.norm() > kEscapeNormCap) {
      throw Error(ErrorCode::NoConvergence, "algebraic Riccati flow diverged");
    }
    K = std::move(next);
    if (change < opts.change_tol * std::max(1.0, K.norm())) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::NoConvergence, "algebraic Riccati flow hit the iteration cap");
  }

  double res = riccati_residual(spec, D, K).norm();
  for (int i = 0; i < opts.newton_polish_steps && res > 0.0; ++i) {
    const Matrix candidate = K + solve_lyapunov(spec.A - D * K, riccati_residual(spec, D, K));
    const double cand_res = riccati_residual(spec, D, candidate).norm();
    if (!(cand_res < res)) break;
    K = candidate;
    res = cand_res;
  }
  return K;
}

}  // namespace peec
