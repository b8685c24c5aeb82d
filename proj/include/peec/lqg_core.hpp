#pragma once

#include <optional>
#include <vector>

#include "peec/model.hpp"

namespace peec {

/// e^{M t}. Throws NonFiniteEntry for non-finite input.
Matrix matrix_exp(const Matrix& M, double t = 1.0);

/// Uniform discretization t_k = k T / n_steps of [0, T].
struct TimeGrid {
  double T = 1.0;
  int n_steps = 4096;

  TimeGrid() = default;
  TimeGrid(double horizon, int steps);

  double step() const { return T / n_steps; }
  double node(int k) const { return k == n_steps ? T : k * step(); }
  int node_count() const { return n_steps + 1; }
  // Index of the cell [t_k, t_{k+1}] containing t (clamped to the last cell at T).
  int cell(double t) const;
};

inline constexpr int kDefaultRiccatiSteps = 4096;
inline constexpr double kEscapeNormCap = 1e12;

/// Nodal solution of -dK/dt = Q + K A + A'K - K D K, K(T) = QT, with
/// D = Bp Rp^-1 Bp' - Be Re^-1 Be'. Also keeps D and the weighting
/// phi = K D K at nodes and cell midpoints for the quadratures.
class RiccatiSolution {
 public:
  RiccatiSolution(TimeGrid grid, std::vector<Matrix> K, Matrix gap);

  const TimeGrid& grid() const { return grid_; }
  const std::vector<Matrix>& nodes() const { return K_; }
  const Matrix& K_node(int k) const { return K_[static_cast<std::size_t>(k)]; }
  const Matrix& gap() const { return gap_; }
  Eigen::Index dim() const { return gap_.rows(); }

  /// K(t) by linear interpolation between nodes. Throws OutOfRange.
  Matrix K_at(double t) const;

  const Matrix& phi_node(int k) const { return phi_nodes_[static_cast<std::size_t>(k)]; }
  // phi at the interpolated midpoint of cell k.
  const Matrix& phi_mid(int k) const { return phi_mids_[static_cast<std::size_t>(k)]; }

  std::optional<Matrix> K_inf;

 private:
  TimeGrid grid_;
  std::vector<Matrix> K_;
  Matrix gap_;
  std::vector<Matrix> phi_nodes_;
  std::vector<Matrix> phi_mids_;
};

/// Backward RK4 integration from K(T) = QT, symmetrizing after each step.
/// Throws NotDominantSpec for a NotDominant spec and FiniteEscape if any
/// nodal norm exceeds kEscapeNormCap.
RiccatiSolution solve_riccati_finite(const GameSpec& spec, const TimeGrid& grid);

/// Constant K over the grid; the stationary (infinite-horizon) policy.
RiccatiSolution stationary_solution(const GameSpec& spec, const Matrix& K_inf,
                                    const TimeGrid& grid);

struct AlgebraicRiccatiOptions {
  double change_tol = 1e-10;
  long max_steps = 2'000'000;
  int newton_polish_steps = 6;
};

/// Stabilizing solution of Q + K A + A'K - K D K = 0, obtained as the limit of
/// the backward finite-horizon flow from K = 0 and then polished with
/// Newton-Kleinman steps. Requires a PursuerDominant spec and (A, Q^1/2)
/// observable; throws NotDominantSpec, NotObservable or NoConvergence.
Matrix solve_riccati_algebraic(const GameSpec& spec, const AlgebraicRiccatiOptions& opts = {});

/// Q + K A + A'K - K D K.
Matrix riccati_residual(const GameSpec& spec, const Matrix& gap, const Matrix& K);

/// Rank test on [Q^1/2; Q^1/2 A; ...; Q^1/2 A^{n-1}].
bool is_observable(const Matrix& A, const Matrix& Q);

/// Transition e^{A dt} and Gramian int_0^dt e^{A s} N e^{A's} ds, both from
/// one Van Loan block exponential.
struct Propagator {
  Matrix transition;
  Matrix gramian;
};
Propagator van_loan_propagator(const Matrix& A, const Matrix& noise, double dt);

/// Holds A and C C' plus propagators for half a Riccati-grid cell, so that the
/// Gramian Sigma(tau) = int_0^tau e^{A s} C C' e^{A's} ds can be marched
/// along the grid with two small products per step.
class GramianCache {
 public:
  GramianCache(const GameSpec& spec, const TimeGrid& grid);

  const Matrix& A() const { return A_; }
  const Matrix& noise() const { return CCt_; }
  double horizon() const { return grid_.T; }
  const TimeGrid& grid() const { return grid_; }

  /// Sigma(tau) via the Van Loan block exponential. Throws OutOfRange unless
  /// 0 <= tau <= T.
  Matrix sigma(double tau) const;

  /// e^{A tau} C C' e^{A' tau}, i.e. dSigma/dtau.
  Matrix noise_rate(double tau) const;

  using Propagator = peec::Propagator;
  Propagator propagator(double dt) const;
  const Propagator& half_cell() const { return half_cell_; }

 private:
  Matrix A_;
  Matrix CCt_;
  TimeGrid grid_;
  Propagator half_cell_;
};

/// phi(t) = K(t) D K(t) with K linearly interpolated. Throws OutOfRange.
Matrix phi_at(const RiccatiSolution& riccati, double t);

/// int_{t_a}^{t_b} Tr[Sigma(t - tau0) phi(t)] dt by Simpson's rule on every
/// grid-aligned panel (endpoints inserted). Requires 0 <= tau0 <= t_a <= t_b <= T.
double trace_cost_integral(const GramianCache& cache, const RiccatiSolution& riccati,
                           double t_a, double t_b, double tau0);

/// int_0^T Tr(K(t) C C') dt by composite Simpson on the Riccati nodes.
double riccati_noise_integral(const GramianCache& cache, const RiccatiSolution& riccati);

}  // namespace peec
