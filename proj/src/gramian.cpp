#include <sstream>

#include "peec/detail/quadrature.hpp"
#include "peec/error.hpp"
#include "peec/lqg_core.hpp"

namespace peec {
namespace {

void require_in(double v, double lo, double hi, const char* what) {
  const double slack = 1e-12 * std::max(1.0, std::abs(hi));
  if (!(v >= lo - slack && v <= hi + slack)) {
    std::ostringstream os;
    os << what << " = " << v << " outside [" << lo << ", " << hi << "]";
    throw Error(ErrorCode::OutOfRange, os.str());
  }
}

}  // namespace

GramianCache::GramianCache(const GameSpec& spec, const TimeGrid& grid)
    : A_(spec.A), CCt_(spec.C * spec.C.transpose()), grid_(grid) {
  half_cell_ = propagator(0.5 * grid_.step());
}

Propagator van_loan_propagator(const Matrix& A, const Matrix& noise, double dt) {
  const Eigen::Index n = A.rows();
  // Van Loan: exp([[-A, CC'], [0, A']] dt) = [[., F12], [0, F22]],
  // with F22 = e^{A' dt} and Sigma(dt) = F22' F12.
  Matrix M = Matrix::Zero(2 * n, 2 * n);
  M.topLeftCorner(n, n) = -A;
  M.topRightCorner(n, n) = noise;
  M.bottomRightCorner(n, n) = A.transpose();
  const Matrix E = matrix_exp(M, dt);
  Propagator p;
  p.transition = E.bottomRightCorner(n, n).transpose();
  const Matrix S = p.transition * E.topRightCorner(n, n);
  p.gramian = 0.5 * (S + S.transpose());
  return p;
}

GramianCache::Propagator GramianCache::propagator(double dt) const {
  return van_loan_propagator(A_, CCt_, dt);
}

Matrix GramianCache::sigma(double tau) const {
  require_in(tau, 0.0, grid_.T, "tau");
  if (tau <= 0.0) return Matrix::Zero(A_.rows(), A_.rows());
  return propagator(tau).gramian;
}

Matrix GramianCache::noise_rate(double tau) const {
  require_in(tau, 0.0, grid_.T, "tau");
  if (tau <= 0.0) return CCt_;
  const Matrix E = matrix_exp(A_, tau);
  const Matrix S = E * CCt_ * E.transpose();
  return 0.5 * (S + S.transpose());
}

namespace detail {

Matrix kernel_at(const GramianCache& cache, Kernel kernel, double tau) {
  tau = std::max(tau, 0.0);
  return kernel == Kernel::Gramian ? cache.sigma(std::min(tau, cache.horizon()))
                                   : cache.noise_rate(std::min(tau, cache.horizon()));
}

Matrix kernel_advance(const Matrix& S, const GramianCache::Propagator& p, Kernel kernel) {
  Matrix out = p.transition * S * p.transition.transpose();
  if (kernel == Kernel::Gramian) out += p.gramian;
  return 0.5 * (out + out.transpose());
}

double partial_panel(const GramianCache& cache, const RiccatiSolution& riccati, Kernel kernel,
                     double left, const Matrix& S_left, double t) {
  const double width = t - left;
  if (width <= 0.0) return 0.0;
  const auto half = cache.propagator(0.5 * width);
  const Matrix S_mid = kernel_advance(S_left, half, kernel);
  const Matrix S_right = kernel_advance(S_mid, half, kernel);
  return width / 6.0 *
         (trace_product(S_left, phi_at(riccati, left)) +
          4.0 * trace_product(S_mid, phi_at(riccati, left + 0.5 * width)) +
          trace_product(S_right, phi_at(riccati, t)));
}

}  // namespace detail

double trace_cost_integral(const GramianCache& cache, const RiccatiSolution& riccati,
                           double t_a, double t_b, double tau0) {
  const double T = riccati.grid().T;
  require_in(tau0, 0.0, T, "tau0");
  require_in(t_a, tau0, T, "t_a");
  require_in(t_b, t_a, T, "t_b");
  double total = 0.0;
  detail::walk_panels(cache, riccati, detail::Kernel::Gramian, tau0, t_a, t_b,
                      [&](const detail::Panel& p) {
                        total += p.value;
                        return true;
                      });
  return total;
}

double riccati_noise_integral(const GramianCache& cache, const RiccatiSolution& riccati) {
  const TimeGrid& grid = riccati.grid();
  const double h = grid.step();
  auto f = [&](int k) { return riccati.K_node(k).cwiseProduct(cache.noise()).sum(); };
  const int pairs = grid.n_steps / 2;
  double total = 0.0;
  for (int j = 0; j < pairs; ++j) {
    total += h / 3.0 * (f(2 * j) + 4.0 * f(2 * j + 1) + f(2 * j + 2));
  }
  if (grid.n_steps % 2 == 1) {
    total += 0.5 * h * (f(grid.n_steps - 1) + f(grid.n_steps));
  }
  return total;
}

}  // namespace peec
