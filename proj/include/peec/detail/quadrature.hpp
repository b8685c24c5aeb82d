#pragma once

#include "peec/lqg_core.hpp"

namespace peec::detail {

// Which matrix kernel multiplies phi(t) inside the trace.
enum class Kernel {
  Gramian,    // Sigma(t - tau0)
  NoiseRate,  // e^{A(t - tau0)} C C' e^{A(t - tau0)'}
};

Matrix kernel_at(const GramianCache& cache, Kernel kernel, double tau);

// Advances a kernel value by one propagator step.
Matrix kernel_advance(const Matrix& S, const GramianCache::Propagator& p, Kernel kernel);

inline double trace_product(const Matrix& S, const Matrix& phi) {
  // Both arguments are symmetric, so Tr(S phi) is the Frobenius inner product.
  return S.cwiseProduct(phi).sum();
}

// One Simpson panel [left, right] of Tr[kernel(t - tau0) phi(t)] whose
// kernel value at `left` is S_left.
struct Panel {
  double left = 0.0;
  double right = 0.0;
  const Matrix* S_left = nullptr;
  double value = 0.0;
};

// Calls visit(panel) for the grid-aligned panels of [a, b] in order until
// visit returns false. Returns true if every panel was visited.
template <class Visitor>
bool walk_panels(const GramianCache& cache, const RiccatiSolution& riccati, Kernel kernel,
                 double tau0, double a, double b, Visitor&& visit);

// Simpson value of the single panel [left, t] given the kernel at `left`.
double partial_panel(const GramianCache& cache, const RiccatiSolution& riccati, Kernel kernel,
                     double left, const Matrix& S_left, double t);

// Relative width below which a sliver between an endpoint and a node is dropped.
inline constexpr double kSnapRel = 1e-13;

template <class Visitor>
bool walk_panels(const GramianCache& cache, const RiccatiSolution& riccati, Kernel kernel,
                 double tau0, double a, double b, Visitor&& visit) {
  const TimeGrid& grid = riccati.grid();
  const double snap = kSnapRel * grid.T;
  Matrix S = kernel_at(cache, kernel, a - tau0);
  double t = a;
  int k = grid.cell(a);
  while (b - t > snap) {
    double right = k < grid.n_steps ? grid.node(k + 1) : b;
    if (right - t <= snap && k < grid.n_steps) {
      ++k;
      continue;
    }
    if (right > b) right = b;
    const double width = right - t;
    const bool full_cell =
        k < grid.n_steps && t == grid.node(k) && right == grid.node(k + 1);

    Matrix S_mid;
    Matrix S_right;
    double f_left;
    double f_mid;
    double f_right;
    if (full_cell) {
      const auto& half = cache.half_cell();
      S_mid = kernel_advance(S, half, kernel);
      S_right = kernel_advance(S_mid, half, kernel);
      f_left = trace_product(S, riccati.phi_node(k));
      f_mid = trace_product(S_mid, riccati.phi_mid(k));
      f_right = trace_product(S_right, riccati.phi_node(k + 1));
    } else {
      const auto half = cache.propagator(0.5 * width);
      S_mid = kernel_advance(S, half, kernel);
      S_right = kernel_advance(S_mid, half, kernel);
      f_left = trace_product(S, phi_at(riccati, t));
      f_mid = trace_product(S_mid, phi_at(riccati, t + 0.5 * width));
      f_right = trace_product(S_right, phi_at(riccati, right));
    }
    const Panel panel{t, right, &S, width / 6.0 * (f_left + 4.0 * f_mid + f_right)};
    if (!visit(panel)) return false;
    S = std::move(S_right);
    t = right;
    ++k;
  }
  return true;
}

}  // namespace peec::detail
