#include "peec/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "peec/error.hpp"

namespace peec {
namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double price(double O, int count) { return count == 0 ? 0.0 : O * count; }

double running_cost(const GameSpec& spec, const Vector& x, const Vector& up, const Vector& ue) {
  return x.dot(spec.Q * x) + up.dot(spec.Rp * up) - ue.dot(spec.Re * ue);
}

// Feedback gains -R^-1 B' for both players, applied as gain * K(t) * x_hat.
struct Gains {
  Matrix pursuer;
  Matrix evader;
};

Gains make_gains(const GameSpec& spec) {
  return {-spec.Rp.llt().solve(spec.Bp.transpose()), -spec.Re.llt().solve(spec.Be.transpose())};
}

// Everything a path needs that does not depend on the noise.
struct PathContext {
  const GameSpec& spec;
  const RiccatiSolution& riccati;
  SimulationGrid grid;
  Gains gains;
  int n_pursuer = 0;
  int n_evader = 0;
};

PathContext make_context(const GameSpec& spec, const RiccatiSolution& riccati,
                         const ObservationPlan& plan_p, const ObservationPlan& plan_e,
                         int n_sim_steps) {
  if (plan_p.observe_always || plan_e.observe_always) {
    throw Error(ErrorCode::InvalidPlan, "continuous observation cannot be simulated");
  }
  if (std::abs(riccati.grid().T - spec.T) > 1e-12 * spec.T) {
    throw Error(ErrorCode::DimensionMismatch, "Riccati grid horizon differs from the spec");
  }
  const auto merged = merge_instants(plan_p, plan_e, spec.T);
  return PathContext{spec,         riccati,        simulation_grid(spec.T, n_sim_steps, merged),
                     make_gains(spec), plan_p.count(), plan_e.count()};
}

// One RK4 step of the noise-free closed loop dx = (A x - D K x_hat) dt,
// dx_hat = (A x_hat - D K x_hat) dt. Both share K and the same operation
// order, so x == x_hat stays bitwise exact without noise.
std::pair<Vector, Vector> drift_step(const GameSpec& spec, const RiccatiSolution& riccati,
                                     const Vector& x, const Vector& x_hat, double t, double dt) {
  const Matrix& D = riccati.gap();
  const Matrix K0 = riccati.K_at(t);
  const Matrix Kh = riccati.K_at(t + 0.5 * dt);
  const Matrix K1 = riccati.K_at(std::min(t + dt, riccati.grid().T));
  auto f = [&](const Matrix& K, const Vector& v, const Vector& est) -> Vector {
    return spec.A * v - D * (K * est);
  };
  const Vector e1 = f(K0, x_hat, x_hat);
  const Vector s1 = f(K0, x, x_hat);
  const Vector eh1 = x_hat + 0.5 * dt * e1;
  const Vector e2 = f(Kh, eh1, eh1);
  const Vector s2 = f(Kh, x + 0.5 * dt * s1, eh1);
  const Vector eh2 = x_hat + 0.5 * dt * e2;
  const Vector e3 = f(Kh, eh2, eh2);
  const Vector s3 = f(Kh, x + 0.5 * dt * s2, eh2);
  const Vector eh3 = x_hat + dt * e3;
  const Vector e4 = f(K1, eh3, eh3);
  const Vector s4 = f(K1, x + dt * s3, eh3);
  return {x + dt / 6.0 * (s1 + 2.0 * s2 + 2.0 * s3 + s4),
          x_hat + dt / 6.0 * (e1 + 2.0 * e2 + 2.0 * e3 + e4)};
}

// Runs one path; visit(j, t, x, x_hat, up, ue, cost_to_date) is called for
// every node after its reset. Returns the realized cost.
template <class Visitor>
double run_path(const PathContext& ctx, const CounterNormal& noise, std::uint64_t path,
                Visitor&& visit) {
  const GameSpec& spec = ctx.spec;
  const auto& times = ctx.grid.times;
  const auto& flags = ctx.grid.flags;
  const Eigen::Index q = spec.noise_dim();

  Vector x = spec.x0;
  Vector x_hat = spec.x0;
  auto controls = [&](const Vector& est, double t) {
    const Vector Kx = ctx.riccati.K_at(t) * est;
    return std::pair<Vector, Vector>{ctx.gains.pursuer * Kx, ctx.gains.evader * Kx};
  };
  auto [up, ue] = controls(x_hat, times[0]);
  double cost = 0.0;
  visit(std::size_t{0}, times[0], x, x_hat, up, ue, cost);

  Vector xi(q);
  for (std::size_t j = 0; j + 1 < times.size(); ++j) {
    const double t = times[j];
    const double dt = times[j + 1] - t;
    for (Eigen::Index c = 0; c < q; ++c) xi(c) = noise(path, j, static_cast<std::uint64_t>(c));

    const double left = running_cost(spec, x, up, ue);
    auto [x_next, x_hat_next] = drift_step(spec, ctx.riccati, x, x_hat, t, dt);
    x_next += spec.C * (std::sqrt(dt) * xi);

    // Right end of the panel uses the estimate before any reset.
    const auto [up_pre, ue_pre] = controls(x_hat_next, times[j + 1]);
    cost += 0.5 * dt * (left + running_cost(spec, x_next, up_pre, ue_pre));

    x = x_next;
    if (flags[j + 1]) {
      x_hat = x;
      std::tie(up, ue) = controls(x_hat, times[j + 1]);
    } else {
      x_hat = std::move(x_hat_next);
      up = up_pre;
      ue = ue_pre;
    }
    visit(j + 1, times[j + 1], x, x_hat, up, ue, cost);
  }
  return cost + x.dot(spec.QT * x) + price(spec.Op, ctx.n_pursuer) - price(spec.Oe, ctx.n_evader);
}

}  // namespace

double CounterNormal::operator()(std::uint64_t path, std::uint64_t step,
                                 std::uint64_t component) const {
  const std::uint64_t key = splitmix(splitmix(splitmix(seed_) ^ path) ^ step);
  const std::uint64_t a = splitmix(key ^ (2 * component));
  const std::uint64_t b = splitmix(key ^ (2 * component + 1));
  const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::pair<Vector, Vector> nash_controls(const GameSpec& spec, const RiccatiSolution& riccati,
                                        const Vector& x_hat, double t) {
  const Vector Kx = riccati.K_at(t) * x_hat;
  return {-spec.Rp.llt().solve(spec.Bp.transpose() * Kx),
          -spec.Re.llt().solve(spec.Be.transpose() * Kx)};
}

Vector propagate_estimate(const GameSpec& spec, const RiccatiSolution& riccati,
                          const Vector& x_hat, double t, double dt) {
  return drift_step(spec, riccati, x_hat, x_hat, t, dt).second;
}

SimulationGrid simulation_grid(double T, int n_sim_steps, const std::vector<double>& instants) {
  if (n_sim_steps < 1) throw Error(ErrorCode::OutOfRange, "need at least one simulation step");
  const double h = T / n_sim_steps;
  const double snap = 1e-12 * T;
  SimulationGrid g;
  g.times.reserve(static_cast<std::size_t>(n_sim_steps) + instants.size() + 1);
  std::size_t next = 0;
  for (int k = 0; k <= n_sim_steps; ++k) {
    const double node = k == n_sim_steps ? T : k * h;
    while (next < instants.size() && instants[next] < node - snap) {
      g.times.push_back(instants[next++]);
      g.flags.push_back(true);
    }
    if (next < instants.size() && std::abs(instants[next] - node) <= snap) {
      g.times.push_back(instants[next++]);
      g.flags.push_back(true);
    } else {
      g.times.push_back(node);
      g.flags.push_back(false);
    }
  }
  return g;
}

TrajectoryRecord simulate(const GameSpec& spec, const RiccatiSolution& riccati,
                          const ObservationPlan& plan_p, const ObservationPlan& plan_e,
                          std::uint64_t seed, int n_sim_steps, std::uint64_t path) {
  const PathContext ctx = make_context(spec, riccati, plan_p, plan_e, n_sim_steps);
  const std::size_t rows = ctx.grid.times.size();
  TrajectoryRecord rec;
  rec.seed = seed;
  rec.path = path;
  rec.times = ctx.grid.times;
  rec.obs_flags = ctx.grid.flags;
  rec.x.resize(rows);
  rec.x_hat.resize(rows);
  rec.u_p.resize(rows);
  rec.u_e.resize(rows);
  rec.cost_to_date.resize(rows);

  int seen_p = 0;
  int seen_e = 0;
  const auto& pi = plan_p.instants;
  const auto& ei = plan_e.instants;
  const double snap = 1e-9 * spec.T;
  rec.realized_cost = run_path(
      ctx, CounterNormal(seed), path,
      [&](std::size_t j, double t, const Vector& x, const Vector& x_hat, const Vector& up,
          const Vector& ue, double cost) {
        rec.x[j] = x;
        rec.x_hat[j] = x_hat;
        rec.u_p[j] = up;
        rec.u_e[j] = ue;
        while (seen_p < static_cast<int>(pi.size()) && pi[seen_p] <= t + snap) ++seen_p;
        while (seen_e < static_cast<int>(ei.size()) && ei[seen_e] <= t + snap) ++seen_e;
        rec.cost_to_date[j] = cost + price(spec.Op, seen_p) - price(spec.Oe, seen_e);
      });
  rec.cost_to_date.back() = rec.realized_cost;
  return rec;
}

MonteCarloSummary monte_carlo(const GameSpec& spec, const RiccatiSolution& riccati,
                              const ObservationPlan& plan_p, const ObservationPlan& plan_e, int M,
                              std::uint64_t base_seed, const MonteCarloOptions& opts) {
  if (M < 2) throw Error(ErrorCode::OutOfRange, "Monte Carlo needs at least two paths");
  const PathContext ctx = make_context(spec, riccati, plan_p, plan_e, opts.n_sim_steps);
  const CounterNormal noise(base_seed);

  std::vector<double> costs(static_cast<std::size_t>(M));
  std::vector<double> terminal(static_cast<std::size_t>(M));
  auto work = [&](int first, int stride) {
    for (int k = first; k < M; k += stride) {
      const std::size_t last = ctx.grid.times.size() - 1;
      double dist = 0.0;
      costs[static_cast<std::size_t>(k)] =
          run_path(ctx, noise, static_cast<std::uint64_t>(k),
                   [&](std::size_t j, double, const Vector& x, const Vector&, const Vector&,
                       const Vector&, double) {
                     if (j == last) dist = x.norm();
                   });
      terminal[static_cast<std::size_t>(k)] = dist;
    }
  };
  int threads = opts.threads > 0 ? opts.threads
                                 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, M);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w, threads);
  }

  MonteCarloSummary s;
  s.M = M;
  // Shifted by the first cost so identical costs give exactly zero spread.
  const double shift = costs[0];
  double sum = 0.0;
  double sum_sq = 0.0;
  double dist_sum = 0.0;
  for (int k = 0; k < M; ++k) {
    const double d = costs[static_cast<std::size_t>(k)] - shift;
    sum += d;
    sum_sq += d * d;
    dist_sum += terminal[static_cast<std::size_t>(k)];
  }
  s.mean_cost = shift + sum / M;
  s.mean_terminal_distance = dist_sum / M;
  s.std_cost = std::sqrt(std::max(0.0, (sum_sq - sum * sum / M) / (M - 1)));
  s.ci95_halfwidth = 1.96 * s.std_cost / std::sqrt(static_cast<double>(M));
  if (opts.keep_costs) s.costs = std::move(costs);
  return s;
}

EnsembleMoments ensemble_moments(const GameSpec& spec, const RiccatiSolution& riccati,
                                 const ObservationPlan& plan_p, const ObservationPlan& plan_e,
                                 int M, std::uint64_t base_seed, int n_sim_steps) {
  if (M < 2) throw Error(ErrorCode::OutOfRange, "ensemble needs at least two paths");
  const PathContext ctx = make_context(spec, riccati, plan_p, plan_e, n_sim_steps);
  const CounterNormal noise(base_seed);
  const std::size_t rows = ctx.grid.times.size();
  const Eigen::Index n = spec.state_dim();

  EnsembleMoments out;
  out.M = M;
  out.times = ctx.grid.times;
  out.flags = ctx.grid.flags;
  out.mean_x.assign(rows, Vector::Zero(n));
  out.mean_sq_norm.assign(rows, 0.0);
  out.mean_error.assign(rows, Vector::Zero(n));
  out.error_cov.assign(rows, Matrix::Zero(n, n));
  for (int k = 0; k < M; ++k) {
    run_path(ctx, noise, static_cast<std::uint64_t>(k),
             [&](std::size_t j, double, const Vector& x, const Vector& x_hat, const Vector&,
                 const Vector&, double) {
               const Vector err = x - x_hat;
               out.mean_x[j] += x;
               out.mean_sq_norm[j] += x.squaredNorm();
               out.mean_error[j] += err;
               out.error_cov[j] += err * err.transpose();
             });
  }
  for (std::size_t j = 0; j < rows; ++j) {
    out.mean_x[j] /= M;
    out.mean_sq_norm[j] /= M;
    out.mean_error[j] /= M;
    out.error_cov[j] /= M;
  }
  return out;
}

}  // namespace peec
