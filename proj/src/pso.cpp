#include "kinopt/pso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kinopt/errors.hpp"
#include "kinopt/gibbs.hpp"
#include "kinopt/parallel.hpp"

namespace kinopt {

namespace {

constexpr double kInvSqrt3 = 0.57735026918962576451;

void refresh_global_best(SwarmState& swarm) {
  const int n = swarm.size();
  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (swarm.best_energies[i] < swarm.best_energies[best]) best = i;  // lowest index wins ties
  }
  const double* y = swarm.personal_bests.data() + static_cast<std::size_t>(best) * swarm.dim;
  swarm.global_best.assign(y, y + swarm.dim);
  swarm.global_best_energy = swarm.best_energies[best];
}

void validate_params(const PSOParams& params) {
  if (!(params.inertia > 0.0) || params.inertia > 1.0)
    throw std::invalid_argument("inertia must lie in (0,1]");
  if (!(params.dt > 0.0) || params.dt > 1.0) throw std::invalid_argument("dt must lie in (0,1]");
  if (params.sigma1 < 0.0 || params.sigma2 < 0.0)
    throw std::invalid_argument("noise strengths must be nonnegative");
}

double heaviside(double z, double beta, bool printed) {
  return printed ? smooth_heaviside_printed(z, beta) : smooth_heaviside(z, beta);
}

}  // namespace

SwarmState make_swarm(const Ensemble& init, const Objective& objective) {
  const int n = init.size();
  if (n < 1) throw std::invalid_argument("a swarm needs at least one particle");
  SwarmState swarm;
  swarm.dim = init.dim;
  swarm.positions = init.positions;
  swarm.velocities.assign(init.positions.size(), 0.0);
  swarm.personal_bests = init.positions;
  swarm.best_energies.resize(n);
  for (int i = 0; i < n; ++i) swarm.best_energies[i] = objective(init.particle(i));
  refresh_global_best(swarm);
  return swarm;
}

SwarmState pso_classic_step(const SwarmState& swarm, const PSOParams& params,
                            const Objective& objective, RngStream& rng, int threads) {
  const int n = swarm.size();
  const int d = swarm.dim;
  SwarmState next = swarm;
  RngStream step_rng = rng.split();
  parallel_for(n, threads, [&](int i) {
    auto stream = step_rng.substream(i);
    const std::size_t off = static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) {
      const double r1 = stream.uniform();
      const double r2 = stream.uniform();
      const double x = swarm.positions[off + j];
      double v = swarm.velocities[off + j];
      v += params.c1 * r1 * (swarm.personal_bests[off + j] - x) +
           params.c2 * r2 * (swarm.global_best[j] - x);
      next.velocities[off + j] = v;
      next.positions[off + j] = x + v;
    }
    const double energy = objective(
        std::span<const double>(next.positions.data() + off, static_cast<std::size_t>(d)));
    if (energy < swarm.best_energies[i]) {
      std::copy_n(next.positions.data() + off, d, next.personal_bests.data() + off);
      next.best_energies[i] = energy;
    }
  });
  refresh_global_best(next);
  return next;
}

double smooth_heaviside(double z, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("smooth heaviside needs beta > 0");
  return 0.5 * (1.0 + std::tanh(beta * z));
}

double smooth_heaviside_printed(double z, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("smooth heaviside needs beta > 0");
  return 1.0 + 0.5 * std::tanh(beta * z);
}

SwarmState pso_sde_step(const SwarmState& swarm, const PSOParams& params,
                        const Objective& objective, RngStream& rng, int threads) {
  validate_params(params);
  const int n = swarm.size();
  const int d = swarm.dim;
  const double m = params.inertia;
  const double friction = params.friction();
  const double dt = params.dt;
  const double sqrt_dt = std::sqrt(dt);

  // Regularized global best from the pre-step personal bests; the cached
  // best_energies hold E(Y) for the current Y.
  const auto consensus =
      gibbs_mean(swarm.personal_bests, d, swarm.best_energies, params.alpha);

  SwarmState next = swarm;
  RngStream step_rng = rng.split();
  parallel_for(n, threads, [&](int i) {
    auto stream = step_rng.substream(i);
    const std::size_t off = static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) {
      const double x = swarm.positions[off + j];
      const double v = swarm.velocities[off + j];
      const double to_best = swarm.personal_bests[off + j] - x;
      const double to_consensus = consensus[j] - x;
      const double drift =
          (-friction * v + params.lambda1 * to_best + params.lambda2 * to_consensus) / m;
      const double noise = (params.sigma1 * kInvSqrt3 * to_best * stream.normal() +
                            params.sigma2 * kInvSqrt3 * to_consensus * stream.normal()) /
                           m;
      const double v_new = v + dt * drift + sqrt_dt * noise;
      next.velocities[off + j] = v_new;
      next.positions[off + j] = x + dt * v_new;  // semi-implicit in V
    }
    // Smoothed personal-best relaxation toward the new position.
    const std::span<const double> x_new(next.positions.data() + off, static_cast<std::size_t>(d));
    const double gate = params.memory_speed * dt *
                        heaviside(swarm.best_energies[i] - objective(x_new), params.beta,
                                  params.printed_heaviside);
    for (int j = 0; j < d; ++j) {
      const double y = swarm.personal_bests[off + j];
      next.personal_bests[off + j] = y + gate * (next.positions[off + j] - y);
    }
    next.best_energies[i] = objective(std::span<const double>(
        next.personal_bests.data() + off, static_cast<std::size_t>(d)));
  });
  refresh_global_best(next);
  return next;
}

double lyapunov_functional(const SwarmState& swarm, const PSOParams& params) {
  validate_params(params);
  const int n = swarm.size();
  const int d = swarm.dim;
  const double m = params.inertia;
  const double g = params.friction();
  const double c_spread = (g / (2.0 * m)) * (g / (2.0 * m));
  const double c_memory = 0.5 * (3.0 * params.lambda1 / m - (g / m) * (g / m));

  std::vector<double> x_mean(d, 0.0);
  {
    // anchored mean, consistent with Ensemble::mean
    const double* x0 = swarm.positions.data();
    for (int i = 1; i < n; ++i) {
      const double* xi = swarm.positions.data() + static_cast<std::size_t>(i) * d;
      for (int j = 0; j < d; ++j) x_mean[j] += xi[j] - x0[j];
    }
    for (int j = 0; j < d; ++j) x_mean[j] = x0[j] + x_mean[j] / n;
  }

  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::size_t off = static_cast<std::size_t>(i) * d;
    double spread = 0.0, speed = 0.0, lag = 0.0, cross_spread = 0.0, cross_lag = 0.0;
    for (int j = 0; j < d; ++j) {
      const double dx = swarm.positions[off + j] - x_mean[j];
      const double v = swarm.velocities[off + j];
      const double dy = swarm.positions[off + j] - swarm.personal_bests[off + j];
      spread += dx * dx;
      speed += v * v;
      lag += dy * dy;
      cross_spread += dx * v;
      cross_lag += dy * v;
    }
    acc += c_spread * spread + 1.5 * speed + c_memory * lag +
           (g / (2.0 * m)) * cross_spread + (g / m) * cross_lag;
  }
  return acc / n;
}

WellPreparedness well_preparedness(const PSOParams& params, const SwarmState& initial,
                                   const Objective& objective, double hessian_bound) {
  validate_params(params);
  const int n = initial.size();
  const int d = initial.dim;
  if (!(params.lambda1 > 0.0)) throw std::invalid_argument("lambda1 must be positive");

  double c_e = hessian_bound;
  if (!(c_e > 0.0)) {
    if (!objective.hessian_bound())
      throw std::invalid_argument("needs a Hessian bound, from the objective or as an argument");
    c_e = *objective.hessian_bound();
  }

  // E[exp(-alpha (E(Y_0) - min E))], min from the objective when known.
  std::vector<double> best_energies(n);
  double e_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    best_energies[i] = objective(std::span<const double>(
        initial.personal_bests.data() + static_cast<std::size_t>(i) * d,
        static_cast<std::size_t>(d)));
    e_min = std::min(e_min, best_energies[i]);
  }
  if (objective.has_known_min()) e_min = std::min(e_min, objective.min_value());
  double gibbs_expectation = 0.0;
  for (int i = 0; i < n; ++i)
    gibbs_expectation += std::exp(-params.alpha * (best_energies[i] - e_min));
  gibbs_expectation /= n;
  if (!(gibbs_expectation > 0.0) || !std::isfinite(gibbs_expectation))
    throw numeric_error("degenerate ensemble: vanishing Gibbs normalization");

  const double m = params.inertia;
  const double g = params.friction();
  const double l1 = params.lambda1;
  const double l2 = params.lambda2;
  const double s2 = params.sigma2;
  const double nu = params.memory_speed;
  const double beta = params.beta;
  const double ratio = 1.0 / gibbs_expectation;  // exp(-a min E) / E[exp(-a E(Y0))]

  WellPreparedness result;
  result.mu1 = (l1 + 2.0 * l2) * g / (4.0 * m * m) -
               (9.0 * l2 * l2 / (g * m) + 3.0 * s2 * s2 / (m * m) +
                3.0 * l1 * g / (4.0 * m * m)) *
                   12.0 * ratio;
  result.mu2 = (l1 + l2) * g / (m * m) + nu * beta * (3.0 * l1 / m + g * g / (m * m)) -
               8.0 * nu * nu * g / m - l2 * l2 * g / (2.0 * m * m * l1) -
               3.0 * s2 * s2 / (2.0 * m * m) -
               (9.0 * l2 * l2 / (g * m) + 3.0 * s2 * s2 / (m * m)) -
               (9.0 * l2 * l2 / (g * m) + 3.0 * s2 * s2 / (m * m) +
                3.0 * l1 * g / (4.0 * m * m)) *
                   24.0 * ratio;

  const double g2m = g / (2.0 * m);
  const double denominator = g2m * g2m + 1.0 + 3.0 * l1 / m + 2.0 * (g / m) * (g / m);
  result.chi = 0.4 * std::min({g2m, result.mu1, result.mu2}) / denominator;

  // E[H(0)] and E[|grad E(X_0)|^2] over the ensemble.
  const double h0 = lyapunov_functional(initial, params);
  double grad_sq = 0.0;
  std::vector<double> grad(d);
  for (int i = 0; i < n; ++i) {
    objective.gradient(initial.position(i), grad);
    for (int j = 0; j < d; ++j) grad_sq += grad[j] * grad[j];
  }
  grad_sq /= n;

  const double chi = result.chi;
  if (chi > 0.0) {
    result.inequality_lhs =
        (params.alpha * nu * m / (l1 * chi) * (c_e + 2.0 * params.alpha * params.alpha) +
         24.0 * c_e * c_e * nu / (params.alpha * chi * chi * chi)) *
            h0 * ratio +
        6.0 * nu / (params.alpha * chi) * grad_sq * ratio;
  } else {
    result.inequality_lhs = std::numeric_limits<double>::infinity();
  }

  result.mu1_positive = result.mu1 > 0.0;
  result.mu2_positive = result.mu2 > 0.0;
  result.inequality_ok = result.inequality_lhs < 3.0 / 32.0;
  result.satisfied = result.mu1_positive && result.mu2_positive && result.inequality_ok;
  return result;
}

std::pair<Ensemble, Ensemble> cbo_memory_step(const Ensemble& x, const Ensemble& y,
                                              const CBOMemoryParams& params,
                                              const Objective& objective, RngStream& rng) {
  const int n = x.size();
  const int d = x.dim;
  if (y.size() != n || y.dim != d)
    throw std::invalid_argument("positions and memories must match in shape");
  if (!(params.dt > 0.0)) throw std::invalid_argument("memory consensus step needs dt > 0");

  const auto memory_energies = evaluate_energies(y, objective);
  const auto consensus = gibbs_mean(y, memory_energies, params.alpha);

  Ensemble x_next(n, d), y_next(n, d);
  const double sqrt_dt = std::sqrt(params.dt);
  RngStream step_rng = rng.split();
  for (int i = 0; i < n; ++i) {
    auto stream = step_rng.substream(i);
    const auto xi = x.particle(i);
    const auto yi = y.particle(i);
    auto xo = x_next.particle(i);
    auto yo = y_next.particle(i);
    const double gate =
        params.memory_speed * params.dt *
        heaviside(memory_energies[i] - objective(xi), params.beta, params.printed_heaviside);
    for (int j = 0; j < d; ++j) {
      const double to_memory = yi[j] - xi[j];
      const double to_consensus = consensus[j] - xi[j];
      xo[j] = xi[j] + (params.lambda1 * to_memory + params.lambda2 * to_consensus) * params.dt +
              params.sigma1 * (xi[j] - yi[j]) * stream.normal() * sqrt_dt +
              params.sigma2 * to_consensus * stream.normal() * sqrt_dt;
      yo[j] = yi[j] + gate * (xi[j] - yi[j]);
    }
  }
  return {std::move(x_next), std::move(y_next)};
}

std::vector<ScaleValue> zero_inertia_experiment(std::span<const double> inertia_list,
                                                const PSOParams& params,
                                                const Objective& objective, double horizon,
                                                int n_particles, RngStream& rng,
                                                const ZeroInertiaOptions& options) {
  if (objective.dim() != 1)
    throw std::invalid_argument("zero-inertia comparison uses exact 1D W2; dim must be 1");
  for (double m : inertia_list) {
    if (!(m > 0.0) || m > 1.0) throw std::invalid_argument("inertia values must lie in (0,1]");
  }

  auto init_rng = rng.substream(0);
  const Ensemble init =
      sample_gaussian_cloud(n_particles, 1, options.init_center, options.init_spread, init_rng);

  // Memory consensus reference; sigma/sqrt(3) matches the swarm noise scaling.
  CBOMemoryParams ref_params;
  ref_params.lambda1 = params.lambda1;
  ref_params.lambda2 = params.lambda2;
  ref_params.sigma1 = params.sigma1 * kInvSqrt3;
  ref_params.sigma2 = params.sigma2 * kInvSqrt3;
  ref_params.memory_speed = params.memory_speed;
  ref_params.beta = params.beta;
  ref_params.alpha = params.alpha;
  ref_params.printed_heaviside = params.printed_heaviside;
  const long ref_steps = std::max<long>(1, std::lround(horizon / params.dt));
  ref_params.dt = horizon / ref_steps;

  auto ref_rng = rng.substream(1);
  Ensemble ref_x = init;
  Ensemble ref_y = init;
  for (long k = 0; k < ref_steps; ++k) {
    auto [nx, ny] = cbo_memory_step(ref_x, ref_y, ref_params, objective, ref_rng);
    ref_x = std::move(nx);
    ref_y = std::move(ny);
  }

  std::vector<ScaleValue> rows;
  for (double m : inertia_list) {
    PSOParams run_params = params;
    run_params.inertia = m;
    // resolve the velocity relaxation time m/friction
    const double dt_cap = std::min(params.dt, m / 5.0);
    const long steps = std::max<long>(1, std::lround(horizon / dt_cap));
    run_params.dt = horizon / steps;

    auto swarm_rng = rng.substream(2);
    SwarmState swarm = make_swarm(init, objective);
    for (long k = 0; k < steps; ++k)
      swarm = pso_sde_step(swarm, run_params, objective, swarm_rng);
    rows.push_back({m, wasserstein2_1d(swarm.positions, ref_x.positions)});
  }
  return rows;
}

}  // namespace kinopt
