#include "kinopt/sa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kinopt/diagnostics.hpp"
#include "kinopt/errors.hpp"
#include "kinopt/parallel.hpp"

namespace kinopt {

double acceptance_probability(double energy_old, double energy_new, double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("acceptance needs T > 0");
  if (!std::isfinite(energy_old) || !std::isfinite(energy_new))
    throw numeric_error("acceptance needs finite energies");
  if (energy_new <= energy_old) return 1.0;
  return std::exp(-(energy_new - energy_old) / temperature);
}

bool metropolis_accept(double energy_old, double energy_new, double temperature, RngStream& rng) {
  if (energy_new <= energy_old) return true;
  return rng.uniform() < acceptance_probability(energy_old, energy_new, temperature);
}

SAState make_sa_state(std::vector<double> x0, const Objective& objective,
                      const Schedule& temperature_schedule, const SAOptions& options) {
  if (static_cast<int>(x0.size()) != objective.dim())
    throw std::invalid_argument("initial point dimension mismatch");
  SAState state;
  state.energy = objective(x0);
  state.x = std::move(x0);
  state.step = 0;
  state.temperature = temperature_schedule.value_at(0);
  state.sigma = options.sigma_scale * std::sqrt(2.0 * state.temperature);
  return state;
}

SAState sa_step(const SAState& state, const Objective& objective,
                const Schedule& temperature_schedule, RngStream& rng, const SAOptions& options,
                SATrace* trace) {
  const int d = static_cast<int>(state.x.size());
  std::vector<double> proposal(d);
  for (int j = 0; j < d; ++j) proposal[j] = state.x[j] + state.sigma * rng.normal();
  const double proposal_energy = objective(proposal);

  const bool accepted = metropolis_accept(state.energy, proposal_energy, state.temperature, rng);

  SAState next;
  next.step = state.step + 1;
  next.temperature = temperature_schedule.value_at(static_cast<double>(next.step));
  next.sigma = options.sigma_scale * std::sqrt(2.0 * next.temperature);
  if (accepted) {
    next.x = std::move(proposal);
    next.energy = proposal_energy;
  } else {
    next.x = state.x;  // bit-identical on rejection
    next.energy = state.energy;
  }
  if (trace) trace->rows.push_back({next.step, state.temperature, next.energy, accepted});
  return next;
}

TransitionEstimate estimate_transition_operator(
    const std::function<double(std::span<const double>)>& phi, std::span<const double> x,
    double sigma, double temperature, const Objective& objective, std::size_t n_samples,
    RngStream& rng) {
  if (n_samples == 0) throw std::invalid_argument("need at least one sample");
  const int d = static_cast<int>(x.size());
  const double phi_x = phi(x);
  const double energy_x = objective(x);

  std::vector<double> y(d);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (int j = 0; j < d; ++j) y[j] = x[j] + sigma * rng.normal();
    const double beta = acceptance_probability(energy_x, objective(y), temperature);
    const double term = beta * (phi(y) - phi_x);
    sum += term;
    sum_sq += term * term;
  }
  const double mean = sum / n_samples;
  const double var = std::max(0.0, sum_sq / n_samples - mean * mean);
  return {phi_x + mean, std::sqrt(var / n_samples)};
}

SAEnsembleRun run_sa_ensemble(const Ensemble& init, long steps, const Objective& objective,
                              const Schedule& temperature_schedule,
                              std::span<const long> snapshot_steps, RngStream& rng,
                              const SAOptions& options, int threads) {
  const int n = init.size();
  if (n < 1) throw std::invalid_argument("need at least one chain");
  std::vector<long> wanted(snapshot_steps.begin(), snapshot_steps.end());
  std::sort(wanted.begin(), wanted.end());

  SAEnsembleRun run;
  for (long s : wanted) {
    if (s < 0 || s > steps) throw std::invalid_argument("snapshot step out of range");
    run.snapshot_steps.push_back(s);
    run.snapshots.emplace_back(n, init.dim);
  }

  parallel_for(n, threads, [&](int i) {
    auto stream = rng.substream(static_cast<std::uint64_t>(i));
    SAState state = make_sa_state({init.particle(i).begin(), init.particle(i).end()}, objective,
                                  temperature_schedule, options);
    std::size_t next_snap = 0;
    for (; next_snap < wanted.size() && wanted[next_snap] == 0; ++next_snap)
      std::copy(state.x.begin(), state.x.end(), run.snapshots[next_snap].particle(i).begin());
    for (long k = 1; k <= steps; ++k) {
      state = sa_step(state, objective, temperature_schedule, stream, options);
      for (; next_snap < wanted.size() && wanted[next_snap] == k; ++next_snap)
        std::copy(state.x.begin(), state.x.end(), run.snapshots[next_snap].particle(i).begin());
    }
  });
  return run;
}

std::vector<double> langevin_step(std::span<const double> x, const Objective& objective,
                                  double temperature, double dt, RngStream& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("langevin step needs dt > 0");
  if (temperature < 0.0) throw std::invalid_argument("langevin step needs T >= 0");
  const int d = static_cast<int>(x.size());
  std::vector<double> grad(d);
  objective.gradient(x, grad);
  std::vector<double> next(d);
  const double noise = std::sqrt(2.0 * temperature * dt);
  for (int j = 0; j < d; ++j) next[j] = x[j] - grad[j] * dt + noise * rng.normal();
  return next;
}

std::vector<ScaleValue> sa_diffusion_scaling(std::span<const double> eps_list,
                                             const Objective& objective, double temperature,
                                             double horizon, int n_particles, RngStream& rng,
                                             const DiffusionScalingOptions& options) {
  if (objective.dim() != 1)
    throw std::invalid_argument("diffusion scaling compares exact 1D W2; dim must be 1");
  if (!(temperature > 0.0)) throw std::invalid_argument("needs T > 0");
  for (double eps : eps_list) {
    if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("scales must lie in (0,1]");
  }

  auto init_rng = rng.substream(0);
  const Ensemble init =
      sample_gaussian_cloud(n_particles, 1, options.init_center, options.init_spread, init_rng);

  // Langevin reference at the same physical time, same initial cloud.
  auto langevin_root = rng.substream(1);
  const long ref_steps = std::max<long>(1, std::lround(horizon / options.langevin_dt));
  const double ref_dt = horizon / ref_steps;
  std::vector<double> langevin_samples(n_particles);
  for (int i = 0; i < n_particles; ++i) {
    auto stream = langevin_root.substream(i);
    std::vector<double> x(init.particle(i).begin(), init.particle(i).end());
    for (long k = 0; k < ref_steps; ++k) x = langevin_step(x, objective, temperature, ref_dt, stream);
    langevin_samples[i] = x[0];
  }

  const Schedule fixed = Schedule::constant(temperature);
  auto chain_root = rng.substream(2);
  std::vector<ScaleValue> rows;
  for (double eps : eps_list) {
    const long steps = std::max<long>(1, std::lround(horizon / eps));
    SAOptions sa_options;
    sa_options.sigma_scale = std::sqrt(eps);
    std::vector<double> sa_samples(n_particles);
    for (int i = 0; i < n_particles; ++i) {
      auto stream = chain_root.substream(i);
      SAState state = make_sa_state({init.particle(i)[0]}, objective, fixed, sa_options);
      for (long k = 0; k < steps; ++k) state = sa_step(state, objective, fixed, stream, sa_options);
      sa_samples[i] = state.x[0];
    }
    rows.push_back({eps, wasserstein2_1d(sa_samples, langevin_samples)});
  }
  return rows;
}

}  // namespace kinopt
