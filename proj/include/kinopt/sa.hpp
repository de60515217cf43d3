#ifndef KINOPT_SA_HPP
#define KINOPT_SA_HPP

#include <functional>
#include <span>
#include <vector>

#include "kinopt/ensemble.hpp"
#include "kinopt/objective.hpp"
#include "kinopt/rng.hpp"
#include "kinopt/schedule.hpp"

namespace kinopt {

/// One annealing chain: current point, step counter, temperature, proposal
/// scale and the cached energy of the current point.
struct SAState {
  std::vector<double> x;
  long step = 0;
  double temperature = 1.0;
  double sigma = 1.0;
  double energy = 0.0;
};

struct SATraceRow {
  long step;
  double temperature;
  double energy;
  bool accepted;
};

struct SATrace {
  std::vector<SATraceRow> rows;
};

struct SAOptions {
  double sigma_scale = 1.0;  // multiplies the sqrt(2T) default proposal scale
};

/// Metropolis acceptance min{1, exp(-(E_new - E_old)/T)}.
double acceptance_probability(double energy_old, double energy_new, double temperature);

/// Bernoulli draw with the Metropolis acceptance probability; energy-lowering
/// moves are accepted without consuming randomness.
bool metropolis_accept(double energy_old, double energy_new, double temperature, RngStream& rng);

SAState make_sa_state(std::vector<double> x0, const Objective& objective,
                      const Schedule& temperature_schedule, const SAOptions& options = {});

/// One Metropolis step: Gaussian proposal at the current scale, accept/reject,
/// then advance temperature and proposal scale along the schedule.
SAState sa_step(const SAState& state, const Objective& objective,
                const Schedule& temperature_schedule, RngStream& rng,
                const SAOptions& options = {}, SATrace* trace = nullptr);

struct TransitionEstimate {
  double value;
  double std_error;
};

/// Monte Carlo estimate of the one-step transition operator applied to phi,
/// E[beta(x, x + sigma xi) (phi(x + sigma xi) - phi(x))] + phi(x).
TransitionEstimate estimate_transition_operator(
    const std::function<double(std::span<const double>)>& phi, std::span<const double> x,
    double sigma, double temperature, const Objective& objective, std::size_t n_samples,
    RngStream& rng);

struct SAEnsembleRun {
  std::vector<long> snapshot_steps;
  std::vector<Ensemble> snapshots;
};

/// N independent chains started from `init`; snapshots recorded whenever the
/// step counter hits an entry of `snapshot_steps` (sorted ascending, step 0
/// allowed). Chain i draws from rng.substream(i).
SAEnsembleRun run_sa_ensemble(const Ensemble& init, long steps, const Objective& objective,
                              const Schedule& temperature_schedule,
                              std::span<const long> snapshot_steps, RngStream& rng,
                              const SAOptions& options = {}, int threads = 1);

/// Euler-Maruyama step of the overdamped Langevin dynamics,
/// x' = x - grad E(x) dt + sqrt(2 T dt) xi.
std::vector<double> langevin_step(std::span<const double> x, const Objective& objective,
                                  double temperature, double dt, RngStream& rng);

struct ScaleValue {
  double scale;
  double value;
};

struct DiffusionScalingOptions {
  double langevin_dt = 1e-3;
  double init_center = 0.0;
  double init_spread = 1.0;
};

/// Fixed-temperature chains with proposal scale sqrt(eps) * sqrt(2T), run for
/// horizon/eps steps, compared in W2 against a Langevin ensemble at the same
/// physical time with matched seeds. 1D objectives only.
std::vector<ScaleValue> sa_diffusion_scaling(std::span<const double> eps_list,
                                             const Objective& objective, double temperature,
                                             double horizon, int n_particles, RngStream& rng,
                                             const DiffusionScalingOptions& options = {});

}  // namespace kinopt

#endif
