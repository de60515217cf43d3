#ifndef KINOPT_GA_HPP
#define KINOPT_GA_HPP

#include <span>
#include <vector>

#include "kinopt/diagnostics.hpp"
#include "kinopt/ensemble.hpp"
#include "kinopt/objective.hpp"
#include "kinopt/rng.hpp"
#include "kinopt/sa.hpp"  // ScaleValue

namespace kinopt {

enum class SelectionKind { boltzmann_gibbs, random_wheel, rank_based };

struct Selection {
  SelectionKind kind = SelectionKind::boltzmann_gibbs;
  double alpha = 50.0;  // Gibbs strength, boltzmann_gibbs only
};

struct GAParams {
  double sigma = 0.1;  // mutation strength
  double nu = 0.5;     // fraction of slots filled by fresh children
  Selection selection{};
  bool elitist = true;  // retained slots resampled with fitness weights; false = uniform
};

/// Normalized fitness weights. Boltzmann-Gibbs: exp(-alpha E) with min-shift;
/// random wheel: max E - E, uniform fallback on ties; rank-based: the count of
/// particles with energy >= own.
std::vector<double> selection_weights(std::span<const double> energies,
                                      const Selection& selection);

/// Same on a weighted measure: the fitness reweights the base weights.
std::vector<double> selection_weights(std::span<const double> energies,
                                      std::span<const double> base_weights,
                                      const Selection& selection);

/// child = (1 - gamma) . x + gamma . x_star + sigma xi, componentwise.
std::vector<double> crossover_mutation(std::span<const double> x, std::span<const double> x_star,
                                       std::span<const double> gamma, double sigma,
                                       std::span<const double> xi);

/// One generation: floor(nu N) children from fitness-sampled parent pairs,
/// the remaining slots resampled from the previous ensemble.
Ensemble ga_step(const Ensemble& ensemble, const GAParams& params, const Objective& objective,
                 RngStream& rng, int threads = 1);

/// Nanbu-style sample of the one-step kinetic update: each output particle is,
/// independently, with probability nu a child of two parents drawn from the
/// parent measure, else a draw from it.
EmpiricalMeasure kinetic_ga_step(const EmpiricalMeasure& measure, const GAParams& params,
                                 const Objective& objective, RngStream& rng);

/// Euler-Maruyama step of consensus dynamics with isotropic diffusion:
/// x' = x + lambda . (m_alpha - x) dt + sigma sqrt(dt) xi. The consensus point
/// is computed once from the pre-step ensemble. `lambda` has size 1 (broadcast)
/// or dim.
Ensemble cbo_step(const Ensemble& ensemble, std::span<const double> lambda, double sigma,
                  double alpha, double dt, const Objective& objective, RngStream& rng);

struct QuasiInvariantOptions {
  double lambda = 1.0;      // crossover vector, gamma = lambda * (1,...,1)
  double cbo_dt = 0.01;     // time step of the consensus reference run
  double init_center = 2.0;
  double init_spread = 1.0;
};

/// Scaled generations (gamma -> eps gamma, sigma^2 -> eps sigma^2, horizon/eps
/// steps) against the consensus reference at matched physical time. One parent
/// is fitness-selected, the other uniform; every slot is a child. 1D only.
std::vector<ScaleValue> ga_quasi_invariant_experiment(std::span<const double> eps_list,
                                                      const GAParams& params,
                                                      const Objective& objective, double horizon,
                                                      int n_particles, RngStream& rng,
                                                      const QuasiInvariantOptions& options = {});

struct ContractionRow {
  long step;
  double mean_error;  // |mean - x_star|
  double envelope;    // exp(-k nu) |mean_0 - x_star|
  double std_error;   // sqrt(trace(cov)/N)
};

struct ContractionReport {
  std::vector<ContractionRow> rows;
  long first_violation = -1;   // first step with mean_error > envelope + 3 SE before the floor
  long reached_floor_at = -1;  // first step with mean_error < accuracy
  double accuracy_floor = 0.0;
};

/// Runs ga_step and records the contraction envelope of the ensemble mean
/// until the accuracy floor is reached. Requires a known minimizer.
ContractionReport ga_contraction_check(const Ensemble& init, const GAParams& params,
                                       const Objective& objective, long max_steps, double accuracy,
                                       RngStream& rng);

}  // namespace kinopt

#endif
