#ifndef KINOPT_PSO_HPP
#define KINOPT_PSO_HPP

#include <span>
#include <vector>

#include "kinopt/ensemble.hpp"
#include "kinopt/objective.hpp"
#include "kinopt/rng.hpp"
#include "kinopt/sa.hpp"  // ScaleValue

namespace kinopt {

/// Positions, velocities and personal bests of a swarm, plus the cached
/// personal-best energies and the global best.
struct SwarmState {
  int dim = 0;
  std::vector<double> positions;       // X, n * dim
  std::vector<double> velocities;      // V
  std::vector<double> personal_bests;  // Y
  std::vector<double> best_energies;   // E(Y^i)
  std::vector<double> global_best;     // argmin over personal bests
  double global_best_energy = 0.0;

  int size() const { return dim > 0 ? static_cast<int>(positions.size()) / dim : 0; }
  std::span<const double> position(int i) const {
    return {positions.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
};

struct PSOParams {
  // classic accelerations
  double c1 = 2.0;
  double c2 = 2.0;
  // inertial SDE coefficients; friction is 1 - inertia
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double sigma1 = 0.7;
  double sigma2 = 0.7;
  double inertia = 0.5;       // m in (0, 1]
  double memory_speed = 1.0;  // nu
  double beta = 30.0;         // sharpness of the smoothed best update
  double alpha = 50.0;        // Gibbs strength of the regularized global best
  double dt = 0.01;
  bool printed_heaviside = false;  // compatibility switch, see smooth_heaviside_printed

  double friction() const { return 1.0 - inertia; }
};

/// Positions `init`, zero velocities, personal bests at the initial positions.
SwarmState make_swarm(const Ensemble& init, const Objective& objective);

/// Classic update: v' = v + c1 r1 . (y - x) + c2 r2 . (ybest - x), x' = x + v',
/// strict personal-best comparison, global best recomputed afterwards (lowest
/// index wins ties).
SwarmState pso_classic_step(const SwarmState& swarm, const PSOParams& params,
                            const Objective& objective, RngStream& rng, int threads = 1);

/// (1 + tanh(beta z)) / 2: smooth, monotone, converges pointwise to the step
/// function as beta grows.
double smooth_heaviside(double z, double beta);

/// 1 + tanh(beta z)/2 exactly as printed in some write-ups; kept for
/// comparison, does not converge to the step function.
double smooth_heaviside_printed(double z, double beta);

/// Semi-implicit Euler-Maruyama step of the inertial swarm SDE. Noise
/// components carry sigma/sqrt(3) from the moment-matched uniform weights;
/// the regularized global best is computed once from pre-step personal bests.
SwarmState pso_sde_step(const SwarmState& swarm, const PSOParams& params,
                        const Objective& objective, RngStream& rng, int threads = 1);

/// Ensemble average of the consensus functional
/// (g/2m)^2 |X - EX|^2 + 3/2 |V|^2 + 1/2 (3 l1/m - g^2/m^2) |X-Y|^2
/// + g/2m <X - EX, V> + g/m <X - Y, V> with g the friction.
double lyapunov_functional(const SwarmState& swarm, const PSOParams& params);

struct WellPreparedness {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double chi = 0.0;
  double inequality_lhs = 0.0;  // must stay below 3/32
  bool mu1_positive = false;
  bool mu2_positive = false;
  bool inequality_ok = false;
  bool satisfied = false;
};

/// Evaluates the well-preparedness constants with the Gibbs-expectation terms
/// estimated from the initial personal bests. The Hessian bound comes from
/// the objective unless overridden (> 0).
WellPreparedness well_preparedness(const PSOParams& params, const SwarmState& initial,
                                   const Objective& objective, double hessian_bound = -1.0);

struct CBOMemoryParams {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double sigma1 = 0.4;
  double sigma2 = 0.4;
  double memory_speed = 1.0;  // nu
  double beta = 30.0;
  double alpha = 50.0;
  double dt = 0.01;
  bool printed_heaviside = false;
};

/// First-order Euler-Maruyama step of consensus dynamics with memory and
/// anisotropic noise:
/// X' = X + [l1 (Y-X) + l2 (m_a - X)] dt + s1 (X-Y) . xi1 sqrt(dt)
///      + s2 (m_a - X) . xi2 sqrt(dt),
/// Y' = Y + nu dt H_beta(E(Y) - E(X)) (X - Y); consensus from the pre-step Y.
std::pair<Ensemble, Ensemble> cbo_memory_step(const Ensemble& x, const Ensemble& y,
                                              const CBOMemoryParams& params,
                                              const Objective& objective, RngStream& rng);

struct ZeroInertiaOptions {
  double init_center = 1.5;
  double init_spread = 0.5;
};

/// For each inertia m, W2 between the position marginal of the inertial swarm
/// SDE and of the memory consensus dynamics at the horizon, matched seeds.
/// The memory run receives sigma/sqrt(3) to match the swarm noise. 1D only.
std::vector<ScaleValue> zero_inertia_experiment(std::span<const double> inertia_list,
                                                const PSOParams& params,
                                                const Objective& objective, double horizon,
                                                int n_particles, RngStream& rng,
                                                const ZeroInertiaOptions& options = {});

}  // namespace kinopt

#endif
