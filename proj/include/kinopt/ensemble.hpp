#ifndef KINOPT_ENSEMBLE_HPP
#define KINOPT_ENSEMBLE_HPP

#include <span>
#include <vector>

#include "kinopt/rng.hpp"

namespace kinopt {

class Objective;

/// N particles in R^d, stored particle-major.
struct Ensemble {
  int dim = 0;
  std::vector<double> positions;

  Ensemble() = default;
  Ensemble(int n, int d) : dim(d), positions(static_cast<std::size_t>(n) * d, 0.0) {}

  int size() const { return dim > 0 ? static_cast<int>(positions.size()) / dim : 0; }

  std::span<double> particle(int i) {
    return {positions.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
  std::span<const double> particle(int i) const {
    return {positions.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }

  // Mean anchored at particle 0 so a consensus ensemble reports its common
  // point bitwise.
  std::vector<double> mean() const;

  /// Sum over coordinates of the per-coordinate sample variance (1/N normalized).
  double variance_trace() const;

  bool all_finite() const;
  void require_finite() const;  // throws numeric_error
};

/// N points from an isotropic Gaussian around `center` with std `spread`.
Ensemble sample_gaussian_cloud(int n, int dim, std::span<const double> center, double spread,
                               RngStream& rng);
Ensemble sample_gaussian_cloud(int n, int dim, double center, double spread, RngStream& rng);

std::vector<double> evaluate_energies(const Ensemble& ensemble, const Objective& objective);

}  // namespace kinopt

#endif
