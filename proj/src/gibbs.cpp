#include "kinopt/gibbs.hpp"

#include <cmath>
#include <stdexcept>

#include "kinopt/errors.hpp"

namespace kinopt {

std::vector<double> gibbs_mean(std::span<const double> points, int dim,
                               std::span<const double> energies, double alpha) {
  if (dim < 1) throw std::invalid_argument("gibbs_mean needs dim >= 1");
  const std::size_t n = energies.size();
  if (n == 0 || points.size() != n * dim)
    throw std::invalid_argument("gibbs_mean needs matching nonempty points and energies");
  if (!(alpha >= 0.0)) throw std::invalid_argument("gibbs_mean needs alpha >= 0");

  std::size_t best = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(energies[i])) throw numeric_error("gibbs_mean got a non-finite energy");
    if (energies[i] < energies[best]) best = i;
  }
  const double e_min = energies[best];

  const double* anchor = points.data() + best * dim;
  std::vector<double> acc(dim, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(-alpha * (energies[i] - e_min));
    total += w;
    const double* p = points.data() + i * dim;
    for (int j = 0; j < dim; ++j) acc[j] += w * (p[j] - anchor[j]);
  }
  std::vector<double> result(anchor, anchor + dim);
  for (int j = 0; j < dim; ++j) result[j] += acc[j] / total;
  return result;
}

std::vector<double> gibbs_mean(const Ensemble& ensemble, std::span<const double> energies,
                               double alpha) {
  return gibbs_mean(ensemble.positions, ensemble.dim, energies, alpha);
}

}  // namespace kinopt
