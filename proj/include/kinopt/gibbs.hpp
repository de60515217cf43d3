#ifndef KINOPT_GIBBS_HPP
#define KINOPT_GIBBS_HPP

#include <span>
#include <vector>

#include "kinopt/ensemble.hpp"

namespace kinopt {

// Gibbs-weighted average of points, weights proportional to exp(-alpha * E).
// Energies are shifted by their minimum before exponentiation and the sum is
// anchored at the minimizing point, so large alpha recovers the argmin exactly
// and a consensus ensemble maps to itself bitwise.
std::vector<double> gibbs_mean(std::span<const double> points, int dim,
                               std::span<const double> energies, double alpha);

std::vector<double> gibbs_mean(const Ensemble& ensemble, std::span<const double> energies,
                               double alpha);

}  // namespace kinopt

#endif
