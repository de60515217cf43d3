#include "kinopt/ensemble.hpp"

#include <cmath>
#include <stdexcept>

#include "kinopt/errors.hpp"
#include "kinopt/objective.hpp"

namespace kinopt {

std::vector<double> Ensemble::mean() const {
  const int n = size();
  if (n == 0) throw std::invalid_argument("mean of an empty ensemble");
  std::vector<double> m(particle(0).begin(), particle(0).end());
  std::vector<double> acc(dim, 0.0);
  for (int i = 1; i < n; ++i) {
    const auto p = particle(i);
    for (int j = 0; j < dim; ++j) acc[j] += p[j] - m[j];
  }
  for (int j = 0; j < dim; ++j) m[j] += acc[j] / n;
  return m;
}

double Ensemble::variance_trace() const {
  const int n = size();
  if (n == 0) return 0.0;
  const auto m = mean();
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto p = particle(i);
    for (int j = 0; j < dim; ++j) {
      const double dj = p[j] - m[j];
      acc += dj * dj;
    }
  }
  return acc / n;
}

bool Ensemble::all_finite() const {
  for (double v : positions) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Ensemble::require_finite() const {
  if (!all_finite()) throw numeric_error("ensemble holds non-finite coordinates");
}

Ensemble sample_gaussian_cloud(int n, int dim, std::span<const double> center, double spread,
                               RngStream& rng) {
  if (n < 1 || dim < 1) throw std::invalid_argument("cloud needs n >= 1, dim >= 1");
  if (static_cast<int>(center.size()) != dim) throw std::invalid_argument("center dimension mismatch");
  Ensemble ensemble(n, dim);
  for (int i = 0; i < n; ++i) {
    auto stream = rng.substream(i);
    auto p = ensemble.particle(i);
    for (int j = 0; j < dim; ++j) p[j] = center[j] + spread * stream.normal();
  }
  return ensemble;
}

Ensemble sample_gaussian_cloud(int n, int dim, double center, double spread, RngStream& rng) {
  std::vector<double> c(dim, center);
  return sample_gaussian_cloud(n, dim, c, spread, rng);
}

std::vector<double> evaluate_energies(const Ensemble& ensemble, const Objective& objective) {
  const int n = ensemble.size();
  std::vector<double> energies(n);
  for (int i = 0; i < n; ++i) energies[i] = objective(ensemble.particle(i));
  return energies;
}

}  // namespace kinopt
