#include "kinopt/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "kinopt/errors.hpp"

namespace kinopt {

namespace {

constexpr double kDensityFloor = 1e-300;

double trapezoid(std::span<const double> values, double h) {
  double s = 0.5 * (values.front() + values.back());
  for (std::size_t i = 1; i + 1 < values.size(); ++i) s += values[i];
  return s * h;
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(int d, std::vector<double> pts, std::vector<double> w)
    : dim(d), points(std::move(pts)), weights(std::move(w)) {
  if (dim < 1) throw std::invalid_argument("measure needs dim >= 1");
  if (points.empty() || points.size() % dim != 0)
    throw std::invalid_argument("measure needs a nonempty multiple-of-dim point array");
  const std::size_t n = points.size() / dim;
  if (weights.empty()) {
    weights.assign(n, 1.0 / static_cast<double>(n));
    return;
  }
  if (weights.size() != n) throw std::invalid_argument("one weight per support point required");
  double total = 0.0;
  for (double v : weights) {
    if (!(v >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    total += v;
  }
  if (!(total > 0.0)) throw std::invalid_argument("weights must not all vanish");
  for (double& v : weights) v /= total;
}

EmpiricalMeasure EmpiricalMeasure::from_ensemble(const Ensemble& ensemble) {
  return EmpiricalMeasure(ensemble.dim, ensemble.positions);
}

GridDensity1D::GridDensity1D(GridSpec grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (grid_.nodes < 2) throw std::invalid_argument("grid needs at least two nodes");
  if (!(grid_.hi > grid_.lo)) throw std::invalid_argument("grid needs hi > lo");
  if (static_cast<int>(values_.size()) != grid_.nodes)
    throw std::invalid_argument("one value per node required");
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw std::invalid_argument("density values must be finite and nonnegative");
  }
  const double mass = trapezoid(values_, spacing());
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw numeric_error("grid density has no mass to normalize");
  for (double& v : values_) v /= mass;
}

double GridDensity1D::node_weight(int i) const {
  const double h = spacing();
  return (i == 0 || i == grid_.nodes - 1) ? 0.5 * h : h;
}

bool GridDensity1D::same_grid(const GridDensity1D& other) const {
  return grid_.nodes == other.grid_.nodes && grid_.lo == other.grid_.lo &&
         grid_.hi == other.grid_.hi;
}

GridDensity1D gibbs_density(const Objective& objective, double temperature, const GridSpec& grid) {
  if (objective.dim() != 1) throw std::invalid_argument("grid densities are one-dimensional");
  if (!(temperature > 0.0)) throw std::invalid_argument("gibbs density needs T > 0");
  if (grid.nodes < 2) throw std::invalid_argument("grid needs at least two nodes");

  const double h = (grid.hi - grid.lo) / (grid.nodes - 1);
  std::vector<double> energies(grid.nodes);
  double e_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.nodes; ++i) {
    const double x = grid.lo + h * i;
    energies[i] = objective(std::span<const double>(&x, 1));
    e_min = std::min(e_min, energies[i]);
  }
  std::vector<double> values(grid.nodes);
  for (int i = 0; i < grid.nodes; ++i) values[i] = std::exp(-(energies[i] - e_min) / temperature);
  const double shifted_mass = trapezoid(values, h);
  if (!(shifted_mass > 0.0) || !std::isfinite(shifted_mass))
    throw numeric_error("gibbs density underflowed on the whole grid");

  GridDensity1D density(grid, std::move(values));
  density.set_log_partition(std::log(shifted_mass) - e_min / temperature);
  return density;
}

double kl_divergence(const GridDensity1D& g, const GridDensity1D& f, bool printed_orientation) {
  if (!g.same_grid(f)) throw std::invalid_argument("KL needs a common grid");
  double acc = 0.0;
  for (int i = 0; i < g.size(); ++i) {
    const double gi = g.value(i);
    const double fi = std::max(f.value(i), kDensityFloor);
    if (printed_orientation) {
      acc += g.node_weight(i) * fi * std::log(std::max(gi, kDensityFloor) / fi);
    } else if (gi > 0.0) {  // 0 log 0 = 0
      acc += g.node_weight(i) * gi * std::log(gi / fi);
    }
  }
  return acc;
}

double wasserstein2_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("W2 needs nonempty samples");
  std::vector<double> as(a.begin(), a.end());
  std::vector<double> bs(b.begin(), b.end());
  std::sort(as.begin(), as.end());
  std::sort(bs.begin(), bs.end());
  const std::size_t na = as.size();
  const std::size_t nb = bs.size();
  if (na == nb) {
    double acc = 0.0;
    for (std::size_t i = 0; i < na; ++i) {
      const double d = as[i] - bs[i];
      acc += d * d;
    }
    return std::sqrt(acc / na);
  }
  // Unequal sizes: exact quantile coupling over the merged step breakpoints.
  double acc = 0.0;
  double u = 0.0;
  std::size_t i = 0, j = 0;
  while (i < na && j < nb) {
    const double ua = static_cast<double>(i + 1) / na;
    const double ub = static_cast<double>(j + 1) / nb;
    const double un = std::min(ua, ub);
    const double d = as[i] - bs[j];
    acc += d * d * (un - u);
    u = un;
    if (ua <= un) ++i;
    if (ub <= un) ++j;
  }
  return std::sqrt(acc);
}

double sliced_w2(std::span<const double> a, std::span<const double> b, int dim, int n_projections,
                 RngStream& rng) {
  if (dim < 2) throw std::invalid_argument("sliced W2 is for dim >= 2");
  if (n_projections < 1) throw std::invalid_argument("need at least one projection");
  if (a.empty() || b.empty() || a.size() % dim != 0 || b.size() % dim != 0)
    throw std::invalid_argument("samples must be nonempty multiples of dim");
  const std::size_t na = a.size() / dim;
  const std::size_t nb = b.size() / dim;

  std::vector<double> direction(dim), pa(na), pb(nb);
  double acc = 0.0;
  for (int p = 0; p < n_projections; ++p) {
    double norm = 0.0;
    do {
      norm = 0.0;
      for (int j = 0; j < dim; ++j) {
        direction[j] = rng.normal();
        norm += direction[j] * direction[j];
      }
    } while (!(norm > 0.0));
    norm = std::sqrt(norm);
    for (int j = 0; j < dim; ++j) direction[j] /= norm;

    for (std::size_t i = 0; i < na; ++i) {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) s += a[i * dim + j] * direction[j];
      pa[i] = s;
    }
    for (std::size_t i = 0; i < nb; ++i) {
      double s = 0.0;
      for (int j = 0; j < dim; ++j) s += b[i * dim + j] * direction[j];
      pb[i] = s;
    }
    const double w = wasserstein2_1d(pa, pb);
    acc += w * w;
  }
  return std::sqrt(dim * acc / n_projections);
}

double laplace_functional(const EmpiricalMeasure& measure, const Objective& objective,
                          double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("laplace functional needs T > 0");
  const int n = measure.size();
  std::vector<double> energies(n);
  double e_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    energies[i] = objective(measure.point(i));
    e_min = std::min(e_min, energies[i]);
  }
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    acc += measure.weights[i] * std::exp(-(energies[i] - e_min) / temperature);
  return e_min - temperature * std::log(acc);
}

double laplace_functional(const GridDensity1D& density, const Objective& objective,
                          double temperature) {
  if (!(temperature > 0.0)) throw std::invalid_argument("laplace functional needs T > 0");
  const int n = density.size();
  std::vector<double> energies(n);
  double e_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double x = density.node(i);
    energies[i] = objective(std::span<const double>(&x, 1));
    if (density.value(i) > 0.0) e_min = std::min(e_min, energies[i]);
  }
  double acc = 0.0;
  for (int i = 0; i < n; ++i)
    acc += density.node_weight(i) * density.value(i) * std::exp(-(energies[i] - e_min) / temperature);
  return e_min - temperature * std::log(acc);
}

double dissipation_functional(const GridDensity1D& g, const Objective& objective,
                              double temperature, double sigma,
                              const DissipationOptions& options) {
  if (!(temperature > 0.0)) throw std::invalid_argument("dissipation needs T > 0");
  if (options.proposal_weighting && !(sigma > 0.0))
    throw std::invalid_argument("proposal weighting needs sigma > 0");
  const GridDensity1D equilibrium = gibbs_density(objective, temperature, g.grid());

  const int n = g.size();
  std::vector<double> energies(n), ratios(n);
  double e_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double x = g.node(i);
    energies[i] = objective(std::span<const double>(&x, 1));
    e_min = std::min(e_min, energies[i]);
    ratios[i] = std::max(g.value(i), kDensityFloor) / std::max(equilibrium.value(i), kDensityFloor);
  }
  // exp(-max{E(x),E(y)}/T)/Z_T computed with the same min-shift that
  // normalized the equilibrium density.
  std::vector<double> shifted(n);
  double z_shifted = 0.0;
  for (int i = 0; i < n; ++i) {
    shifted[i] = std::exp(-(energies[i] - e_min) / temperature);
    z_shifted += equilibrium.node_weight(i) * shifted[i];
  }

  const double inv_sqrt_two_pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = ratios[j];
      const double v = ratios[i];
      if (u == v) continue;
      const double h_uv = (u - v) * (std::log(u) - std::log(v));
      double kernel = 1.0;
      if (options.proposal_weighting) {
        const double z = (g.node(j) - g.node(i)) / sigma;
        kernel = inv_sqrt_two_pi / sigma * std::exp(-0.5 * z * z);
      }
      const double weight = std::min(shifted[i], shifted[j]) / z_shifted;
      acc += g.node_weight(i) * g.node_weight(j) * kernel * weight * h_uv;
    }
  }
  return 0.5 * acc;
}

GridDensity1D histogram_density(std::span<const double> samples, double lo, double hi, int bins) {
  if (samples.empty()) throw std::invalid_argument("histogram needs samples");
  if (bins < 2) throw std::invalid_argument("histogram needs at least two bins");
  if (!(hi > lo)) throw std::invalid_argument("histogram needs hi > lo");
  const double width = (hi - lo) / bins;
  std::vector<double> counts(bins, 0.0);
  for (double s : samples) {
    int b = static_cast<int>((s - lo) / width);
    b = std::clamp(b, 0, bins - 1);
    counts[b] += 1.0;
  }
  for (double& c : counts) {
    c = std::max(c / (samples.size() * width), kDensityFloor);
  }
  const GridSpec centers{lo + 0.5 * width, hi - 0.5 * width, bins};
  return GridDensity1D(centers, std::move(counts));
}

double kl_samples_vs_gibbs(std::span<const double> samples, const Objective& objective,
                           double temperature, double halfwidth, int bins) {
  const GridDensity1D hist = histogram_density(samples, -halfwidth, halfwidth, bins);
  const GridDensity1D gibbs = gibbs_density(objective, temperature, hist.grid());
  return kl_divergence(hist, gibbs);
}

}  // namespace kinopt
