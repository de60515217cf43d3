#ifndef KINOPT_DIAGNOSTICS_HPP
#define KINOPT_DIAGNOSTICS_HPP

#include <optional>
#include <span>
#include <vector>

#include "kinopt/ensemble.hpp"
#include "kinopt/objective.hpp"
#include "kinopt/rng.hpp"

namespace kinopt {

/// Weighted samples; weights are normalized at construction.
struct EmpiricalMeasure {
  int dim = 1;
  std::vector<double> points;   // n * dim
  std::vector<double> weights;  // nonnegative, sum to 1

  EmpiricalMeasure(int d, std::vector<double> pts, std::vector<double> w = {});
  static EmpiricalMeasure from_ensemble(const Ensemble& ensemble);

  int size() const { return dim > 0 ? static_cast<int>(points.size()) / dim : 0; }
  std::span<const double> point(int i) const {
    return {points.data() + static_cast<std::size_t>(i) * dim, static_cast<std::size_t>(dim)};
  }
};

struct GridSpec {
  double lo;
  double hi;
  int nodes;
};

/// Nonnegative density samples on a uniform 1D grid, trapezoid-normalized.
class GridDensity1D {
 public:
  GridDensity1D(GridSpec grid, std::vector<double> values);

  int size() const { return grid_.nodes; }
  double node(int i) const { return grid_.lo + spacing() * i; }
  double spacing() const { return (grid_.hi - grid_.lo) / (grid_.nodes - 1); }
  const GridSpec& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double value(int i) const { return values_[i]; }

  /// Trapezoid weight of node i (h/2 at the ends, h inside).
  double node_weight(int i) const;

  bool same_grid(const GridDensity1D& other) const;

  /// log Z when the density came from gibbs_density.
  std::optional<double> log_partition() const { return log_partition_; }
  void set_log_partition(double lz) { log_partition_ = lz; }

 private:
  GridSpec grid_;
  std::vector<double> values_;
  std::optional<double> log_partition_;
};

/// exp(-E/T)/Z_T sampled on the grid; Z_T by trapezoid quadrature. 1D only.
GridDensity1D gibbs_density(const Objective& objective, double temperature, const GridSpec& grid);

/// Relative entropy of g against f, by default the standard orientation
/// integral of g log(g/f); `printed_orientation` switches the density under
/// the integral to f.
double kl_divergence(const GridDensity1D& g, const GridDensity1D& f,
                     bool printed_orientation = false);

/// Exact 1D 2-Wasserstein distance between two sample sets via the quantile
/// coupling; sample counts may differ.
double wasserstein2_1d(std::span<const double> a, std::span<const double> b);

/// Root mean square of 1D W2 over random unit-vector projections, scaled by
/// sqrt(d) so a translation by v reports |v|.
double sliced_w2(std::span<const double> a, std::span<const double> b, int dim, int n_projections,
                 RngStream& rng);

/// -T log integral of exp(-E/T) against the measure, min-E shifted.
double laplace_functional(const EmpiricalMeasure& measure, const Objective& objective,
                          double temperature);
double laplace_functional(const GridDensity1D& density, const Objective& objective,
                          double temperature);

struct DissipationOptions {
  // Weight pairs (x, y) by the Gaussian proposal density of scale sigma; off
  // means the bare double grid integral.
  bool proposal_weighting = true;
};

/// Entropy-dissipation functional: double grid integral of
/// exp(-max{E(x),E(y)}/T)/Z_T times h(g(y)/f_T(y), g(x)/f_T(x)) with
/// h(u,v) = (u-v)(log u - log v).
double dissipation_functional(const GridDensity1D& g, const Objective& objective,
                              double temperature, double sigma,
                              const DissipationOptions& options = {});

/// Histogram of samples as a density on bin centers; samples are clamped to
/// [lo, hi], empty bins floored at 1e-300.
GridDensity1D histogram_density(std::span<const double> samples, double lo, double hi, int bins);

/// KL(histogram || Gibbs) on the shared bin-center grid over [-halfwidth, halfwidth].
double kl_samples_vs_gibbs(std::span<const double> samples, const Objective& objective,
                           double temperature, double halfwidth, int bins = 256);

}  // namespace kinopt

#endif
