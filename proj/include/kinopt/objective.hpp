#ifndef KINOPT_OBJECTIVE_HPP
#define KINOPT_OBJECTIVE_HPP

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kinopt/rng.hpp"

namespace kinopt {

/// An energy landscape E : R^d -> R, optionally with an analytic gradient and
/// a known global minimizer.
class Objective {
 public:
  using EvalFn = std::function<double(std::span<const double>)>;
  using GradFn = std::function<void(std::span<const double>, std::span<double>)>;

  Objective(std::string name, int dim, EvalFn eval);

  /// Evaluates the energy; throws numeric_error on a non-finite result.
  double operator()(std::span<const double> x) const;

  /// Analytic gradient when available, central differences (h = 1e-5 of
  /// coordinate scale) otherwise.
  void gradient(std::span<const double> x, std::span<double> out) const;

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }

  bool has_known_min() const { return known_min_point_.has_value(); }
  std::span<const double> min_point() const;
  double min_value() const;

  bool has_analytic_gradient() const { return static_cast<bool>(grad_); }
  std::optional<double> hessian_bound() const { return hessian_bound_; }

  /// Half-width of the box [-L, L]^d used for grids and histograms.
  double domain_halfwidth() const { return domain_halfwidth_; }

  Objective& with_gradient(GradFn grad);
  Objective& with_known_min(std::vector<double> point, double value);
  Objective& with_hessian_bound(double bound);
  Objective& with_domain_halfwidth(double halfwidth);

 private:
  std::string name_;
  int dim_;
  EvalFn eval_;
  GradFn grad_;
  std::optional<std::vector<double>> known_min_point_;
  double known_min_value_ = 0.0;
  std::optional<double> hessian_bound_;
  double domain_halfwidth_ = 6.0;
};

/// Benchmark corpus: "quadratic", "doublewell1d", "rastrigin", "ackley".
Objective make_benchmark(const std::string& name, int dim);
std::vector<std::string> benchmark_names();

/// Constants of the growth/inverse-continuity conditions a landscape is
/// checked against.
struct GrowthConstants {
  double lipschitz = 1.0;       // L_E
  double upper = 1.0;           // c_u
  double lower = 1.0;           // c_l
  double lower_radius = 1.0;    // R_l
  double inverse_coeff = 1.0;   // c_p
  double inverse_power = 2.0;   // p
  double inverse_radius = 1.0;  // R_p
  double far_gap = 1.0;         // E_inf

  void validate() const;  // all strictly positive
};

struct GrowthCheck {
  std::string inequality;
  double satisfied_fraction;  // among applicable sampled points
  std::size_t checked;
};

struct GrowthReport {
  std::vector<GrowthCheck> checks;
  const GrowthCheck& check(const std::string& inequality) const;
};

/// Samples points around the known minimizer and reports, per inequality,
/// the fraction of samples satisfying it with the supplied constants.
GrowthReport verify_growth_conditions(const Objective& objective, const GrowthConstants& constants,
                                      std::size_t n_samples, RngStream& rng);

}  // namespace kinopt

#endif
