#include "kinopt/objective.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "kinopt/errors.hpp"

namespace kinopt {

Objective::Objective(std::string name, int dim, EvalFn eval)
    : name_(std::move(name)), dim_(dim), eval_(std::move(eval)) {
  if (dim_ < 1) throw std::invalid_argument("objective dimension must be >= 1");
  if (!eval_) throw std::invalid_argument("objective needs an evaluator");
}

double Objective::operator()(std::span<const double> x) const {
  const double value = eval_(x);
  if (!std::isfinite(value)) throw numeric_error("objective '" + name_ + "' returned a non-finite value");
  return value;
}

void Objective::gradient(std::span<const double> x, std::span<double> out) const {
  if (grad_) {
    grad_(x, out);
  } else {
    std::vector<double> probe(x.begin(), x.end());
    for (int j = 0; j < dim_; ++j) {
      const double h = 1e-5 * (1.0 + std::abs(x[j]));
      const double xj = probe[j];
      probe[j] = xj + h;
      const double up = eval_(probe);
      probe[j] = xj - h;
      const double down = eval_(probe);
      probe[j] = xj;
      out[j] = (up - down) / (2.0 * h);
    }
  }
  for (int j = 0; j < dim_; ++j) {
    if (!std::isfinite(out[j])) throw numeric_error("gradient of '" + name_ + "' is non-finite");
  }
}

std::span<const double> Objective::min_point() const {
  if (!known_min_point_) throw std::logic_error("objective '" + name_ + "' has no known minimizer");
  return *known_min_point_;
}

double Objective::min_value() const {
  if (!known_min_point_) throw std::logic_error("objective '" + name_ + "' has no known minimizer");
  return known_min_value_;
}

Objective& Objective::with_gradient(GradFn grad) {
  grad_ = std::move(grad);
  return *this;
}

Objective& Objective::with_known_min(std::vector<double> point, double value) {
  if (static_cast<int>(point.size()) != dim_) throw std::invalid_argument("minimizer dimension mismatch");
  known_min_point_ = std::move(point);
  known_min_value_ = value;
  return *this;
}

Objective& Objective::with_hessian_bound(double bound) {
  hessian_bound_ = bound;
  return *this;
}

Objective& Objective::with_domain_halfwidth(double halfwidth) {
  domain_halfwidth_ = halfwidth;
  return *this;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double squared_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

Objective make_benchmark(const std::string& name, int dim) {
  if (dim < 1) throw std::invalid_argument("benchmark dimension must be >= 1");
  if (name == "quadratic") {
    Objective obj(name, dim, [](std::span<const double> x) { return 0.5 * squared_norm(x); });
    obj.with_gradient([](std::span<const double> x, std::span<double> g) {
         for (std::size_t j = 0; j < x.size(); ++j) g[j] = x[j];
       })
        .with_known_min(std::vector<double>(dim, 0.0), 0.0)
        .with_hessian_bound(1.0)
        .with_domain_halfwidth(6.0);
    return obj;
  }
  if (name == "doublewell1d") {
    if (dim != 1) throw std::invalid_argument("doublewell1d is one-dimensional");
    Objective obj(name, 1, [](std::span<const double> x) {
      const double s = x[0] * x[0] - 1.0;
      return s * s;
    });
    obj.with_gradient([](std::span<const double> x, std::span<double> g) {
         g[0] = 4.0 * x[0] * (x[0] * x[0] - 1.0);
       })
        .with_known_min({1.0}, 0.0)
        .with_domain_halfwidth(2.5);
    return obj;
  }
  if (name == "rastrigin") {
    Objective obj(name, dim, [dim](std::span<const double> x) {
      double s = 10.0 * dim;
      for (double v : x) s += v * v - 10.0 * std::cos(kTwoPi * v);
      return s;
    });
    obj.with_gradient([](std::span<const double> x, std::span<double> g) {
         for (std::size_t j = 0; j < x.size(); ++j)
           g[j] = 2.0 * x[j] + 10.0 * kTwoPi * std::sin(kTwoPi * x[j]);
       })
        .with_known_min(std::vector<double>(dim, 0.0), 0.0)
        .with_domain_halfwidth(5.12);
    return obj;
  }
  if (name == "ackley") {
    Objective obj(name, dim, [dim](std::span<const double> x) {
      double sq = 0.0;
      double cs = 0.0;
      for (double v : x) {
        sq += v * v;
        cs += std::cos(kTwoPi * v);
      }
      return -20.0 * std::exp(-0.2 * std::sqrt(sq / dim)) - std::exp(cs / dim) + 20.0 +
             std::numbers::e;
    });
    obj.with_known_min(std::vector<double>(dim, 0.0), 0.0).with_domain_halfwidth(5.0);
    return obj;
  }
  throw std::invalid_argument("unknown benchmark '" + name +
                              "'; corpus: quadratic, doublewell1d, rastrigin, ackley");
}

std::vector<std::string> benchmark_names() {
  return {"quadratic", "doublewell1d", "rastrigin", "ackley"};
}

void GrowthConstants::validate() const {
  const double values[] = {lipschitz, upper,         lower,         lower_radius,
                           inverse_coeff, inverse_power, inverse_radius, far_gap};
  for (double v : values) {
    if (!(v > 0.0)) throw std::invalid_argument("growth constants must be strictly positive");
  }
}

const GrowthCheck& GrowthReport::check(const std::string& inequality) const {
  for (const auto& c : checks) {
    if (c.inequality == inequality) return c;
  }
  throw std::invalid_argument("no growth check named '" + inequality + "'");
}

GrowthReport verify_growth_conditions(const Objective& objective, const GrowthConstants& constants,
                                      std::size_t n_samples, RngStream& rng) {
  constants.validate();
  if (!objective.has_known_min())
    throw std::invalid_argument("growth conditions need a known minimizer");
  if (n_samples == 0) throw std::invalid_argument("need at least one sample");

  const int d = objective.dim();
  const auto x_star = objective.min_point();
  const double e_star = objective.min_value();
  const double box = 2.0 * std::max({constants.lower_radius, constants.inverse_radius, 1.0});

  std::size_t lipschitz_ok = 0;
  std::size_t upper_ok = 0;
  std::size_t lower_ok = 0, lower_n = 0;
  std::size_t near_ok = 0, near_n = 0;
  std::size_t far_ok = 0, far_n = 0;

  std::vector<double> x(d), y(d);
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (int j = 0; j < d; ++j) {
      x[j] = x_star[j] + box * (2.0 * rng.uniform() - 1.0);
      y[j] = x_star[j] + box * (2.0 * rng.uniform() - 1.0);
    }
    const double ex = objective(x);
    const double ey = objective(y);

    double nx = 0.0, ny = 0.0, dxy = 0.0, dist_star = 0.0;
    for (int j = 0; j < d; ++j) {
      nx += x[j] * x[j];
      ny += y[j] * y[j];
      const double dj = x[j] - y[j];
      dxy += dj * dj;
      const double sj = x[j] - x_star[j];
      dist_star += sj * sj;
    }
    nx = std::sqrt(nx);
    ny = std::sqrt(ny);
    dxy = std::sqrt(dxy);
    dist_star = std::sqrt(dist_star);

    if (std::abs(ex - ey) <= constants.lipschitz * (1.0 + nx + ny) * dxy) ++lipschitz_ok;
    if (ex - e_star <= constants.upper * (1.0 + nx * nx)) ++upper_ok;
    if (nx > constants.lower_radius) {
      ++lower_n;
      if (ex - e_star >= constants.lower * nx * nx) ++lower_ok;
    }
    if (dist_star <= constants.inverse_radius) {
      ++near_n;
      if (constants.inverse_coeff * std::pow(dist_star, constants.inverse_power) <= ex - e_star)
        ++near_ok;
    } else {
      ++far_n;
      if (constants.far_gap < ex - e_star) ++far_ok;
    }
  }

  auto fraction = [](std::size_t ok, std::size_t n) {
    return n == 0 ? 0.0 : static_cast<double>(ok) / static_cast<double>(n);
  };
  GrowthReport report;
  report.checks = {
      {"lipschitz", fraction(lipschitz_ok, n_samples), n_samples},
      {"upper_growth", fraction(upper_ok, n_samples), n_samples},
      {"lower_growth", fraction(lower_ok, lower_n), lower_n},
      {"inverse_continuity_near", fraction(near_ok, near_n), near_n},
      {"inverse_continuity_far", fraction(far_ok, far_n), far_n},
  };
  return report;
}

}  // namespace kinopt
