#include "kinopt/ga.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "kinopt/errors.hpp"
#include "kinopt/gibbs.hpp"
#include "kinopt/parallel.hpp"

namespace kinopt {

namespace {

void require_finite_energies(std::span<const double> energies) {
  if (energies.empty()) throw std::invalid_argument("selection needs at least one energy");
  for (double e : energies) {
    if (!std::isfinite(e)) throw numeric_error("selection got a non-finite energy");
  }
}

std::vector<double> normalized(std::vector<double> w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= total;
  return w;
}

// Total base weight of {j : E_j >= E_i} per i, the measure-level rank.
std::vector<double> rank_mass(std::span<const double> energies,
                              std::span<const double> base_weights) {
  const std::size_t n = energies.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return energies[a] > energies[b]; });
  std::vector<double> mass(n);
  double suffix = 0.0;
  std::size_t i = 0;
  while (i < n) {
    // ties share the same suffix mass, inclusive of each other
    std::size_t j = i;
    double block = 0.0;
    while (j < n && energies[order[j]] == energies[order[i]]) block += base_weights[order[j++]];
    suffix += block;
    for (std::size_t k = i; k < j; ++k) mass[order[k]] = suffix;
    i = j;
  }
  return mass;
}

std::vector<double> cumulative(std::span<const double> weights) {
  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    cdf[i] = acc;
  }
  cdf.back() = 1.0;
  return cdf;
}

std::size_t sample_index(std::span<const double> cdf, double u) {
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(it - cdf.begin(), cdf.size() - 1);
}

}  // namespace

std::vector<double> selection_weights(std::span<const double> energies,
                                      std::span<const double> base_weights,
                                      const Selection& selection) {
  require_finite_energies(energies);
  if (base_weights.size() != energies.size())
    throw std::invalid_argument("one base weight per energy required");
  const std::size_t n = energies.size();
  std::vector<double> w(n);
  switch (selection.kind) {
    case SelectionKind::boltzmann_gibbs: {
      if (!(selection.alpha >= 0.0))
        throw std::invalid_argument("Boltzmann-Gibbs selection needs alpha >= 0");
      const double e_min = *std::min_element(energies.begin(), energies.end());
      for (std::size_t i = 0; i < n; ++i)
        w[i] = base_weights[i] * std::exp(-selection.alpha * (energies[i] - e_min));
      break;
    }
    case SelectionKind::random_wheel: {
      const double e_max = *std::max_element(energies.begin(), energies.end());
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        w[i] = base_weights[i] * (e_max - energies[i]);
        total += w[i];
      }
      if (!(total > 0.0)) {  // all energies tie: fall back to the base measure
        std::copy(base_weights.begin(), base_weights.end(), w.begin());
      }
      break;
    }
    case SelectionKind::rank_based: {
      const auto mass = rank_mass(energies, base_weights);
      for (std::size_t i = 0; i < n; ++i) w[i] = base_weights[i] * mass[i];
      break;
    }
  }
  return normalized(std::move(w));
}

std::vector<double> selection_weights(std::span<const double> energies,
                                      const Selection& selection) {
  require_finite_energies(energies);
  const std::vector<double> uniform(energies.size(), 1.0 / energies.size());
  return selection_weights(energies, uniform, selection);
}

std::vector<double> crossover_mutation(std::span<const double> x, std::span<const double> x_star,
                                       std::span<const double> gamma, double sigma,
                                       std::span<const double> xi) {
  const std::size_t d = x.size();
  if (x_star.size() != d || gamma.size() != d || xi.size() != d)
    throw std::invalid_argument("crossover needs matching dimensions");
  std::vector<double> child(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (!(gamma[j] >= 0.0) || !(gamma[j] <= 1.0))
      throw std::invalid_argument("crossover vector must lie in [0,1]^d");
    child[j] = (1.0 - gamma[j]) * x[j] + gamma[j] * x_star[j] + sigma * xi[j];
  }
  return child;
}

Ensemble ga_step(const Ensemble& ensemble, const GAParams& params, const Objective& objective,
                 RngStream& rng, int threads) {
  const int n = ensemble.size();
  const int d = ensemble.dim;
  if (n < 2) throw std::invalid_argument("a generation needs at least two particles");
  if (!(params.nu >= 0.0) || !(params.nu <= 1.0))
    throw std::invalid_argument("nu must lie in [0,1]");
  if (params.sigma < 0.0) throw std::invalid_argument("sigma must be nonnegative");

  const auto energies = evaluate_energies(ensemble, objective);
  const auto parent_weights = selection_weights(energies, params.selection);
  const auto parent_cdf = cumulative(parent_weights);
  std::vector<double> retain_cdf;
  if (params.elitist) {
    retain_cdf = parent_cdf;
  } else {
    std::vector<double> uniform(n, 1.0 / n);
    retain_cdf = cumulative(uniform);
  }

  const int n_children = static_cast<int>(std::floor(params.nu * n));
  Ensemble next(n, d);
  RngStream step_rng = rng.split();
  parallel_for(n, threads, [&](int slot) {
    auto stream = step_rng.substream(slot);
    auto out = next.particle(slot);
    if (slot < n_children) {
      const std::size_t p = sample_index(parent_cdf, stream.uniform());
      const std::size_t q = sample_index(parent_cdf, stream.uniform());
      std::vector<double> gamma(d), xi(d);
      for (int j = 0; j < d; ++j) gamma[j] = stream.uniform();
      for (int j = 0; j < d; ++j) xi[j] = stream.normal();
      const auto child = crossover_mutation(ensemble.particle(static_cast<int>(p)),
                                            ensemble.particle(static_cast<int>(q)), gamma,
                                            params.sigma, xi);
      std::copy(child.begin(), child.end(), out.begin());
    } else {
      const std::size_t p = sample_index(retain_cdf, stream.uniform());
      const auto src = ensemble.particle(static_cast<int>(p));
      std::copy(src.begin(), src.end(), out.begin());
    }
  });
  return next;
}

EmpiricalMeasure kinetic_ga_step(const EmpiricalMeasure& measure, const GAParams& params,
                                 const Objective& objective, RngStream& rng) {
  const int n = measure.size();
  const int d = measure.dim;
  if (n < 2) throw std::invalid_argument("the kinetic update needs at least two support points");

  std::vector<double> energies(n);
  for (int i = 0; i < n; ++i) energies[i] = objective(measure.point(i));
  const auto parent_weights = selection_weights(energies, measure.weights, params.selection);
  const auto parent_cdf = cumulative(parent_weights);
  const auto base_cdf = cumulative(measure.weights);
  const auto& retain_cdf = params.elitist ? parent_cdf : base_cdf;

  std::vector<double> out(static_cast<std::size_t>(n) * d);
  RngStream step_rng = rng.split();
  for (int slot = 0; slot < n; ++slot) {
    auto stream = step_rng.substream(slot);
    double* dst = out.data() + static_cast<std::size_t>(slot) * d;
    if (stream.uniform() < params.nu) {
      const std::size_t p = sample_index(parent_cdf, stream.uniform());
      const std::size_t q = sample_index(parent_cdf, stream.uniform());
      std::vector<double> gamma(d), xi(d);
      for (int j = 0; j < d; ++j) gamma[j] = stream.uniform();
      for (int j = 0; j < d; ++j) xi[j] = stream.normal();
      const auto child = crossover_mutation(measure.point(static_cast<int>(p)),
                                            measure.point(static_cast<int>(q)), gamma,
                                            params.sigma, xi);
      std::copy(child.begin(), child.end(), dst);
    } else {
      const std::size_t p = sample_index(retain_cdf, stream.uniform());
      const auto src = measure.point(static_cast<int>(p));
      std::copy(src.begin(), src.end(), dst);
    }
  }
  return EmpiricalMeasure(d, std::move(out));
}

Ensemble cbo_step(const Ensemble& ensemble, std::span<const double> lambda, double sigma,
                  double alpha, double dt, const Objective& objective, RngStream& rng) {
  const int n = ensemble.size();
  const int d = ensemble.dim;
  if (!(dt > 0.0)) throw std::invalid_argument("consensus step needs dt > 0");
  if (lambda.size() != 1 && static_cast<int>(lambda.size()) != d)
    throw std::invalid_argument("lambda must be scalar or of dimension d");

  const auto energies = evaluate_energies(ensemble, objective);
  const auto consensus = gibbs_mean(ensemble, energies, alpha);

  Ensemble next(n, d);
  const double noise = sigma * std::sqrt(dt);
  RngStream step_rng = rng.split();
  for (int i = 0; i < n; ++i) {
    auto stream = step_rng.substream(i);
    const auto x = ensemble.particle(i);
    auto out = next.particle(i);
    for (int j = 0; j < d; ++j) {
      const double lam = lambda.size() == 1 ? lambda[0] : lambda[j];
      out[j] = x[j] + lam * (consensus[j] - x[j]) * dt + noise * stream.normal();
    }
  }
  return next;
}

std::vector<ScaleValue> ga_quasi_invariant_experiment(std::span<const double> eps_list,
                                                      const GAParams& params,
                                                      const Objective& objective, double horizon,
                                                      int n_particles, RngStream& rng,
                                                      const QuasiInvariantOptions& options) {
  if (objective.dim() != 1)
    throw std::invalid_argument("quasi-invariant scaling compares exact 1D W2; dim must be 1");
  for (double eps : eps_list) {
    if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("scales must lie in (0,1]");
  }

  auto init_rng = rng.substream(0);
  const Ensemble init =
      sample_gaussian_cloud(n_particles, 1, options.init_center, options.init_spread, init_rng);

  // Consensus reference at the same physical time.
  auto cbo_rng = rng.substream(1);
  const long ref_steps = std::max<long>(1, std::lround(horizon / options.cbo_dt));
  const double ref_dt = horizon / ref_steps;
  Ensemble reference = init;
  const double lambda[1] = {options.lambda};
  for (long k = 0; k < ref_steps; ++k)
    reference = cbo_step(reference, lambda, params.sigma, params.selection.alpha, ref_dt,
                         objective, cbo_rng);

  std::vector<ScaleValue> rows;
  for (double eps : eps_list) {
    auto ga_rng = rng.substream(2);
    const long steps = std::max<long>(1, std::lround(horizon / eps));
    // Scaled generation: every slot is a child; the first parent is drawn
    // uniformly, the second by fitness; gamma = eps * lambda * (1,...,1) and
    // mutation sqrt(eps) * sigma.
    const double gamma = eps * options.lambda;
    const double mutation = std::sqrt(eps) * params.sigma;
    Ensemble ens = init;
    std::vector<double> energies(n_particles);
    for (long k = 0; k < steps; ++k) {
      for (int i = 0; i < n_particles; ++i) energies[i] = objective(ens.particle(i));
      const auto weights = selection_weights(energies, params.selection);
      const auto cdf = cumulative(weights);
      Ensemble next(n_particles, 1);
      RngStream step_rng = ga_rng.split();
      for (int slot = 0; slot < n_particles; ++slot) {
        auto stream = step_rng.substream(slot);
        const std::size_t u = stream.below(n_particles);
        const std::size_t p = sample_index(cdf, stream.uniform());
        next.positions[slot] = (1.0 - gamma) * ens.positions[u] + gamma * ens.positions[p] +
                               mutation * stream.normal();
      }
      ens = std::move(next);
    }
    rows.push_back({eps, wasserstein2_1d(ens.positions, reference.positions)});
  }
  return rows;
}

ContractionReport ga_contraction_check(const Ensemble& init, const GAParams& params,
                                       const Objective& objective, long max_steps, double accuracy,
                                       RngStream& rng) {
  if (!objective.has_known_min())
    throw std::invalid_argument("the contraction check needs a known minimizer");
  if (!(accuracy > 0.0)) throw std::invalid_argument("accuracy must be positive");
  const auto x_star = objective.min_point();
  const int n = init.size();

  auto mean_error = [&](const Ensemble& ens) {
    const auto m = ens.mean();
    double acc = 0.0;
    for (int j = 0; j < ens.dim; ++j) {
      const double dj = m[j] - x_star[j];
      acc += dj * dj;
    }
    return std::sqrt(acc);
  };

  ContractionReport report;
  report.accuracy_floor = accuracy;
  Ensemble ens = init;
  const double initial_error = mean_error(ens);
  for (long k = 0; k <= max_steps; ++k) {
    const double err = mean_error(ens);
    const double envelope = std::exp(-static_cast<double>(k) * params.nu) * initial_error;
    const double se = std::sqrt(ens.variance_trace() / n);
    report.rows.push_back({k, err, envelope, se});
    if (err < accuracy) {
      report.reached_floor_at = k;
      break;
    }
    if (err > envelope + 3.0 * se && report.first_violation < 0) report.first_violation = k;
    if (k < max_steps) ens = ga_step(ens, params, objective, rng);
  }
  return report;
}

}  // namespace kinopt
