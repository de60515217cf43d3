#ifndef KINOPT_SCALING_LAB_HPP
#define KINOPT_SCALING_LAB_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace kinopt {

enum class ExperimentKind {
  sa_diffusion,        // scale = eps, W2 against the Langevin ensemble
  ga_quasi_invariant,  // scale = eps, W2 against the consensus ensemble
  pso_zero_inertia,    // scale = inertia m, W2 against memory consensus
  ga_contraction,      // scale = alpha, min margin of the contraction envelope
  enkf_collapse,       // scale = member count, fitted spread-decay slope
};

ExperimentKind parse_experiment_kind(const std::string& name);
std::string to_string(ExperimentKind kind);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::sa_diffusion;
  std::vector<double> scales;  // strictly positive, sorted descending
  std::string objective = "quadratic";
  int dim = 1;
  int n_particles = 10000;  // >= 100
  double horizon = 1.0;
  std::uint64_t seed = 42;
  int replicates = 5;  // noise floor estimate

  // kind-specific knobs
  double temperature = 0.5;  // sa_diffusion
  double alpha = 50.0;       // Gibbs strength (ga kinds, pso)
  double nu = 0.5;           // ga fraction of children / contraction rate
  double sigma = 0.5;        // ga mutation strength
  double accuracy = 0.05;    // ga_contraction floor
  long max_steps = 60;       // ga_contraction cap

  void validate() const;
};

struct ExperimentRow {
  double scale;
  double value;
  double mc_error;  // replicate standard deviation
};

struct ExperimentReport {
  ExperimentSpec spec;
  std::vector<ExperimentRow> rows;
  bool pass = false;
};

/// Runs the experiment with `replicates` seed replicates per scale; the row
/// value is the replicate mean, mc_error the replicate standard deviation.
/// Deterministic given the spec.
ExperimentReport run_experiment(const ExperimentSpec& spec);

/// Recomputes the verdict from raw rows: monotone kinds tolerate increases up
/// to twice the noise floor and require a resolvable net decrease; threshold
/// kinds check their margin/slope range.
bool evaluate_pass(ExperimentKind kind, const std::vector<ExperimentRow>& rows);

/// One line per report: kind, objective, headline numbers and the verdict.
std::string summarize(const std::vector<ExperimentReport>& reports);

/// JSON document {kind, objective, N, horizon, seed, rows: [...], pass}.
std::string report_to_json(const ExperimentReport& report);

}  // namespace kinopt

#endif
