#include "kinopt/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "kinopt/diagnostics.hpp"
#include "kinopt/enkf.hpp"
#include "kinopt/errors.hpp"
#include "kinopt/ga.hpp"
#include "kinopt/gibbs.hpp"
#include "kinopt/io.hpp"
#include "kinopt/pso.hpp"
#include "kinopt/sa.hpp"
#include "kinopt/scaling_lab.hpp"
#include "kinopt/schedule.hpp"

namespace kinopt {

namespace {

// Typed access to the flat configuration; records resolved values and spots
// unused (misspelled) keys.
class ConfigView {
 public:
  explicit ConfigView(const std::map<std::string, std::string>& raw) : raw_(raw) {}

  std::string get_string(const std::string& key, const std::string& fallback) {
    consumed_.insert(key);
    const auto it = raw_.find(key);
    const std::string value = it == raw_.end() ? fallback : it->second;
    resolved_[key] = value;
    return value;
  }

  double get_double(const std::string& key, double fallback) {
    consumed_.insert(key);
    const auto it = raw_.find(key);
    double value = fallback;
    if (it != raw_.end()) value = parse_double(key, it->second);
    resolved_[key] = format_g17(value);
    return value;
  }

  long get_long(const std::string& key, long fallback) {
    consumed_.insert(key);
    const auto it = raw_.find(key);
    long value = fallback;
    if (it != raw_.end()) value = parse_long(key, it->second);
    resolved_[key] = std::to_string(value);
    return value;
  }

  bool get_bool(const std::string& key, bool fallback) {
    consumed_.insert(key);
    const auto it = raw_.find(key);
    bool value = fallback;
    if (it != raw_.end()) {
      if (it->second == "1" || it->second == "true") value = true;
      else if (it->second == "0" || it->second == "false") value = false;
      else throw std::invalid_argument("config key '" + key + "' must be 0/1/true/false");
    }
    resolved_[key] = value ? "1" : "0";
    return value;
  }

  std::vector<double> get_double_list(const std::string& key, const std::string& fallback) {
    const std::string text = get_string(key, fallback);
    std::vector<double> values;
    std::stringstream stream(text);
    std::string item;
    while (std::getline(stream, item, ',')) {
      if (item.empty()) continue;
      values.push_back(parse_double(key, item));
    }
    if (values.empty()) throw std::invalid_argument("config key '" + key + "' needs values");
    return values;
  }

  void reject_unused() const {
    for (const auto& [key, value] : raw_) {
      if (!consumed_.contains(key))
        throw std::invalid_argument("unknown config key '" + key + "'");
    }
  }

  const std::map<std::string, std::string>& resolved() const { return resolved_; }

 private:
  static double parse_double(const std::string& key, const std::string& text) {
    try {
      std::size_t used = 0;
      const double value = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing characters");
      return value;
    } catch (const std::exception&) {
      throw std::invalid_argument("config key '" + key + "' has a malformed number '" + text + "'");
    }
  }

  static long parse_long(const std::string& key, const std::string& text) {
    try {
      std::size_t used = 0;
      const long value = std::stol(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing characters");
      return value;
    } catch (const std::exception&) {
      throw std::invalid_argument("config key '" + key + "' has a malformed integer '" + text + "'");
    }
  }

  const std::map<std::string, std::string>& raw_;
  std::map<std::string, std::string> resolved_;
  std::set<std::string> consumed_;
};

std::uint64_t resolve_seed(ConfigView& view) {
  // priority: config (already merged with CLI overrides) > KINOPT_SEED > 42
  std::uint64_t fallback = 42;
  if (const char* env = std::getenv("KINOPT_SEED")) {
    try {
      fallback = std::stoull(env);
    } catch (const std::exception&) {
      throw std::invalid_argument("KINOPT_SEED is not an unsigned integer");
    }
  }
  const long seed = view.get_long("seed", static_cast<long>(fallback));
  return static_cast<std::uint64_t>(seed);
}

double norm_to_known_min(std::span<const double> point, const Objective& objective) {
  if (!objective.has_known_min()) return std::numeric_limits<double>::quiet_NaN();
  const auto x_star = objective.min_point();
  double acc = 0.0;
  for (std::size_t j = 0; j < point.size(); ++j) {
    const double dj = point[j] - x_star[j];
    acc += dj * dj;
  }
  return std::sqrt(acc);
}

InverseProblem make_identity_problem(const Objective& objective, double gamma_scale) {
  if (!objective.has_known_min())
    throw std::invalid_argument("filter runs need an objective with a known minimizer");
  const int d = objective.dim();
  const Eigen::MatrixXd forward = Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd truth(d);
  for (int j = 0; j < d; ++j) truth[j] = objective.min_point()[j];
  const Eigen::MatrixXd gamma = gamma_scale * Eigen::MatrixXd::Identity(d, d);
  InverseProblem problem(forward, forward * truth, gamma);
  problem.with_truth(truth);
  return problem;
}

// Buffers rows during the run; the CSV (with the resolved configuration in
// its header) is assembled afterwards.
struct RowSink {
  std::vector<std::vector<double>> rows;
  void row(std::vector<double> values) { rows.push_back(std::move(values)); }
};

RunOutput run_sa(ConfigView& view, const Objective& objective, RngStream& rng, RowSink* csv) {
  const long steps = view.get_long("steps", 10000);
  const double cooling_c = view.get_double("cooling_c", 1.0);
  const double fixed_t = view.get_double("fixed_temperature", 0.0);
  SAOptions options;
  options.sigma_scale = view.get_double("sigma_scale", 1.0);
  const double init_center = view.get_double("init_center", 2.0);
  const double init_spread = view.get_double("init_spread", 1.0);
  if (steps < 1) throw std::invalid_argument("steps must be >= 1");

  const Schedule schedule =
      fixed_t > 0.0 ? Schedule::constant(fixed_t) : Schedule::logarithmic(cooling_c);
  auto init_rng = rng.substream(0);
  std::vector<double> x0(objective.dim());
  for (double& v : x0) v = init_center + init_spread * init_rng.normal();

  auto chain_rng = rng.substream(1);
  SAState state = make_sa_state(std::move(x0), objective, schedule, options);
  for (long k = 0; k < steps; ++k) {
    SATrace trace;
    state = sa_step(state, objective, schedule, chain_rng, options, &trace);
    if (csv) {
      std::vector<double> row = {static_cast<double>(trace.rows[0].step), trace.rows[0].temperature,
                                 trace.rows[0].energy, trace.rows[0].accepted ? 1.0 : 0.0};
      row.insert(row.end(), state.x.begin(), state.x.end());
      csv->row(row);
    }
  }
  return {state.x, state.energy, steps};
}

RunOutput run_ga(ConfigView& view, const Objective& objective, RngStream& rng, RowSink* csv,
                 int threads) {
  const long steps = view.get_long("steps", 100);
  const int particles = static_cast<int>(view.get_long("particles", 200));
  GAParams params;
  params.nu = view.get_double("nu", 0.5);
  params.sigma = view.get_double("sigma", 0.1);
  params.elitist = view.get_bool("elitist", true);
  const std::string kind = view.get_string("selection", "boltzmann_gibbs");
  if (kind == "boltzmann_gibbs") params.selection.kind = SelectionKind::boltzmann_gibbs;
  else if (kind == "random_wheel") params.selection.kind = SelectionKind::random_wheel;
  else if (kind == "rank_based") params.selection.kind = SelectionKind::rank_based;
  else throw std::invalid_argument("unknown selection '" + kind + "'");
  params.selection.alpha = view.get_double("alpha", 50.0);
  const double init_center = view.get_double("init_center", 2.0);
  const double init_spread = view.get_double("init_spread", 1.0);

  auto init_rng = rng.substream(0);
  Ensemble ensemble =
      sample_gaussian_cloud(particles, objective.dim(), init_center, init_spread, init_rng);
  auto run_rng = rng.substream(1);

  auto emit = [&](long step) {
    if (!csv) return;
    const auto energies = evaluate_energies(ensemble, objective);
    double best = energies[0], mean_e = 0.0;
    for (double e : energies) {
      best = std::min(best, e);
      mean_e += e;
    }
    mean_e /= energies.size();
    const auto mean = ensemble.mean();
    csv->row({static_cast<double>(step), best, mean_e, norm_to_known_min(mean, objective),
              ensemble.variance_trace()});
  };
  emit(0);
  for (long k = 1; k <= steps; ++k) {
    ensemble = ga_step(ensemble, params, objective, run_rng, threads);
    emit(k);
  }

  const auto energies = evaluate_energies(ensemble, objective);
  int best = 0;
  for (int i = 1; i < ensemble.size(); ++i) {
    if (energies[i] < energies[best]) best = i;
  }
  const auto p = ensemble.particle(best);
  return {{p.begin(), p.end()}, energies[best], steps};
}

RunOutput run_pso(ConfigView& view, const Objective& objective, RngStream& rng, RowSink* csv,
                  int threads) {
  const long steps = view.get_long("steps", 1000);
  const int particles = static_cast<int>(view.get_long("particles", 100));
  const std::string mode = view.get_string("pso_mode", "classic");
  PSOParams params;
  params.c1 = view.get_double("c1", 2.0);
  params.c2 = view.get_double("c2", 2.0);
  params.lambda1 = view.get_double("lambda1", 1.0);
  params.lambda2 = view.get_double("lambda2", 1.0);
  params.sigma1 = view.get_double("sigma1", 0.7);
  params.sigma2 = view.get_double("sigma2", 0.7);
  params.inertia = view.get_double("inertia", 0.5);
  params.memory_speed = view.get_double("memory_nu", 1.0);
  params.beta = view.get_double("beta", 30.0);
  params.alpha = view.get_double("alpha", 50.0);
  params.dt = view.get_double("dt", 0.01);
  const double init_center = view.get_double("init_center", 2.0);
  const double init_spread = view.get_double("init_spread", 1.0);
  if (mode != "classic" && mode != "sde")
    throw std::invalid_argument("pso_mode must be classic or sde");

  auto init_rng = rng.substream(0);
  const Ensemble init =
      sample_gaussian_cloud(particles, objective.dim(), init_center, init_spread, init_rng);
  SwarmState swarm = make_swarm(init, objective);
  auto run_rng = rng.substream(1);

  auto emit = [&](long step) {
    if (!csv) return;
    const auto consensus = gibbs_mean(swarm.personal_bests, swarm.dim, swarm.best_energies,
                                      params.alpha);
    Ensemble positions;
    positions.dim = swarm.dim;
    positions.positions = swarm.positions;
    csv->row({static_cast<double>(step), swarm.global_best_energy,
              lyapunov_functional(swarm, params), norm_to_known_min(consensus, objective),
              positions.variance_trace()});
  };
  emit(0);
  for (long k = 1; k <= steps; ++k) {
    swarm = mode == "classic" ? pso_classic_step(swarm, params, objective, run_rng, threads)
                              : pso_sde_step(swarm, params, objective, run_rng, threads);
    emit(k);
  }
  return {swarm.global_best, swarm.global_best_energy, steps};
}

RunOutput run_cbo(ConfigView& view, const Objective& objective, RngStream& rng, RowSink* csv) {
  const long steps = view.get_long("steps", 500);
  const int particles = static_cast<int>(view.get_long("particles", 200));
  const double lambda_value = view.get_double("lambda", 1.0);
  const double sigma = view.get_double("sigma", 0.5);
  const double alpha = view.get_double("alpha", 50.0);
  const double dt = view.get_double("dt", 0.01);
  const double init_center = view.get_double("init_center", 2.0);
  const double init_spread = view.get_double("init_spread", 1.0);

  auto init_rng = rng.substream(0);
  Ensemble ensemble =
      sample_gaussian_cloud(particles, objective.dim(), init_center, init_spread, init_rng);
  auto run_rng = rng.substream(1);
  const double lambda[1] = {lambda_value};

  auto emit = [&](long step) {
    if (!csv) return;
    const auto energies = evaluate_energies(ensemble, objective);
    double best = energies[0], mean_e = 0.0;
    for (double e : energies) {
      best = std::min(best, e);
      mean_e += e;
    }
    mean_e /= energies.size();
    csv->row({static_cast<double>(step), best, mean_e,
              norm_to_known_min(ensemble.mean(), objective), ensemble.variance_trace()});
  };
  emit(0);
  for (long k = 1; k <= steps; ++k) {
    ensemble = cbo_step(ensemble, lambda, sigma, alpha, dt, objective, run_rng);
    emit(k);
  }

  const auto energies = evaluate_energies(ensemble, objective);
  const auto consensus = gibbs_mean(ensemble, energies, alpha);
  return {consensus, objective(consensus), steps};
}

RunOutput run_cbo_memory(ConfigView& view, const Objective& objective, RngStream& rng,
                         RowSink* csv) {
  const long steps = view.get_long("steps", 500);
  const int particles = static_cast<int>(view.get_long("particles", 200));
  CBOMemoryParams params;
  params.lambda1 = view.get_double("lambda1", 1.0);
  params.lambda2 = view.get_double("lambda2", 1.0);
  params.sigma1 = view.get_double("sigma1", 0.4);
  params.sigma2 = view.get_double("sigma2", 0.4);
  params.memory_speed = view.get_double("memory_nu", 1.0);
  params.beta = view.get_double("beta", 30.0);
  params.alpha = view.get_double("alpha", 50.0);
  params.dt = view.get_double("dt", 0.01);
  const double init_center = view.get_double("init_center", 2.0);
  const double init_spread = view.get_double("init_spread", 1.0);

  auto init_rng = rng.substream(0);
  Ensemble x = sample_gaussian_cloud(particles, objective.dim(), init_center, init_spread, init_rng);
  Ensemble y = x;
  auto run_rng = rng.substream(1);

  auto emit = [&](long step) {
    if (!csv) return;
    const auto memory_energies = evaluate_energies(y, objective);
    double best = memory_energies[0];
    for (double e : memory_energies) best = std::min(best, e);
    const auto energies = evaluate_energies(x, objective);
    double mean_e = 0.0;
    for (double e : energies) mean_e += e;
    mean_e /= energies.size();
    const auto consensus = gibbs_mean(y, memory_energies, params.alpha);
    csv->row({static_cast<double>(step), best, mean_e, norm_to_known_min(consensus, objective),
              x.variance_trace()});
  };
  emit(0);
  for (long k = 1; k <= steps; ++k) {
    auto [nx, ny] = cbo_memory_step(x, y, params, objective, run_rng);
    x = std::move(nx);
    y = std::move(ny);
    emit(k);
  }

  const auto memory_energies = evaluate_energies(y, objective);
  int best = 0;
  for (int i = 1; i < y.size(); ++i) {
    if (memory_energies[i] < memory_energies[best]) best = i;
  }
  const auto p = y.particle(best);
  return {{p.begin(), p.end()}, memory_energies[best], steps};
}

RunOutput run_enkf(ConfigView& view, const Objective& objective, RngStream& rng, RowSink* csv) {
  const long steps = view.get_long("steps", 100);
  const int particles = static_cast<int>(view.get_long("particles", 50));
  const double dt = view.get_double("enkf_dt", 1.0);
  const double gamma_scale = view.get_double("gamma", 1.0);
  const double init_center = view.get_double("init_center", 2.0);
  const double init_spread = view.get_double("init_spread", 1.0);

  const InverseProblem problem = make_identity_problem(objective, gamma_scale);
  auto init_rng = rng.substream(0);
  Ensemble ensemble =
      sample_gaussian_cloud(particles, objective.dim(), init_center, init_spread, init_rng);

  auto emit = [&](long step) {
    if (!csv) return;
    const auto mean = ensemble.mean();
    Eigen::VectorXd mean_v(objective.dim());
    for (int j = 0; j < objective.dim(); ++j) mean_v[j] = mean[j];
    double residual = std::numeric_limits<double>::quiet_NaN();
    if (problem.truth()) residual = (mean_v - *problem.truth()).norm();
    csv->row({static_cast<double>(step) * dt, problem.misfit(mean_v),
              spread_matrix(ensemble, problem).op_norm, residual, ensemble.variance_trace()});
  };
  emit(0);
  for (long k = 1; k <= steps; ++k) {
    ensemble = enkf_update(ensemble, problem, dt);
    emit(k);
  }

  const auto mean = ensemble.mean();
  Eigen::VectorXd mean_v(objective.dim());
  for (int j = 0; j < objective.dim(); ++j) mean_v[j] = mean[j];
  return {mean, problem.misfit(mean_v), steps};
}

RunOutput run_eki(ConfigView& view, const Objective& objective, RngStream& rng, RowSink* csv) {
  const double horizon = view.get_double("horizon", 10.0);
  const double h = view.get_double("h", 0.01);
  const long records = view.get_long("records", 100);
  const double gamma_scale = view.get_double("gamma", 1.0);
  const int particles = static_cast<int>(view.get_long("particles", 50));
  const std::string method_name = view.get_string("method", "rk4");
  const double init_center = view.get_double("init_center", 2.0);
  const double init_spread = view.get_double("init_spread", 1.0);
  OdeMethod method;
  if (method_name == "euler") method = OdeMethod::euler;
  else if (method_name == "rk4") method = OdeMethod::rk4;
  else throw std::invalid_argument("method must be euler or rk4");
  if (records < 1) throw std::invalid_argument("records must be >= 1");

  const InverseProblem problem = make_identity_problem(objective, gamma_scale);
  auto init_rng = rng.substream(0);
  const Ensemble init =
      sample_gaussian_cloud(particles, objective.dim(), init_center, init_spread, init_rng);

  std::vector<double> record_times;
  for (long r = 1; r <= records; ++r) record_times.push_back(horizon * r / records);
  const auto trajectory = eki_integrate(init, problem, horizon, h, method, record_times);
  if (csv) {
    for (const auto& row : trajectory.diagnostics) {
      csv->row({row.time, row.misfit_at_mean, row.spread_norm, row.mean_residual,
                row.variance_trace});
    }
  }

  const auto mean = trajectory.snapshots.back().mean();
  Eigen::VectorXd mean_v(objective.dim());
  for (int j = 0; j < objective.dim(); ++j) mean_v[j] = mean[j];
  return {mean, problem.misfit(mean_v), static_cast<long>(std::llround(horizon / h))};
}

}  // namespace

RunOutput execute_run(const std::map<std::string, std::string>& config, bool write_files,
                      std::map<std::string, std::string>* resolved_out) {
  const auto t_start = std::chrono::steady_clock::now();
  ConfigView view(config);

  const std::string algorithm = view.get_string("algorithm", "sa");
  const std::string objective_name = view.get_string("objective", "quadratic");
  const int dim = static_cast<int>(view.get_long("dim", 1));
  const std::uint64_t seed = resolve_seed(view);
  const int threads = static_cast<int>(view.get_long("threads", 1));
  const std::string out = view.get_string("out", "kinopt_run");
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");

  const Objective objective = make_benchmark(objective_name, dim);
  RngStream rng(seed);

  // Columns per algorithm family.
  std::vector<std::string> columns;
  if (algorithm == "sa") {
    columns = {"step", "temperature", "energy", "accepted"};
    for (int j = 0; j < dim; ++j) columns.push_back("x" + std::to_string(j));
  } else if (algorithm == "ga" || algorithm == "cbo") {
    columns = {"step", "best_energy", "mean_energy", "mean_error", "variance"};
  } else if (algorithm == "pso" || algorithm == "cbo_memory") {
    columns = {"step", "best_energy", "lyapunov", "consensus_error", "variance"};
  } else if (algorithm == "enkf" || algorithm == "eki") {
    columns = {"time", "misfit_at_mean", "spread_norm", "mean_residual", "variance_trace"};
  } else {
    throw std::invalid_argument("unknown algorithm '" + algorithm + "'");
  }

  RowSink sink;
  RowSink* csv = write_files ? &sink : nullptr;
  auto dispatch = [&]() {
    if (algorithm == "sa") return run_sa(view, objective, rng, csv);
    if (algorithm == "ga") return run_ga(view, objective, rng, csv, threads);
    if (algorithm == "pso") return run_pso(view, objective, rng, csv, threads);
    if (algorithm == "cbo") return run_cbo(view, objective, rng, csv);
    if (algorithm == "cbo_memory") return run_cbo_memory(view, objective, rng, csv);
    if (algorithm == "enkf") return run_enkf(view, objective, rng, csv);
    return run_eki(view, objective, rng, csv);
  };
  const RunOutput output = dispatch();
  view.reject_unused();

  if (write_files) {
    CsvWriter writer(out + ".csv", view.resolved(), columns);
    for (const auto& row : sink.rows) writer.row(row);
    writer.close();
  }

  const auto t_end = std::chrono::steady_clock::now();
  const double wall_time = std::chrono::duration<double>(t_end - t_start).count();

  if (write_files) {
    nlohmann::json doc;
    doc["algorithm"] = algorithm;
    doc["best_point"] = output.best_point;
    doc["best_energy"] = output.best_energy;
    doc["steps"] = output.steps;
    doc["wall_time"] = wall_time;
    doc["config"] = view.resolved();
    write_text_file(out + ".json", doc.dump(2) + "\n");
  }
  if (resolved_out) *resolved_out = view.resolved();
  return output;
}

int cmd_run(const std::map<std::string, std::string>& config) {
  try {
    execute_run(config, true);
    return kExitSuccess;
  } catch (const numeric_error& error) {
    std::cerr << "numeric divergence: " << error.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& error) {
    std::cerr << "invalid configuration: " << error.what() << "\n";
    return kExitUsage;
  }
}

int cmd_scale(const std::map<std::string, std::string>& config) {
  try {
    ConfigView view(config);
    ExperimentSpec spec;
    spec.kind = parse_experiment_kind(view.get_string("kind", "sa_diffusion"));
    spec.scales = view.get_double_list("scales", "0.5,0.1,0.02");
    spec.objective = view.get_string("objective", "quadratic");
    spec.dim = static_cast<int>(view.get_long("dim", 1));
    spec.n_particles = static_cast<int>(view.get_long("particles", 10000));
    spec.horizon = view.get_double("horizon", 1.0);
    spec.seed = resolve_seed(view);
    spec.replicates = static_cast<int>(view.get_long("replicates", 5));
    spec.temperature = view.get_double("temperature", 0.5);
    spec.alpha = view.get_double("alpha", 50.0);
    spec.nu = view.get_double("nu", 0.5);
    spec.sigma = view.get_double("sigma", 0.5);
    spec.accuracy = view.get_double("accuracy", 0.05);
    spec.max_steps = view.get_long("max_steps", 60);
    const std::string out = view.get_string("out", "scale_report");
    view.reject_unused();

    const ExperimentReport report = run_experiment(spec);
    write_text_file(out + ".json", report_to_json(report));
    return report.pass ? kExitSuccess : kExitExperimentFailed;
  } catch (const std::exception& error) {
    std::cerr << "scale experiment failed to start: " << error.what() << "\n";
    return kExitUsage;
  }
}

int cmd_bench(const std::map<std::string, std::string>& config, const std::string& suite_text) {
  try {
    ConfigView view(config);
    const std::uint64_t seed = resolve_seed(view);
    const std::string out = view.get_string("out", "bench_report");
    const long steps = view.get_long("steps", 0);  // 0 keeps per-algorithm defaults
    view.reject_unused();

    struct SuiteEntry {
      std::string algorithm;
      std::string objective;
      long repetitions;
      int dim;
    };
    std::vector<SuiteEntry> entries;
    std::istringstream stream(suite_text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      std::stringstream fields(line);
      std::string algorithm, objective, reps, dim;
      if (!std::getline(fields, algorithm, ',')) continue;
      auto strip = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
      };
      algorithm = strip(algorithm);
      if (algorithm.empty()) continue;
      if (!std::getline(fields, objective, ',') || !std::getline(fields, reps, ','))
        throw std::invalid_argument("suite line " + std::to_string(line_no) +
                                    " needs algorithm,objective,repetitions[,dim]");
      std::getline(fields, dim, ',');
      entries.push_back({algorithm, strip(objective), std::stol(strip(reps)),
                         dim.empty() ? 1 : std::stoi(strip(dim))});
    }
    if (entries.empty()) throw std::invalid_argument("bench suite is empty");

    CsvWriter csv(out + ".csv", view.resolved(),
                  {"algorithm", "objective", "dim", "repetitions", "success_rate"});
    for (const auto& entry : entries) {
      const Objective objective = make_benchmark(entry.objective, entry.dim);
      if (!objective.has_known_min())
        throw std::invalid_argument("bench objectives need a known minimizer");
      long successes = 0;
      for (long r = 0; r < entry.repetitions; ++r) {
        std::map<std::string, std::string> run_config;
        run_config["algorithm"] = entry.algorithm;
        run_config["objective"] = entry.objective;
        run_config["dim"] = std::to_string(entry.dim);
        run_config["seed"] = std::to_string(seed + static_cast<std::uint64_t>(r));
        if (steps > 0) run_config["steps"] = std::to_string(steps);
        const RunOutput result = execute_run(run_config, false);
        if (norm_to_known_min(result.best_point, objective) < 0.25) ++successes;
      }
      csv.raw_row(entry.algorithm + ',' + entry.objective + ',' + std::to_string(entry.dim) + ',' +
                  std::to_string(entry.repetitions) + ',' +
                  format_g17(static_cast<double>(successes) / entry.repetitions));
    }
    csv.close();
    return kExitSuccess;
  } catch (const std::exception& error) {
    std::cerr << "bench failed: " << error.what() << "\n";
    return kExitUsage;
  }
}

int cmd_diag(const std::map<std::string, std::string>& config) {
  try {
    ConfigView view(config);
    const std::string objective_name = view.get_string("objective", "doublewell1d");
    const auto temperatures = view.get_double_list("temperatures", "1,0.3,0.1,0.03");
    const long nodes = view.get_long("nodes", 513);
    const std::string out = view.get_string("out", "diag_report");
    view.reject_unused();

    const Objective objective = make_benchmark(objective_name, 1);
    const double halfwidth = objective.domain_halfwidth();
    nlohmann::json doc;
    doc["objective"] = objective_name;
    doc["halfwidth"] = halfwidth;
    doc["rows"] = nlohmann::json::array();
    for (double t : temperatures) {
      const GridDensity1D density =
          gibbs_density(objective, t, {-halfwidth, halfwidth, static_cast<int>(nodes)});
      double mean = 0.0;
      for (int i = 0; i < density.size(); ++i)
        mean += density.node_weight(i) * density.value(i) * density.node(i);
      double variance = 0.0;
      for (int i = 0; i < density.size(); ++i) {
        const double dx = density.node(i) - mean;
        variance += density.node_weight(i) * density.value(i) * dx * dx;
      }
      doc["rows"].push_back({{"temperature", t},
                             {"laplace", laplace_functional(density, objective, t)},
                             {"density_mean", mean},
                             {"density_variance", variance},
                             {"log_partition", *density.log_partition()}});
    }
    write_text_file(out + ".json", doc.dump(2) + "\n");
    return kExitSuccess;
  } catch (const std::exception& error) {
    std::cerr << "diag failed: " << error.what() << "\n";
    return kExitUsage;
  }
}

namespace {

std::map<std::string, std::string> merge_cli_config(const std::string& config_path,
                                                    const std::vector<std::string>& overrides,
                                                    const std::string& seed_flag,
                                                    const std::string& threads_flag,
                                                    const std::string& out_flag) {
  std::map<std::string, std::string> config;
  if (!config_path.empty()) config = load_flat_config(config_path);
  for (const auto& item : overrides) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("override '" + item + "' is not key=value");
    config[item.substr(0, eq)] = item.substr(eq + 1);
  }
  if (!seed_flag.empty()) config["seed"] = seed_flag;
  if (!threads_flag.empty()) config["threads"] = threads_flag;
  if (!out_flag.empty()) config["out"] = out_flag;
  return config;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"kinetic metaheuristics: runs, scaling experiments, benchmark sweeps"};
  app.require_subcommand(1);

  std::string config_path, seed_flag, threads_flag, out_flag;
  std::vector<std::string> overrides;

  auto add_common = [&](CLI::App* cmd, bool with_overrides) {
    cmd->add_option("--config", config_path, "flat key = value configuration file");
    cmd->add_option("--seed", seed_flag, "seed override (unsigned integer)");
    cmd->add_option("--threads", threads_flag, "worker threads (1 = reproducibility reference)");
    cmd->add_option("--out", out_flag, "output path prefix");
    if (with_overrides) cmd->add_option("overrides", overrides, "key=value overrides");
  };

  CLI::App* run = app.add_subcommand("run", "run one algorithm, emit CSV + JSON");
  add_common(run, true);
  CLI::App* scale = app.add_subcommand("scale", "run a scaling-limit experiment suite");
  add_common(scale, true);
  CLI::App* bench = app.add_subcommand("bench", "success-rate sweep over a suite file");
  add_common(bench, false);
  std::string suite_path;
  bench->add_option("--suite", suite_path, "suite csv: algorithm,objective,repetitions[,dim]");
  CLI::App* diag = app.add_subcommand("diag", "equilibrium-density diagnostics table");
  add_common(diag, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? kExitSuccess : kExitUsage;
  }

  try {
    const auto config = merge_cli_config(config_path, overrides, seed_flag, threads_flag, out_flag);
    if (run->parsed()) return cmd_run(config);
    if (scale->parsed()) return cmd_scale(config);
    if (bench->parsed()) {
      if (suite_path.empty() && config_path.empty())
        throw std::invalid_argument("bench needs --suite (or --config pointing at a suite)");
      const std::string text = read_text_file(suite_path.empty() ? config_path : suite_path);
      std::map<std::string, std::string> bench_config = config;
      if (suite_path.empty()) bench_config.clear();  // the config file *was* the suite
      return cmd_bench(bench_config, text);
    }
    return cmd_diag(config);
  } catch (const std::exception& error) {
    std::cerr << "error: " << error.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace kinopt
