#include "kinopt/enkf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

#include "kinopt/errors.hpp"

namespace kinopt {

namespace {

Eigen::VectorXd to_vector(std::span<const double> x) {
  return Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
}

// Forward images of all members, one column per member.
Eigen::MatrixXd forward_images(const Ensemble& ensemble, const InverseProblem& problem) {
  const int n = ensemble.size();
  Eigen::MatrixXd images(problem.data_dim(), n);
  for (int i = 0; i < n; ++i) images.col(i) = problem.forward(to_vector(ensemble.particle(i)));
  return images;
}

// Column means anchored at the first column, zero for identical columns.
Eigen::VectorXd anchored_mean(const Eigen::MatrixXd& columns) {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(columns.rows());
  for (Eigen::Index i = 1; i < columns.cols(); ++i) acc += columns.col(i) - columns.col(0);
  return columns.col(0) + acc / static_cast<double>(columns.cols());
}

Eigen::MatrixXd ensemble_matrix(const Ensemble& ensemble) {
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
             ensemble.positions.data(), ensemble.size(), ensemble.dim)
      .transpose();
}

void write_back(const Eigen::MatrixXd& columns, Ensemble& ensemble) {
  for (int i = 0; i < ensemble.size(); ++i) {
    auto p = ensemble.particle(i);
    for (int j = 0; j < ensemble.dim; ++j) p[j] = columns(j, i);
  }
}

}  // namespace

InverseProblem::InverseProblem(Eigen::MatrixXd forward_matrix, Eigen::VectorXd data,
                               Eigen::MatrixXd gamma)
    : state_dim_(static_cast<int>(forward_matrix.cols())),
      data_dim_(static_cast<int>(forward_matrix.rows())),
      linear_(true),
      forward_matrix_(std::move(forward_matrix)),
      data_(std::move(data)),
      gamma_(std::move(gamma)) {
  if (data_.size() != data_dim_) throw std::invalid_argument("data dimension mismatch");
  validate_gamma();
}

InverseProblem::InverseProblem(int state_dim, int data_dim, ForwardFn forward,
                               Eigen::VectorXd data, Eigen::MatrixXd gamma)
    : state_dim_(state_dim),
      data_dim_(data_dim),
      linear_(false),
      forward_fn_(std::move(forward)),
      data_(std::move(data)),
      gamma_(std::move(gamma)) {
  if (state_dim_ < 1 || data_dim_ < 1) throw std::invalid_argument("dimensions must be >= 1");
  if (!forward_fn_) throw std::invalid_argument("forward map required");
  if (data_.size() != data_dim_) throw std::invalid_argument("data dimension mismatch");
  validate_gamma();
}

void InverseProblem::validate_gamma() {
  if (gamma_.rows() != data_dim_ || gamma_.cols() != data_dim_)
    throw std::invalid_argument("noise covariance must be data_dim x data_dim");
  const double asym = (gamma_ - gamma_.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, gamma_.cwiseAbs().maxCoeff());
  if (asym > 1e-12 * scale) throw std::invalid_argument("noise covariance must be symmetric");
  gamma_llt_.compute(gamma_);
  if (gamma_llt_.info() != Eigen::Success)
    throw std::invalid_argument("noise covariance must be positive definite");
}

const Eigen::MatrixXd& InverseProblem::forward_matrix() const {
  if (!linear_) throw std::logic_error("forward matrix is only defined for linear problems");
  return forward_matrix_;
}

Eigen::VectorXd InverseProblem::forward(const Eigen::VectorXd& x) const {
  Eigen::VectorXd image = linear_ ? Eigen::VectorXd(forward_matrix_ * x) : forward_fn_(x);
  if (image.size() != data_dim_) throw numeric_error("forward image has the wrong dimension");
  if (!image.allFinite()) throw numeric_error("forward image is non-finite");
  return image;
}

Eigen::VectorXd InverseProblem::gamma_solve(const Eigen::VectorXd& r) const {
  return gamma_llt_.solve(r);
}

double InverseProblem::misfit(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd residual = data_ - forward(x);
  return 0.5 * residual.dot(gamma_llt_.solve(residual));
}

Eigen::VectorXd InverseProblem::misfit_gradient(const Eigen::VectorXd& x) const {
  if (linear_) {
    const Eigen::VectorXd residual = data_ - forward_matrix_ * x;
    return -forward_matrix_.transpose() * gamma_llt_.solve(residual);
  }
  Eigen::VectorXd grad(state_dim_);
  Eigen::VectorXd probe = x;
  for (int j = 0; j < state_dim_; ++j) {
    const double h = 1e-5 * (1.0 + std::abs(x[j]));
    probe[j] = x[j] + h;
    const double up = misfit(probe);
    probe[j] = x[j] - h;
    const double down = misfit(probe);
    probe[j] = x[j];
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

Objective InverseProblem::misfit_objective() const {
  auto self = *this;  // value copy keeps the objective self-contained
  Objective obj("misfit", state_dim_, [self](std::span<const double> x) {
    return self.misfit(to_vector(x));
  });
  obj.with_gradient([self](std::span<const double> x, std::span<double> out) {
    const Eigen::VectorXd g = self.misfit_gradient(to_vector(x));
    for (int j = 0; j < g.size(); ++j) out[j] = g[j];
  });
  if (truth_) {
    std::vector<double> point(truth_->data(), truth_->data() + truth_->size());
    obj.with_known_min(std::move(point), 0.0);
  }
  return obj;
}

InverseProblem& InverseProblem::with_truth(Eigen::VectorXd x_star) {
  if (x_star.size() != state_dim_) throw std::invalid_argument("truth dimension mismatch");
  truth_ = std::move(x_star);
  return *this;
}

EnsembleStats ensemble_stats(const Ensemble& ensemble, const InverseProblem& problem) {
  const int n = ensemble.size();
  if (n < 1) throw std::invalid_argument("stats need at least one member");
  const Eigen::MatrixXd states = ensemble_matrix(ensemble);
  const Eigen::MatrixXd images = forward_images(ensemble, problem);

  EnsembleStats stats;
  stats.mean = anchored_mean(states);
  stats.forward_mean = anchored_mean(images);
  const Eigen::MatrixXd centered_states = states.colwise() - stats.mean;
  const Eigen::MatrixXd centered_images = images.colwise() - stats.forward_mean;
  stats.cross = centered_states * centered_images.transpose() / n;
  stats.forward_cov = centered_images * centered_images.transpose() / n;
  return stats;
}

Ensemble enkf_update(const Ensemble& ensemble, const InverseProblem& problem, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("update needs dt > 0");
  const auto stats = ensemble_stats(ensemble, problem);

  const int m = problem.data_dim();
  const Eigen::MatrixXd gamma_inverse =
      problem.gamma().llt().solve(Eigen::MatrixXd::Identity(m, m));
  const Eigen::MatrixXd system = stats.forward_cov + gamma_inverse / dt;
  const Eigen::LLT<Eigen::MatrixXd> llt(system);
  if (llt.info() != Eigen::Success)
    throw numeric_error("Kalman system matrix failed its positive-definite factorization");

  Ensemble next = ensemble;
  for (int i = 0; i < ensemble.size(); ++i) {
    const Eigen::VectorXd x = to_vector(ensemble.particle(i));
    const Eigen::VectorXd residual = problem.data() - problem.forward(x);
    const Eigen::VectorXd updated = x + stats.cross * llt.solve(residual);
    auto p = next.particle(i);
    for (int j = 0; j < ensemble.dim; ++j) p[j] = updated[j];
  }
  return next;
}

std::vector<double> eki_rhs(const Ensemble& ensemble, const InverseProblem& problem) {
  if (ensemble.size() < 2) throw std::invalid_argument("the flow needs at least two members");
  const auto stats = ensemble_stats(ensemble, problem);
  std::vector<double> velocities(ensemble.positions.size());
  for (int i = 0; i < ensemble.size(); ++i) {
    const Eigen::VectorXd x = to_vector(ensemble.particle(i));
    const Eigen::VectorXd v = stats.cross * problem.gamma_solve(problem.data() - problem.forward(x));
    for (int j = 0; j < ensemble.dim; ++j)
      velocities[static_cast<std::size_t>(i) * ensemble.dim + j] = v[j];
  }
  return velocities;
}

namespace {

void record_diagnostics(EKITrajectory& trajectory, double t, const Ensemble& ensemble,
                        const InverseProblem& problem) {
  EKIDiagnosticsRow row;
  row.time = t;
  const auto mean = ensemble.mean();
  row.misfit_at_mean = problem.misfit(to_vector(mean));
  row.spread_norm = spread_matrix(ensemble, problem).op_norm;
  if (problem.truth()) {
    double acc = 0.0;
    for (int j = 0; j < ensemble.dim; ++j) {
      const double dj = mean[j] - (*problem.truth())[j];
      acc += dj * dj;
    }
    row.mean_residual = std::sqrt(acc);
  } else {
    row.mean_residual = std::numeric_limits<double>::quiet_NaN();
  }
  row.variance_trace = ensemble.variance_trace();
  trajectory.times.push_back(t);
  trajectory.snapshots.push_back(ensemble);
  trajectory.diagnostics.push_back(row);
}

void axpy(std::vector<double>& x, double a, const std::vector<double>& v) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += a * v[i];
}

}  // namespace

EKITrajectory eki_integrate(const Ensemble& init, const InverseProblem& problem, double horizon,
                            double h, OdeMethod method, std::span<const double> record_times) {
  if (!(h > 0.0)) throw std::invalid_argument("integration needs h > 0");
  if (!(horizon > 0.0)) throw std::invalid_argument("integration needs horizon > 0");
  std::vector<double> wanted(record_times.begin(), record_times.end());
  std::sort(wanted.begin(), wanted.end());

  EKITrajectory trajectory;
  Ensemble state = init;
  double t = 0.0;
  std::size_t next_record = 0;
  while (next_record < wanted.size() && wanted[next_record] <= 0.0) {
    record_diagnostics(trajectory, t, state, problem);
    ++next_record;
  }

  const long steps = static_cast<long>(std::ceil(horizon / h - 1e-12));
  for (long k = 0; k < steps; ++k) {
    const double t_next = std::min(horizon, (k + 1) * h);
    const double step = t_next - t;
    Ensemble next = state;
    if (method == OdeMethod::euler) {
      const auto k1 = eki_rhs(state, problem);
      axpy(next.positions, step, k1);
    } else {
      const auto k1 = eki_rhs(state, problem);
      Ensemble stage = state;
      axpy(stage.positions, 0.5 * step, k1);
      const auto k2 = eki_rhs(stage, problem);
      stage.positions = state.positions;
      axpy(stage.positions, 0.5 * step, k2);
      const auto k3 = eki_rhs(stage, problem);
      stage.positions = state.positions;
      axpy(stage.positions, step, k3);
      const auto k4 = eki_rhs(stage, problem);
      for (std::size_t i = 0; i < next.positions.size(); ++i)
        next.positions[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    if (!next.all_finite())
      throw divergence_error("the flow left the finite range", t);
    state = std::move(next);
    t = t_next;
    while (next_record < wanted.size() &&
           wanted[next_record] <= t + 1e-9 * (1.0 + std::abs(t))) {
      record_diagnostics(trajectory, t, state, problem);
      ++next_record;
    }
  }
  return trajectory;
}

Ensemble modified_eki_step(const Ensemble& ensemble, const InverseProblem& problem, double kappa,
                           double beta, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step needs h > 0");
  const int n = ensemble.size();
  if (n < 2) throw std::invalid_argument("the modified flow needs at least two members");
  const Eigen::MatrixXd states = ensemble_matrix(ensemble);
  const Eigen::VectorXd mean = anchored_mean(states);
  const Eigen::MatrixXd shifted = states.colwise() - (kappa * mean).eval();
  const Eigen::MatrixXd preconditioner = shifted * shifted.transpose() / n;

  Ensemble next = ensemble;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = states.col(i);
    const Eigen::VectorXd direction = problem.misfit_gradient(x) + beta * (mean - x);
    const Eigen::VectorXd updated = x - h * (preconditioner * direction);
    auto p = next.particle(i);
    for (int j = 0; j < ensemble.dim; ++j) p[j] = updated[j];
  }
  if (!next.all_finite()) throw divergence_error("the modified flow left the finite range", 0.0);
  return next;
}

SpreadMatrix spread_matrix(const Ensemble& ensemble, const InverseProblem& problem,
                           bool use_gamma_inverse) {
  SpreadMatrix spread;
  const Eigen::MatrixXd weight =
      use_gamma_inverse
          ? Eigen::MatrixXd(problem.gamma().llt().solve(
                Eigen::MatrixXd::Identity(problem.data_dim(), problem.data_dim())))
          : problem.gamma();
  if (problem.linear()) {
    const Eigen::MatrixXd states = ensemble_matrix(ensemble);
    const Eigen::MatrixXd centered = states.colwise() - anchored_mean(states);
    const Eigen::MatrixXd mapped = problem.forward_matrix() * centered;
    spread.values = mapped.transpose() * weight * mapped;
  } else {
    const Eigen::MatrixXd images = forward_images(ensemble, problem);
    const Eigen::MatrixXd centered = images.colwise() - anchored_mean(images);
    spread.values = centered.transpose() * weight * centered;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(spread.values);
  if (eigen.info() != Eigen::Success) throw numeric_error("spread matrix eigendecomposition failed");
  spread.op_norm = 0.0;
  for (Eigen::Index i = 0; i < eigen.eigenvalues().size(); ++i)
    spread.op_norm = std::max(spread.op_norm, std::abs(eigen.eigenvalues()[i]));
  return spread;
}

MomentFields moment_fields(const EmpiricalMeasure& measure, const InverseProblem& problem) {
  const int n = measure.size();
  const int d = measure.dim;
  if (n < 1) throw std::invalid_argument("moments need a nonempty measure");

  MomentFields fields;
  fields.first = Eigen::VectorXd::Zero(d);
  fields.forward_first = Eigen::VectorXd::Zero(problem.data_dim());
  std::vector<Eigen::VectorXd> images(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = to_vector(measure.point(i));
    images[i] = problem.forward(x);
    fields.first += measure.weights[i] * x;
    fields.forward_first += measure.weights[i] * images[i];
  }
  fields.cross = Eigen::MatrixXd::Zero(d, problem.data_dim());
  fields.second = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = to_vector(measure.point(i));
    fields.cross += measure.weights[i] * (x - fields.first) * (images[i] - fields.forward_first).transpose();
    fields.second += measure.weights[i] * x * x.transpose();
  }
  return fields;
}

}  // namespace kinopt
