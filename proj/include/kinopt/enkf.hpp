#ifndef KINOPT_ENKF_HPP
#define KINOPT_ENKF_HPP

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "kinopt/diagnostics.hpp"
#include "kinopt/ensemble.hpp"
#include "kinopt/objective.hpp"

namespace kinopt {

/// y = F(x) + noise with noise covariance Gamma (symmetric positive definite,
/// verified at construction). F may be a matrix or a general map R^d -> R^m.
class InverseProblem {
 public:
  using ForwardFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  InverseProblem(Eigen::MatrixXd forward_matrix, Eigen::VectorXd data, Eigen::MatrixXd gamma);
  InverseProblem(int state_dim, int data_dim, ForwardFn forward, Eigen::VectorXd data,
                 Eigen::MatrixXd gamma);

  int state_dim() const { return state_dim_; }
  int data_dim() const { return data_dim_; }
  bool linear() const { return linear_; }
  const Eigen::MatrixXd& forward_matrix() const;  // linear problems only
  const Eigen::VectorXd& data() const { return data_; }
  const Eigen::MatrixXd& gamma() const { return gamma_; }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gamma_solve(const Eigen::VectorXd& r) const;  // Gamma^{-1} r

  /// Weighted least-squares misfit E(x) = 1/2 |Gamma^{-1/2} (y - F(x))|^2.
  double misfit(const Eigen::VectorXd& x) const;

  /// Analytic gradient for linear F, central differences otherwise.
  Eigen::VectorXd misfit_gradient(const Eigen::VectorXd& x) const;

  /// The misfit wrapped as an Objective (for diagnostics and benchmarks).
  Objective misfit_objective() const;

  /// Optional ground truth x* when the data were built as y = F(x*).
  const std::optional<Eigen::VectorXd>& truth() const { return truth_; }
  InverseProblem& with_truth(Eigen::VectorXd x_star);

 private:
  void validate_gamma();

  int state_dim_;
  int data_dim_;
  bool linear_;
  Eigen::MatrixXd forward_matrix_;
  ForwardFn forward_fn_;
  Eigen::VectorXd data_;
  Eigen::MatrixXd gamma_;
  Eigen::LLT<Eigen::MatrixXd> gamma_llt_;
  std::optional<Eigen::VectorXd> truth_;
};

/// Sample means and the 1/N-normalized covariances of an ensemble under the
/// forward map.
struct EnsembleStats {
  Eigen::VectorXd mean;          // d
  Eigen::VectorXd forward_mean;  // m
  Eigen::MatrixXd cross;         // C, d x m
  Eigen::MatrixXd forward_cov;   // D, m x m
};

EnsembleStats ensemble_stats(const Ensemble& ensemble, const InverseProblem& problem);

/// Discrete Kalman update x' = x + C (D + Gamma^{-1}/dt)^{-1} (y - F(x)) per
/// member; stats from the pre-step ensemble, solve by Cholesky factorization.
Ensemble enkf_update(const Ensemble& ensemble, const InverseProblem& problem, double dt);

/// Continuous-flow velocities C(x) Gamma^{-1} (y - F(x^j)); zero at consensus.
std::vector<double> eki_rhs(const Ensemble& ensemble, const InverseProblem& problem);

enum class OdeMethod { euler, rk4 };

struct EKIDiagnosticsRow {
  double time;
  double misfit_at_mean;
  double spread_norm;    // operator norm of the spread matrix
  double mean_residual;  // |mean - x*| when truth known, NaN otherwise
  double variance_trace;
};

struct EKITrajectory {
  std::vector<double> times;
  std::vector<Ensemble> snapshots;
  std::vector<EKIDiagnosticsRow> diagnostics;
};

/// Deterministic integration of the continuous flow to `horizon` with fixed
/// step h; snapshots and diagnostics at the requested times (clamped to step
/// boundaries). Throws divergence_error when the state leaves the finite range.
EKITrajectory eki_integrate(const Ensemble& init, const InverseProblem& problem, double horizon,
                            double h, OdeMethod method, std::span<const double> record_times);

/// Explicit Euler step of the modified flow
/// x' = x - h C_kappa (grad E(x^j) + beta (mean - x^j)) with C_kappa built
/// from (x^i - kappa mean) outer products.
Ensemble modified_eki_step(const Ensemble& ensemble, const InverseProblem& problem, double kappa,
                           double beta, double h);

struct SpreadMatrix {
  Eigen::MatrixXd values;  // N x N
  double op_norm;
};

/// Centered-member correlation matrix (E)_{k,l} = e_l^T F^T Gamma F e_k;
/// forward images are used when F is nonlinear. `use_gamma_inverse` switches
/// the weighting to Gamma^{-1} for sensitivity studies.
SpreadMatrix spread_matrix(const Ensemble& ensemble, const InverseProblem& problem,
                           bool use_gamma_inverse = false);

struct MomentFields {
  Eigen::VectorXd first;          // m
  Eigen::VectorXd forward_first;  // m_F
  Eigen::MatrixXd cross;          // C[g], d x m
  Eigen::MatrixXd second;         // E[g], d x d
};

MomentFields moment_fields(const EmpiricalMeasure& measure, const InverseProblem& problem);

}  // namespace kinopt

#endif
