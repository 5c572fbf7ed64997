#pragma once

#include <Eigen/Core>

namespace adaplan {

/// Infinite bound marker for QpProblem::l / QpProblem::u.
inline constexpr double kQpInfinity = 1e20;

/// minimize 1/2 x^T P x + q^T x  subject to  l <= A x <= u.
struct QpProblem {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;
  Eigen::VectorXd l;
  Eigen::VectorXd u;
};

struct QpSettings {
  double rho = 0.1;
  double sigma = 1e-6;
  double alpha = 1.6;
  int max_iterations = 4000;
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  int check_interval = 10;
  bool adaptive_rho = true;
  bool polish = true;
  int polish_interval = 50;  // early polish every this many iterations; 0 = only at the end
  int scaling_passes = 10;   // Ruiz equilibration passes; 0 = none
  // ADMM iterations before handing over to the interior-point fallback
  // (taken at the next residual check); 0 = never.
  int fallback_after = 20;
};

enum class QpStatus { kSolved, kMaxIterations };

struct QpSolution {
  Eigen::VectorXd x;
  Eigen::VectorXd y;  // constraint multipliers, sign as in OSQP
  QpStatus status = QpStatus::kMaxIterations;
  int iterations = 0;
  bool polished = false;
  bool interior_point = false;  // finished by the interior-point fallback
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
};

struct QpWarmStart {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/// Dense operator-splitting (ADMM) QP solver in the style of OSQP, followed
/// by an optional active-set polish. Slow cases hand over to a dense
/// interior-point method. Deterministic for identical inputs.
/// Throws NumericFailure on non-finite iterates or malformed dimensions.
QpSolution SolveQp(const QpProblem& problem, const QpSettings& settings = {},
                   const QpWarmStart* warm_start = nullptr);

double QpObjective(const QpProblem& problem, const Eigen::VectorXd& x);

}  // namespace adaplan
