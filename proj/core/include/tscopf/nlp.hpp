#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

namespace tscopf {

/// Smooth NLP in the form
///   min f(x)  s.t.  cE(x) = 0,  cI(x) >= 0,  lb <= x <= ub.
///
/// Sign conventions (matching multipliers written left of constraints):
///   L(x, y, z) = f(x) + y' cE(x) - z' cI(x) - zlb'(x - lb) - zub'(ub - x)
/// with z, zlb, zub >= 0. The optional Lagrangian Hessian callback receives
/// (x, y, z) and must return grad^2 f + sum_i y_i grad^2 cE_i - sum_i z_i grad^2 cI_i.
struct NlpProblem {
  int num_vars = 0;
  int num_eq = 0;
  int num_ineq = 0;
  Eigen::VectorXd lb, ub;  // +-infinity allowed

  std::function<double(const Eigen::VectorXd&)> objective;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> eq;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> eq_jacobian;    // num_eq x num_vars
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> ineq;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> ineq_jacobian;  // num_ineq x num_vars
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&,
                                const Eigen::VectorXd&)>
      lagrangian_hessian;  // optional; required for HessianMode::Exact
};

enum class HessianMode { Exact, QuasiBfgs };

struct SolveOptions {
  double tol = 1e-6;           // KKT residual target
  int max_iter = 3000;
  double mu_init = 0.1;        // initial barrier parameter
  HessianMode hessian_mode = HessianMode::Exact;
  std::uint64_t seed = 0;      // perturbs the default start
  bool collect_trace = false;  // per-iteration CSV rows in SolveResult::trace
};

enum class SolveStatus { LocallySolved, LocallyInfeasible, IterationLimit, NumericalFailure };

std::string to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  Eigen::VectorXd y_eq;    // equality duals
  Eigen::VectorXd z_ineq;  // inequality duals, >= 0
  Eigen::VectorXd z_lb, z_ub;  // bound duals, >= 0
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
  std::string trace;  // CSV: iter,objective,kkt,mu,alpha (when requested)
};

SolveResult solve(const NlpProblem& p, const Eigen::VectorXd& start, const SolveOptions& opts);
SolveResult solve(const NlpProblem& p, const SolveOptions& opts);  // seeded default start

/// Max-norm KKT error of a candidate primal-dual point: stationarity, primal
/// feasibility, dual feasibility, complementarity. Independent of the solver.
double kkt_residual(const NlpProblem& p, const SolveResult& r);

}  // namespace tscopf
