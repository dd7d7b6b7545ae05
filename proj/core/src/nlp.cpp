#include "tscopf/nlp.hpp"

#include <cmath>
#include <limits>

namespace tscopf {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::LocallySolved: return "locally-solved";
    case SolveStatus::LocallyInfeasible: return "locally-infeasible";
    case SolveStatus::IterationLimit: return "iteration-limit";
    case SolveStatus::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

double kkt_residual(const NlpProblem& p, const SolveResult& r) {
  const auto& x = r.x;
  if (x.size() != p.num_vars) throw std::invalid_argument("kkt_residual: primal dimension mismatch");
  if (r.y_eq.size() != p.num_eq || r.z_ineq.size() != p.num_ineq ||
      r.z_lb.size() != p.num_vars || r.z_ub.size() != p.num_vars)
    throw std::invalid_argument("kkt_residual: dual dimension mismatch");

  Eigen::VectorXd stat = p.gradient(x);
  if (p.num_eq > 0) stat += p.eq_jacobian(x).transpose() * r.y_eq;
  if (p.num_ineq > 0) stat -= p.ineq_jacobian(x).transpose() * r.z_ineq;
  stat -= r.z_lb;
  stat += r.z_ub;

  double err = stat.lpNorm<Eigen::Infinity>();
  if (p.num_eq > 0) err = std::max(err, p.eq(x).lpNorm<Eigen::Infinity>());
  Eigen::VectorXd ci;
  if (p.num_ineq > 0) {
    ci = p.ineq(x);
    for (int i = 0; i < p.num_ineq; ++i) {
      err = std::max(err, std::max(0.0, -ci(i)));          // primal feasibility
      err = std::max(err, std::max(0.0, -r.z_ineq(i)));    // dual feasibility
      err = std::max(err, std::abs(r.z_ineq(i) * ci(i)));  // complementarity
    }
  }
  const double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p.num_vars; ++i) {
    if (p.lb(i) > -inf) {
      err = std::max(err, std::max(0.0, p.lb(i) - x(i)));
      err = std::max(err, std::max(0.0, -r.z_lb(i)));
      err = std::max(err, std::abs(r.z_lb(i) * (x(i) - p.lb(i))));
    }
    if (p.ub(i) < inf) {
      err = std::max(err, std::max(0.0, x(i) - p.ub(i)));
      err = std::max(err, std::max(0.0, -r.z_ub(i)));
      err = std::max(err, std::abs(r.z_ub(i) * (p.ub(i) - x(i))));
    }
  }
  return err;
}

}  // namespace tscopf
