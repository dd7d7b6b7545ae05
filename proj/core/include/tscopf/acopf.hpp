#pragma once

#include <memory>

#include "tscopf/network.hpp"
#include "tscopf/nlp.hpp"

namespace tscopf {

enum class ReserveMode {
  Absent,               // no reserve variables at all
  RelaxedInequalities,  // h <= h_max and h <= gmax - g as two inequality rows
  EqualityMin           // h = min(h_max, gmax - g); post-hoc evaluation only
};

/// Governor headroom cap in MW for one generator.
double max_reserve(const Generator& gen, double nominal_hz, double min_hz);

struct ReserveModel {
  ReserveMode mode = ReserveMode::Absent;
  Eigen::VectorXd h_max_pu;  // per generator

  static ReserveModel from_case(const NetworkCase& c, ReserveMode mode);
};

struct DispatchSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd g, r, h;       // per generator, pu (h empty when reserve absent)
  Eigen::VectorXd vm, va;        // per bus: magnitude pu, angle rad
  Eigen::VectorXd p, q;          // per-bus net injection from the network equations
  Eigen::VectorXd lambda, mu;    // per-bus balance duals, $/pu-h
  Eigen::VectorXd d, l;          // the load this dispatch was solved against, pu
  double objective = 0.0;        // $
  int iterations = 0;
};

struct PowerFlowResidual {
  Eigen::VectorXd real_residual;      // d - Mg + p(V,theta)
  Eigen::VectorXd reactive_residual;  // l - Mr + q(V,theta)
  double max_norm = 0.0;
};

/// Injections implied by a polar voltage profile: p_i = V_i sum_k V_k (G cos + B sin).
void bus_injections(const NetworkCase& c, const Eigen::VectorXd& vm, const Eigen::VectorXd& va,
                    Eigen::VectorXd& p, Eigen::VectorXd& q);

struct AcopfLayout {
  int n = 0, m = 0;
  bool has_reserve = false;
  int ref_bus = 0;  // internal bus index whose angle is pinned to zero
  int g0 = 0, r0 = 0, h0 = -1, v0 = 0, a0 = 0;
  int num_vars = 0;
  int num_eq = 0;    // 2n balance rows
  int num_ineq = 0;  // 2 per branch (+2 per generator with reserve rows)

  int theta_var(int bus_idx) const {
    if (bus_idx == ref_bus) return -1;
    return a0 + (bus_idx < ref_bus ? bus_idx : bus_idx - 1);
  }
};

/// Shared assembly of the dispatch feasible set (balance equalities, branch
/// limits, bounds, reserve rows) over variables (g, r, [h], V, theta\ref).
/// The stability-constrained and active-search variants extend this model
/// with additional variable and constraint blocks.
class AcopfModel {
 public:
  AcopfModel(const NetworkCase& c, ReserveModel reserve, Eigen::VectorXd d_pu,
             Eigen::VectorXd l_pu);

  const AcopfLayout& layout() const { return lay_; }
  const NetworkCase& network() const { return case_; }
  const Eigen::VectorXd& d() const { return d_; }
  const Eigen::VectorXd& l() const { return l_; }
  const ReserveModel& reserve() const { return reserve_; }

  Eigen::VectorXd lower_bounds() const;
  Eigen::VectorXd upper_bounds() const;
  Eigen::VectorXd flat_start() const;

  double cost(const Eigen::VectorXd& x) const;
  Eigen::VectorXd cost_gradient(const Eigen::VectorXd& x) const;

  Eigen::VectorXd eq(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd eq_jacobian(const Eigen::VectorXd& x) const;
  Eigen::VectorXd ineq(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd ineq_jacobian(const Eigen::VectorXd& x) const;

  /// Hessian of cost*include_cost + y'eq - z'ineq over the base variables.
  Eigen::MatrixXd lagrangian_hessian(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& z, bool include_cost) const;

  NlpProblem base_problem() const;  // the AC-OPF NLP (no stability constraint)

  DispatchSolution interpret(const SolveResult& r) const;

  struct BranchAdm {
    // series/shunt admittance seen from each end, plus bus indices
    double gff, bff, gft, bft;  // from-end self and transfer terms
    double gtt, btt, gtf, btf;  // to-end self and transfer terms
    int f, t;
    double smax2;
  };

 private:
  NetworkCase case_;
  ReserveModel reserve_;
  Eigen::VectorXd d_, l_;
  AcopfLayout lay_;
  Eigen::MatrixXd G_, B_;  // Ybus split
  std::vector<BranchAdm> badm_;

  void full_angles(const Eigen::VectorXd& x, Eigen::VectorXd& va) const;
};

NlpProblem build_acopf(const NetworkCase& c, const ReserveModel& reserve);
DispatchSolution solve_acopf(const NetworkCase& c, const SolveOptions& opts,
                             ReserveMode mode = ReserveMode::Absent);
DispatchSolution solve_acopf(const NetworkCase& c, const Eigen::VectorXd& d_pu,
                             const Eigen::VectorXd& l_pu, const SolveOptions& opts,
                             ReserveMode mode = ReserveMode::Absent);

PowerFlowResidual power_flow_residual(const NetworkCase& c, const DispatchSolution& point);

std::string serialize_dispatch(const NetworkCase& c, const DispatchSolution& s);
DispatchSolution parse_dispatch(const NetworkCase& c, const std::string& text);

}  // namespace tscopf
