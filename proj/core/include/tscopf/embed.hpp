#pragma once

#include "tscopf/features.hpp"
#include "tscopf/mlp.hpp"

namespace tscopf {

/// The classifier unrolled into algebraic constraints. For each layer k the
/// block introduces pre-activation variables y^(k) and (except the head)
/// activation variables x^(k), with equality rows
///   y^(k) - W^(k) x^(k-1) - b^(k) = 0
///   x^(k) - act(y^(k)) = 0
/// and one inequality on the pre-sigmoid head, y^(last) >= logit(c), which
/// is equivalent to forward(x0) >= c but stays well-conditioned as c -> 1.
struct NnConstraintBlock {
  MlpParams params;
  double threshold = 0.5;
  double logit_threshold = 0.0;
  int input_dim = 0;
  std::vector<int> widths;  // per layer
  int num_aux = 0;          // also the number of equality rows

  int num_eq() const { return num_aux; }

  int y_offset(int layer) const;
  int x_offset(int layer) const;  // valid for layer < last
  int head_offset() const { return num_aux - 1; }

  /// Aux values produced by an ordinary forward pass; eq(x0, aux) vanishes.
  Eigen::VectorXd consistent_aux(const Eigen::VectorXd& x0) const;

  Eigen::VectorXd eq(const Eigen::VectorXd& x0, const Eigen::VectorXd& aux) const;
  void eq_jacobian(const Eigen::VectorXd& aux, Eigen::MatrixXd& J_x0,
                   Eigen::MatrixXd& J_aux) const;

  double output_ineq(const Eigen::VectorXd& aux) const;  // y_head - logit(c) >= 0

  /// Adds sum_i mult(i) * hess(eq_i) over the aux block; only the
  /// x - act(y) rows carry curvature.
  void add_hessian(const Eigen::VectorXd& aux, const Eigen::VectorXd& mult,
                   Eigen::MatrixXd& H_aux) const;
};

NnConstraintBlock emit_constraints(const MlpParams& params, const FeatureSpec& spec,
                                   double threshold);

}  // namespace tscopf
