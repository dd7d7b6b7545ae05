#pragma once

#include "tscopf/acopf.hpp"
#include "tscopf/embed.hpp"
#include "tscopf/features.hpp"

namespace tscopf {

/// AC-OPF feasible set with the classifier layers appended as constraints.
/// Two uses share the assembly:
///   Threshold  — minimize dispatch cost s.t. the classifier head clears
///                logit(c) (the stability-constrained dispatch problem);
///   Boundary   — minimize (f - 0.5)^2 over the plain AC feasible set (the
///                active-search problem that hunts the decision boundary).
class EmbeddedStabilityModel {
 public:
  enum class Mode { Threshold, Boundary };

  EmbeddedStabilityModel(const NetworkCase& c, const SurrogateModel& surrogate, Mode mode,
                         double threshold, Eigen::VectorXd d_pu, Eigen::VectorXd l_pu);

  const AcopfModel& acopf() const { return acopf_; }
  const NnConstraintBlock& block() const { return blk_; }
  const FeatureSpec& spec() const { return spec_; }
  int num_vars() const { return nb_ + blk_.num_aux; }
  int base_vars() const { return nb_; }

  /// Normalized classifier input as an affine map of the base variables:
  /// x0 = F xb + f0 (valid on the power-balance manifold, where the net
  /// injection is M g - d).
  const Eigen::MatrixXd& feature_matrix() const { return F_; }
  const Eigen::VectorXd& feature_offset() const { return f0_; }

  NlpProblem problem() const;

  /// Base start extended with chain-consistent auxiliary values.
  Eigen::VectorXd start_from(const Eigen::VectorXd& base_start) const;

  DispatchSolution interpret(const SolveResult& r) const;

  /// Classifier output sigma(y_head) at a solved point.
  double classifier_value(const SolveResult& r) const;

  /// Dual of the stability inequality mapped to f-space: the solver's
  /// multiplier on y_head >= logit(c) divided by sigma'(y_head). Zero in
  /// Boundary mode or when the row is slack.
  double stability_dual(const SolveResult& r) const;

 private:
  AcopfModel acopf_;
  NnConstraintBlock blk_;
  FeatureSpec spec_;
  Mode mode_;
  int nb_ = 0;
  Eigen::MatrixXd F_;
  Eigen::VectorXd f0_;
};

/// Reserve variables are carried exactly when the feature layout needs them.
ReserveMode reserve_mode_for(FeatureVariant v);

}  // namespace tscopf
