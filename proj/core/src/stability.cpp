#include "tscopf/stability.hpp"

#include <cmath>

#include "tscopf/textio.hpp"

namespace tscopf {

ReserveMode reserve_mode_for(FeatureVariant v) {
  return v == FeatureVariant::D ? ReserveMode::RelaxedInequalities : ReserveMode::Absent;
}

EmbeddedStabilityModel::EmbeddedStabilityModel(const NetworkCase& c,
                                               const SurrogateModel& surrogate, Mode mode,
                                               double threshold, Eigen::VectorXd d_pu,
                                               Eigen::VectorXd l_pu)
    : acopf_(c, ReserveModel::from_case(c, reserve_mode_for(surrogate.spec.variant)),
             d_pu, l_pu),
      spec_(surrogate.spec),
      mode_(mode) {
  if (mode == Mode::Threshold && !(threshold < 1.0))
    throw SemanticError("stability threshold must be below 1");
  double c_eff = mode == Mode::Threshold ? std::max(threshold, 1e-12) : 0.5;
  blk_ = emit_constraints(surrogate.params, spec_, c_eff);
  nb_ = acopf_.layout().num_vars;

  // raw feature map over the base variables
  const auto& lay = acopf_.layout();
  const int n = lay.n, m = lay.m;
  const int dim = spec_.dim();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(dim, nb_);
  Eigen::VectorXd r0 = Eigen::VectorXd::Zero(dim);
  const Eigen::VectorXd& d = acopf_.d();
  const Eigen::VectorXd& l = acopf_.l();
  switch (spec_.variant) {
    case FeatureVariant::A:
      for (int j = 0; j < m; ++j) R(j, lay.g0 + j) = 1.0;
      r0.segment(m, n) = d;
      for (int j = 0; j < m; ++j) R(m + n + j, lay.r0 + j) = 1.0;
      r0.segment(2 * m + n, n) = l;
      break;
    case FeatureVariant::B:
      for (int j = 0; j < m; ++j) R(j, lay.g0 + j) = 1.0;
      r0.segment(m, n) = d;
      break;
    case FeatureVariant::C:
      R.block(0, lay.g0, n, m) = c.M();
      r0.head(n) = -d;
      break;
    case FeatureVariant::D:
      if (!lay.has_reserve) throw SemanticError("feature variant D needs reserve variables");
      R.block(0, lay.g0, n, m) = c.M();
      r0.head(n) = -d;
      R.block(n, lay.h0, spec_.z, m) = c.Z();
      break;
  }
  if (spec_.normalized()) {
    F_ = spec_.stdev.cwiseInverse().asDiagonal() * R;
    f0_ = (r0 - spec_.mean).cwiseQuotient(spec_.stdev);
  } else {
    F_ = R;
    f0_ = r0;
  }
}

NlpProblem EmbeddedStabilityModel::problem() const {
  auto self = std::make_shared<EmbeddedStabilityModel>(*this);
  const int nb = nb_, na = blk_.num_aux;
  const int acopf_eq = acopf_.layout().num_eq;
  const int acopf_ineq = acopf_.layout().num_ineq;
  const bool threshold_row = mode_ == Mode::Threshold;
  const int head = nb + blk_.head_offset();

  NlpProblem p;
  p.num_vars = nb + na;
  p.num_eq = acopf_eq + blk_.num_eq();
  p.num_ineq = acopf_ineq + (threshold_row ? 1 : 0);
  const double inf = std::numeric_limits<double>::infinity();
  p.lb = Eigen::VectorXd::Constant(p.num_vars, -inf);
  p.ub = Eigen::VectorXd::Constant(p.num_vars, inf);
  p.lb.head(nb) = acopf_.lower_bounds();
  p.ub.head(nb) = acopf_.upper_bounds();

  auto x0_of = [self, nb](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return self->F_ * x.head(nb) + self->f0_;
  };

  if (mode_ == Mode::Threshold) {
    p.objective = [self, nb](const Eigen::VectorXd& x) { return self->acopf_.cost(x.head(nb)); };
    p.gradient = [self, nb](const Eigen::VectorXd& x) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
      g.head(nb) = self->acopf_.cost_gradient(x.head(nb));
      return g;
    };
  } else {
    p.objective = [self, head](const Eigen::VectorXd& x) {
      double f = sigmoid(x(head));
      return (f - 0.5) * (f - 0.5);
    };
    p.gradient = [self, head](const Eigen::VectorXd& x) {
      Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
      double v, d1, d2;
      activation_eval(Activation::Sigmoid, x(head), v, d1, d2);
      g(head) = 2.0 * (v - 0.5) * d1;
      return g;
    };
  }

  p.eq = [self, nb, na, acopf_eq, x0_of](const Eigen::VectorXd& x) {
    Eigen::VectorXd out(acopf_eq + self->blk_.num_eq());
    out.head(acopf_eq) = self->acopf_.eq(x.head(nb));
    out.tail(self->blk_.num_eq()) = self->blk_.eq(x0_of(x), x.segment(nb, na));
    return out;
  };
  p.eq_jacobian = [self, nb, na, acopf_eq, x0_of](const Eigen::VectorXd& x) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(acopf_eq + self->blk_.num_eq(), x.size());
    J.topLeftCorner(acopf_eq, nb) = self->acopf_.eq_jacobian(x.head(nb));
    Eigen::MatrixXd Jx, Ja;
    self->blk_.eq_jacobian(x.segment(nb, na), Jx, Ja);
    J.bottomLeftCorner(self->blk_.num_eq(), nb) = Jx * self->F_;
    J.bottomRightCorner(self->blk_.num_eq(), na) = Ja;
    return J;
  };
  p.ineq = [self, nb, acopf_ineq, threshold_row, head](const Eigen::VectorXd& x) {
    Eigen::VectorXd out(acopf_ineq + (threshold_row ? 1 : 0));
    out.head(acopf_ineq) = self->acopf_.ineq(x.head(nb));
    if (threshold_row) out(acopf_ineq) = x(head) - self->blk_.logit_threshold;
    return out;
  };
  p.ineq_jacobian = [self, nb, acopf_ineq, threshold_row, head](const Eigen::VectorXd& x) {
    Eigen::MatrixXd J =
        Eigen::MatrixXd::Zero(acopf_ineq + (threshold_row ? 1 : 0), x.size());
    J.topLeftCorner(acopf_ineq, nb) = self->acopf_.ineq_jacobian(x.head(nb));
    if (threshold_row) J(acopf_ineq, head) = 1.0;
    return J;
  };
  p.lagrangian_hessian = [self, nb, na, acopf_eq, acopf_ineq, head](
                             const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                             const Eigen::VectorXd& z) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(x.size(), x.size());
    H.topLeftCorner(nb, nb) = self->acopf_.lagrangian_hessian(
        x.head(nb), y.head(acopf_eq), z.head(acopf_ineq),
        /*include_cost=*/self->mode_ == Mode::Threshold);
    Eigen::MatrixXd Ha = Eigen::MatrixXd::Zero(na, na);
    self->blk_.add_hessian(x.segment(nb, na), y.tail(self->blk_.num_eq()), Ha);
    H.bottomRightCorner(na, na) += Ha;
    if (self->mode_ == Mode::Boundary) {
      double v, d1, d2;
      activation_eval(Activation::Sigmoid, x(head), v, d1, d2);
      H(head, head) += 2.0 * (d1 * d1 + (v - 0.5) * d2);
    }
    return H;
  };
  return p;
}

Eigen::VectorXd EmbeddedStabilityModel::start_from(const Eigen::VectorXd& base_start) const {
  Eigen::VectorXd x(num_vars());
  x.head(nb_) = base_start;
  x.tail(blk_.num_aux) = blk_.consistent_aux(F_ * base_start + f0_);
  return x;
}

DispatchSolution EmbeddedStabilityModel::interpret(const SolveResult& r) const {
  SolveResult base;
  base.status = r.status;
  base.x = r.x.head(nb_);
  base.y_eq = r.y_eq.head(acopf_.layout().num_eq);
  base.iterations = r.iterations;
  return acopf_.interpret(base);
}

double EmbeddedStabilityModel::classifier_value(const SolveResult& r) const {
  return sigmoid(r.x(nb_ + blk_.head_offset()));
}

double EmbeddedStabilityModel::stability_dual(const SolveResult& r) const {
  if (mode_ != Mode::Threshold) return 0.0;
  double z = r.z_ineq(r.z_ineq.size() - 1);
  double v, d1, d2;
  activation_eval(Activation::Sigmoid, r.x(nb_ + blk_.head_offset()), v, d1, d2);
  return z / d1;
}

}  // namespace tscopf
