#include "tscopf/embed.hpp"

#include "tscopf/textio.hpp"

namespace tscopf {

int NnConstraintBlock::y_offset(int layer) const {
  int off = 0;
  for (int k = 0; k < layer; ++k) off += 2 * widths[k];
  return off;
}

int NnConstraintBlock::x_offset(int layer) const { return y_offset(layer) + widths[layer]; }

Eigen::VectorXd NnConstraintBlock::consistent_aux(const Eigen::VectorXd& x0) const {
  if (x0.size() != input_dim) throw SemanticError("constraint block: input dimension mismatch");
  const int L = params.num_layers();
  Eigen::VectorXd aux(num_aux);
  Eigen::VectorXd in = x0;
  for (int k = 0; k < L; ++k) {
    Eigen::VectorXd y = params.W[k] * in + params.b[k];
    aux.segment(y_offset(k), widths[k]) = y;
    if (k == L - 1) break;
    Eigen::VectorXd x(widths[k]);
    for (int i = 0; i < widths[k]; ++i) {
      double v, d1, d2;
      activation_eval(params.act[k], y(i), v, d1, d2);
      x(i) = v;
    }
    aux.segment(x_offset(k), widths[k]) = x;
    in = x;
  }
  return aux;
}

Eigen::VectorXd NnConstraintBlock::eq(const Eigen::VectorXd& x0,
                                      const Eigen::VectorXd& aux) const {
  if (x0.size() != input_dim || aux.size() != num_aux)
    throw SemanticError("constraint block: dimension mismatch");
  const int L = params.num_layers();
  Eigen::VectorXd r(num_aux);
  for (int k = 0; k < L; ++k) {
    Eigen::VectorXd in =
        k == 0 ? x0 : Eigen::VectorXd(aux.segment(x_offset(k - 1), widths[k - 1]));
    Eigen::VectorXd y = aux.segment(y_offset(k), widths[k]);
    r.segment(y_offset(k), widths[k]) = y - params.W[k] * in - params.b[k];
    if (k == L - 1) break;
    for (int i = 0; i < widths[k]; ++i) {
      double v, d1, d2;
      activation_eval(params.act[k], y(i), v, d1, d2);
      r(x_offset(k) + i) = aux(x_offset(k) + i) - v;
    }
  }
  return r;
}

void NnConstraintBlock::eq_jacobian(const Eigen::VectorXd& aux, Eigen::MatrixXd& J_x0,
                                    Eigen::MatrixXd& J_aux) const {
  const int L = params.num_layers();
  J_x0 = Eigen::MatrixXd::Zero(num_aux, input_dim);
  J_aux = Eigen::MatrixXd::Zero(num_aux, num_aux);
  for (int k = 0; k < L; ++k) {
    int yo = y_offset(k);
    for (int i = 0; i < widths[k]; ++i) J_aux(yo + i, yo + i) = 1.0;
    if (k == 0)
      J_x0.block(yo, 0, widths[k], input_dim) = -params.W[k];
    else
      J_aux.block(yo, x_offset(k - 1), widths[k], widths[k - 1]) = -params.W[k];
    if (k == L - 1) break;
    int xo = x_offset(k);
    for (int i = 0; i < widths[k]; ++i) {
      double v, d1, d2;
      activation_eval(params.act[k], aux(yo + i), v, d1, d2);
      J_aux(xo + i, xo + i) = 1.0;
      J_aux(xo + i, yo + i) = -d1;
    }
  }
}

double NnConstraintBlock::output_ineq(const Eigen::VectorXd& aux) const {
  return aux(head_offset()) - logit_threshold;
}

void NnConstraintBlock::add_hessian(const Eigen::VectorXd& aux, const Eigen::VectorXd& mult,
                                    Eigen::MatrixXd& H_aux) const {
  const int L = params.num_layers();
  for (int k = 0; k + 1 < L; ++k) {
    int yo = y_offset(k), xo = x_offset(k);
    for (int i = 0; i < widths[k]; ++i) {
      double v, d1, d2;
      activation_eval(params.act[k], aux(yo + i), v, d1, d2);
      H_aux(yo + i, yo + i) += mult(xo + i) * (-d2);
    }
  }
}

NnConstraintBlock emit_constraints(const MlpParams& params, const FeatureSpec& spec,
                                   double threshold) {
  params.validate();
  if (params.input_dim() != spec.dim())
    throw SemanticError("classifier input width does not match feature layout");
  for (Activation a : params.act)
    if (a != Activation::Tanh && a != Activation::Softplus && a != Activation::Sigmoid &&
        a != Activation::Linear)
      throw SemanticError("unsupported activation in constraint block");
  NnConstraintBlock blk;
  blk.params = params;
  blk.threshold = threshold;
  blk.logit_threshold = logit(threshold);
  blk.input_dim = params.input_dim();
  for (const auto& W : params.W) blk.widths.push_back(static_cast<int>(W.rows()));
  int aux = 0;
  for (size_t k = 0; k < blk.widths.size(); ++k)
    aux += k + 1 == blk.widths.size() ? blk.widths[k] : 2 * blk.widths[k];
  blk.num_aux = aux;
  return blk;
}

}  // namespace tscopf
