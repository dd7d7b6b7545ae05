#include "tscopf/acopf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "tscopf/textio.hpp"

namespace tscopf {

double max_reserve(const Generator& gen, double nominal_hz, double min_hz) {
  if (!(gen.droop > 0)) throw SemanticError("gen " + std::to_string(gen.id) + ": nonpositive droop");
  if (!(nominal_hz > min_hz && min_hz >= 0))
    throw SemanticError("invalid frequency band for reserve cap");
  return gen.gmax * (nominal_hz - min_hz) / (gen.droop * nominal_hz);
}

ReserveModel ReserveModel::from_case(const NetworkCase& c, ReserveMode mode) {
  ReserveModel r;
  r.mode = mode;
  r.h_max_pu.resize(c.m());
  for (int j = 0; j < c.m(); ++j)
    r.h_max_pu(j) = max_reserve(c.gens[j], c.nominal_hz, c.min_hz) / c.base_mva;
  return r;
}

void bus_injections(const NetworkCase& c, const Eigen::VectorXd& vm, const Eigen::VectorXd& va,
                    Eigen::VectorXd& p, Eigen::VectorXd& q) {
  Eigen::MatrixXcd Y = admittance_matrix(c);
  const int n = c.n();
  p.setZero(n);
  q.setZero(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      double G = Y(i, k).real(), B = Y(i, k).imag();
      if (G == 0.0 && B == 0.0) continue;
      double th = va(i) - va(k);
      p(i) += vm(i) * vm(k) * (G * std::cos(th) + B * std::sin(th));
      q(i) += vm(i) * vm(k) * (G * std::sin(th) - B * std::cos(th));
    }
  }
}

namespace {

// One end of a branch flow in polar variables (Vf, Vt, th = thf - tht):
//   P =  Vf^2 gd + Vf Vt (go cos th + bo sin th)
//   Q = -Vf^2 bd + Vf Vt (go sin th - bo cos th)
struct FlowEnd {
  double gd, bd, go, bo;
  int f, t;  // bus indices seen from this end

  void eval(double Vf, double Vt, double th, double& P, double& Q,
            Eigen::Vector4d& dP, Eigen::Vector4d& dQ) const {
    double c = std::cos(th), s = std::sin(th);
    double A = go * c + bo * s;   // d(B)/dth as well
    double Bv = go * s - bo * c;  // and dA/dth = -B... kept explicit below
    P = Vf * Vf * gd + Vf * Vt * A;
    Q = -Vf * Vf * bd + Vf * Vt * Bv;
    double dA = -go * s + bo * c;  // dA/dth
    double dB = go * c + bo * s;   // dBv/dth
    dP << 2 * Vf * gd + Vt * A, Vf * A, Vf * Vt * dA, -Vf * Vt * dA;
    dQ << -2 * Vf * bd + Vt * Bv, Vf * Bv, Vf * Vt * dB, -Vf * Vt * dB;
  }

  // 4x4 Hessians over (Vf, Vt, thf, tht).
  void hess(double Vf, double Vt, double th, Eigen::Matrix4d& HP, Eigen::Matrix4d& HQ) const {
    double c = std::cos(th), s = std::sin(th);
    double A = go * c + bo * s;
    double Bv = go * s - bo * c;
    double dA = -go * s + bo * c;
    double dB = go * c + bo * s;
    HP.setZero();
    HQ.setZero();
    HP(0, 0) = 2 * gd;
    HP(0, 1) = A;
    HP(0, 2) = Vt * dA;
    HP(0, 3) = -Vt * dA;
    HP(1, 2) = Vf * dA;
    HP(1, 3) = -Vf * dA;
    HP(2, 2) = -Vf * Vt * A;
    HP(3, 3) = -Vf * Vt * A;
    HP(2, 3) = Vf * Vt * A;
    HQ(0, 0) = -2 * bd;
    HQ(0, 1) = Bv;
    HQ(0, 2) = Vt * dB;
    HQ(0, 3) = -Vt * dB;
    HQ(1, 2) = Vf * dB;
    HQ(1, 3) = -Vf * dB;
    HQ(2, 2) = -Vf * Vt * Bv;
    HQ(3, 3) = -Vf * Vt * Bv;
    HQ(2, 3) = Vf * Vt * Bv;
    HP = HP.selfadjointView<Eigen::Upper>();
    HQ = HQ.selfadjointView<Eigen::Upper>();
  }
};

FlowEnd from_end(const AcopfModel::BranchAdm& ba) {
  return {ba.gff, ba.bff, ba.gft, ba.bft, ba.f, ba.t};
}
FlowEnd to_end(const AcopfModel::BranchAdm& ba) {
  return {ba.gtt, ba.btt, ba.gtf, ba.btf, ba.t, ba.f};
}

}  // namespace

AcopfModel::AcopfModel(const NetworkCase& c, ReserveModel reserve, Eigen::VectorXd d_pu,
                       Eigen::VectorXd l_pu)
    : case_(c), reserve_(std::move(reserve)), d_(std::move(d_pu)), l_(std::move(l_pu)) {
  if (reserve_.mode == ReserveMode::EqualityMin)
    throw SemanticError("equality-min reserve mode is for post-hoc evaluation, not the NLP");
  const int n = c.n(), m = c.m();
  lay_.n = n;
  lay_.m = m;
  lay_.has_reserve = reserve_.mode == ReserveMode::RelaxedInequalities;
  // reference angle: lowest-id bus holding a generator
  int ref = -1;
  for (const auto& b : c.buses) {
    bool has_gen = false;
    for (const auto& g : c.gens) has_gen = has_gen || g.bus == b.id;
    if (has_gen && (ref < 0 || b.id < c.buses[ref].id)) ref = c.bus_index(b.id);
  }
  lay_.ref_bus = ref < 0 ? 0 : ref;
  lay_.g0 = 0;
  lay_.r0 = m;
  lay_.h0 = lay_.has_reserve ? 2 * m : -1;
  lay_.v0 = lay_.has_reserve ? 3 * m : 2 * m;
  lay_.a0 = lay_.v0 + n;
  lay_.num_vars = lay_.a0 + n - 1;
  lay_.num_eq = 2 * n;
  lay_.num_ineq = 2 * static_cast<int>(c.branches.size()) + (lay_.has_reserve ? 2 * m : 0);

  Eigen::MatrixXcd Y = admittance_matrix(c);
  G_ = Y.real();
  B_ = Y.imag();
  for (const auto& br : c.branches) {
    using cd = std::complex<double>;
    cd ys = 1.0 / cd(br.r, br.x);
    cd ysh(0.0, br.b / 2.0);
    cd tap = std::polar(br.tap, br.shift);
    cd yff = (ys + ysh) / (br.tap * br.tap);
    cd ytt = ys + ysh;
    cd yft = -ys / std::conj(tap);
    cd ytf = -ys / tap;
    BranchAdm ba;
    ba.f = c.bus_index(br.from);
    ba.t = c.bus_index(br.to);
    ba.gff = yff.real();
    ba.bff = yff.imag();
    ba.gft = yft.real();
    ba.bft = yft.imag();
    ba.gtt = ytt.real();
    ba.btt = ytt.imag();
    ba.gtf = ytf.real();
    ba.btf = ytf.imag();
    ba.smax2 = br.smax * br.smax;
    badm_.push_back(ba);
  }
}

void AcopfModel::full_angles(const Eigen::VectorXd& x, Eigen::VectorXd& va) const {
  va.setZero(lay_.n);
  for (int i = 0; i < lay_.n; ++i) {
    int tv = lay_.theta_var(i);
    if (tv >= 0) va(i) = x(tv);
  }
}

Eigen::VectorXd AcopfModel::lower_bounds() const {
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd lb = Eigen::VectorXd::Constant(lay_.num_vars, -inf);
  lb.segment(lay_.g0, lay_.m) = case_.gmin_pu();
  lb.segment(lay_.r0, lay_.m) = case_.rmin_pu();
  if (lay_.has_reserve) lb.segment(lay_.h0, lay_.m).setZero();
  for (int i = 0; i < lay_.n; ++i) lb(lay_.v0 + i) = case_.buses[i].vmin;
  return lb;
}

Eigen::VectorXd AcopfModel::upper_bounds() const {
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd ub = Eigen::VectorXd::Constant(lay_.num_vars, inf);
  ub.segment(lay_.g0, lay_.m) = case_.gmax_pu();
  ub.segment(lay_.r0, lay_.m) = case_.rmax_pu();
  for (int i = 0; i < lay_.n; ++i) ub(lay_.v0 + i) = case_.buses[i].vmax;
  return ub;
}

Eigen::VectorXd AcopfModel::flat_start() const {
  Eigen::VectorXd x(lay_.num_vars);
  x.segment(lay_.g0, lay_.m) = 0.5 * (case_.gmin_pu() + case_.gmax_pu());
  x.segment(lay_.r0, lay_.m) = 0.5 * (case_.rmin_pu() + case_.rmax_pu());
  if (lay_.has_reserve) x.segment(lay_.h0, lay_.m) = 0.5 * reserve_.h_max_pu;
  for (int i = 0; i < lay_.n; ++i)
    x(lay_.v0 + i) = std::clamp(1.0, case_.buses[i].vmin, case_.buses[i].vmax);
  x.tail(lay_.n - 1).setZero();
  return x;
}

double AcopfModel::cost(const Eigen::VectorXd& x) const {
  double c = case_.cost(x.segment(lay_.g0, lay_.m));
  // tiny quadratic pin keeps the otherwise-costless reserve block determinate
  if (lay_.has_reserve) c += 1e-8 * x.segment(lay_.h0, lay_.m).squaredNorm();
  return c;
}

Eigen::VectorXd AcopfModel::cost_gradient(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(lay_.num_vars);
  g.segment(lay_.g0, lay_.m) = case_.cost_gradient(x.segment(lay_.g0, lay_.m));
  if (lay_.has_reserve) g.segment(lay_.h0, lay_.m) = 2e-8 * x.segment(lay_.h0, lay_.m);
  return g;
}

Eigen::VectorXd AcopfModel::eq(const Eigen::VectorXd& x) const {
  const int n = lay_.n, m = lay_.m;
  Eigen::VectorXd vm = x.segment(lay_.v0, n), va;
  full_angles(x, va);
  Eigen::VectorXd p = Eigen::VectorXd::Zero(n), q = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double G = G_(i, k), B = B_(i, k);
      if (G == 0.0 && B == 0.0) continue;
      double th = va(i) - va(k);
      p(i) += vm(i) * vm(k) * (G * std::cos(th) + B * std::sin(th));
      q(i) += vm(i) * vm(k) * (G * std::sin(th) - B * std::cos(th));
    }
  Eigen::VectorXd out(2 * n);
  out.head(n) = d_ - case_.M() * x.segment(lay_.g0, m) + p;
  out.tail(n) = l_ - case_.M() * x.segment(lay_.r0, m) + q;
  return out;
}

Eigen::MatrixXd AcopfModel::eq_jacobian(const Eigen::VectorXd& x) const {
  const int n = lay_.n, m = lay_.m;
  Eigen::VectorXd vm = x.segment(lay_.v0, n), va;
  full_angles(x, va);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, lay_.num_vars);
  J.block(0, lay_.g0, n, m) = -case_.M();
  J.block(n, lay_.r0, n, m) = -case_.M();
  for (int i = 0; i < n; ++i) {
    double dpdVi = 0, dpdTi = 0, dqdVi = 0, dqdTi = 0;
    for (int k = 0; k < n; ++k) {
      double G = G_(i, k), B = B_(i, k);
      if (G == 0.0 && B == 0.0) continue;
      double th = va(i) - va(k);
      double c = std::cos(th), s = std::sin(th);
      double A = G * c + B * s;   // p kernel
      double Bv = G * s - B * c;  // q kernel
      if (k == i) {
        dpdVi += 2 * vm(i) * G;
        dqdVi += -2 * vm(i) * B;
        continue;
      }
      dpdVi += vm(k) * A;
      dqdVi += vm(k) * Bv;
      dpdTi += vm(i) * vm(k) * (-G * s + B * c);
      dqdTi += vm(i) * vm(k) * A;
      J(i, lay_.v0 + k) += vm(i) * A;
      J(n + i, lay_.v0 + k) += vm(i) * Bv;
      int tk = lay_.theta_var(k);
      if (tk >= 0) {
        J(i, tk) += -vm(i) * vm(k) * (-G * s + B * c);
        J(n + i, tk) += -vm(i) * vm(k) * A;
      }
    }
    J(i, lay_.v0 + i) += dpdVi;
    J(n + i, lay_.v0 + i) += dqdVi;
    int ti = lay_.theta_var(i);
    if (ti >= 0) {
      J(i, ti) += dpdTi;
      J(n + i, ti) += dqdTi;
    }
  }
  return J;
}

Eigen::VectorXd AcopfModel::ineq(const Eigen::VectorXd& x) const {
  const int n = lay_.n;
  Eigen::VectorXd vm = x.segment(lay_.v0, n), va;
  full_angles(x, va);
  Eigen::VectorXd out(lay_.num_ineq);
  int row = 0;
  Eigen::Vector4d dP, dQ;
  for (const auto& ba : badm_) {
    for (const FlowEnd& e : {from_end(ba), to_end(ba)}) {
      double P, Q;
      e.eval(vm(e.f), vm(e.t), va(e.f) - va(e.t), P, Q, dP, dQ);
      out(row++) = ba.smax2 - P * P - Q * Q;
    }
  }
  if (lay_.has_reserve) {
    for (int j = 0; j < lay_.m; ++j) {
      out(row++) = reserve_.h_max_pu(j) - x(lay_.h0 + j);
      out(row++) = case_.gmax_pu()(j) - x(lay_.g0 + j) - x(lay_.h0 + j);
    }
  }
  return out;
}

Eigen::MatrixXd AcopfModel::ineq_jacobian(const Eigen::VectorXd& x) const {
  const int n = lay_.n;
  Eigen::VectorXd vm = x.segment(lay_.v0, n), va;
  full_angles(x, va);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(lay_.num_ineq, lay_.num_vars);
  int row = 0;
  Eigen::Vector4d dP, dQ;
  for (const auto& ba : badm_) {
    for (const FlowEnd& e : {from_end(ba), to_end(ba)}) {
      double P, Q;
      e.eval(vm(e.f), vm(e.t), va(e.f) - va(e.t), P, Q, dP, dQ);
      Eigen::Vector4d grow = -2.0 * P * dP - 2.0 * Q * dQ;
      int cols[4] = {lay_.v0 + e.f, lay_.v0 + e.t, lay_.theta_var(e.f),
                     lay_.theta_var(e.t)};
      for (int k = 0; k < 4; ++k)
        if (cols[k] >= 0) J(row, cols[k]) += grow(k);
      ++row;
    }
  }
  if (lay_.has_reserve) {
    for (int j = 0; j < lay_.m; ++j) {
      J(row++, lay_.h0 + j) = -1.0;
      J(row, lay_.g0 + j) = -1.0;
      J(row++, lay_.h0 + j) = -1.0;
    }
  }
  return J;
}

Eigen::MatrixXd AcopfModel::lagrangian_hessian(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                               const Eigen::VectorXd& z, bool include_cost) const {
  const int n = lay_.n, m = lay_.m;
  Eigen::VectorXd vm = x.segment(lay_.v0, n), va;
  full_angles(x, va);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(lay_.num_vars, lay_.num_vars);
  if (include_cost) {
    Eigen::VectorXd hd = case_.cost_hessian_diag();
    for (int j = 0; j < m; ++j) H(lay_.g0 + j, lay_.g0 + j) += hd(j);
    if (lay_.has_reserve)
      for (int j = 0; j < m; ++j) H(lay_.h0 + j, lay_.h0 + j) += 2e-8;
  }

  // balance rows: y_i * d2 p_i + y_{n+i} * d2 q_i over (V, theta)
  for (int i = 0; i < n; ++i) {
    double lp = y(i), lq = y(n + i);
    if (lp == 0.0 && lq == 0.0) continue;
    {  // diagonal term V_i^2 (G_ii, -B_ii)
      int vi = lay_.v0 + i;
      H(vi, vi) += lp * 2.0 * G_(i, i) + lq * (-2.0 * B_(i, i));
    }
    for (int k = 0; k < n; ++k) {
      if (k == i) continue;
      double G = G_(i, k), B = B_(i, k);
      if (G == 0.0 && B == 0.0) continue;
      double th = va(i) - va(k);
      double c = std::cos(th), s = std::sin(th);
      double A = G * c + B * s;
      double Bv = G * s - B * c;
      double dA = -G * s + B * c;  // dA/dth_i
      double dB = A;               // dBv/dth_i
      int vi = lay_.v0 + i, vk = lay_.v0 + k;
      int ti = lay_.theta_var(i), tk = lay_.theta_var(k);
      auto add = [&](int a, int b, double val) {
        if (a < 0 || b < 0) return;
        H(a, b) += val;
        if (a != b) H(b, a) += val;
      };
      // p_i contributions with weight lp
      add(vi, vk, lp * A);
      add(vi, ti, lp * vm(k) * dA);
      add(vi, tk, -lp * vm(k) * dA);
      add(vk, ti, lp * vm(i) * dA);
      add(vk, tk, -lp * vm(i) * dA);
      if (ti >= 0) H(ti, ti) += -lp * vm(i) * vm(k) * A;
      if (tk >= 0) H(tk, tk) += -lp * vm(i) * vm(k) * A;
      add(ti, tk, lp * vm(i) * vm(k) * A);
      // q_i contributions with weight lq
      add(vi, vk, lq * Bv);
      add(vi, ti, lq * vm(k) * dB);
      add(vi, tk, -lq * vm(k) * dB);
      add(vk, ti, lq * vm(i) * dB);
      add(vk, tk, -lq * vm(i) * dB);
      if (ti >= 0) H(ti, ti) += -lq * vm(i) * vm(k) * Bv;
      if (tk >= 0) H(tk, tk) += -lq * vm(i) * vm(k) * Bv;
      add(ti, tk, lq * vm(i) * vm(k) * Bv);
    }
  }

  // branch-limit rows: -z_row * d2(smax^2 - P^2 - Q^2) = +z_row * d2(P^2 + Q^2)
  int row = 0;
  Eigen::Vector4d dP, dQ;
  Eigen::Matrix4d HP, HQ;
  for (const auto& ba : badm_) {
    for (const FlowEnd& e : {from_end(ba), to_end(ba)}) {
      double w = z(row++);
      if (w == 0.0) continue;
      double P, Q;
      double th = va(e.f) - va(e.t);
      e.eval(vm(e.f), vm(e.t), th, P, Q, dP, dQ);
      e.hess(vm(e.f), vm(e.t), th, HP, HQ);
      Eigen::Matrix4d Hc =
          2.0 * (dP * dP.transpose() + P * HP + dQ * dQ.transpose() + Q * HQ);
      int cols[4] = {lay_.v0 + e.f, lay_.v0 + e.t, lay_.theta_var(e.f),
                     lay_.theta_var(e.t)};
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          if (cols[a] >= 0 && cols[b] >= 0) H(cols[a], cols[b]) += w * Hc(a, b);
    }
  }
  // reserve rows are linear: no curvature
  return H;
}

NlpProblem AcopfModel::base_problem() const {
  auto self = std::make_shared<AcopfModel>(*this);
  NlpProblem p;
  p.num_vars = lay_.num_vars;
  p.num_eq = lay_.num_eq;
  p.num_ineq = lay_.num_ineq;
  p.lb = lower_bounds();
  p.ub = upper_bounds();
  p.objective = [self](const Eigen::VectorXd& x) { return self->cost(x); };
  p.gradient = [self](const Eigen::VectorXd& x) { return self->cost_gradient(x); };
  p.eq = [self](const Eigen::VectorXd& x) { return self->eq(x); };
  p.eq_jacobian = [self](const Eigen::VectorXd& x) { return self->eq_jacobian(x); };
  p.ineq = [self](const Eigen::VectorXd& x) { return self->ineq(x); };
  p.ineq_jacobian = [self](const Eigen::VectorXd& x) { return self->ineq_jacobian(x); };
  p.lagrangian_hessian = [self](const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd& z) {
    return self->lagrangian_hessian(x, y, z, true);
  };
  return p;
}

DispatchSolution AcopfModel::interpret(const SolveResult& r) const {
  const int n = lay_.n, m = lay_.m;
  DispatchSolution s;
  s.status = r.status;
  s.g = r.x.segment(lay_.g0, m);
  s.r = r.x.segment(lay_.r0, m);
  if (lay_.has_reserve) s.h = r.x.segment(lay_.h0, m);
  s.vm = r.x.segment(lay_.v0, n);
  full_angles(r.x, s.va);
  bus_injections(case_, s.vm, s.va, s.p, s.q);
  if (r.y_eq.size() == 2 * n) {
    s.lambda = r.y_eq.head(n);
    s.mu = r.y_eq.segment(n, n);
  } else {
    s.lambda = Eigen::VectorXd::Zero(n);
    s.mu = Eigen::VectorXd::Zero(n);
  }
  s.d = d_;
  s.l = l_;
  s.objective = case_.cost(s.g);
  s.iterations = r.iterations;
  return s;
}

NlpProblem build_acopf(const NetworkCase& c, const ReserveModel& reserve) {
  AcopfModel model(c, reserve, c.d_pu(), c.l_pu());
  return model.base_problem();
}

DispatchSolution solve_acopf(const NetworkCase& c, const SolveOptions& opts, ReserveMode mode) {
  return solve_acopf(c, c.d_pu(), c.l_pu(), opts, mode);
}

DispatchSolution solve_acopf(const NetworkCase& c, const Eigen::VectorXd& d_pu,
                             const Eigen::VectorXd& l_pu, const SolveOptions& opts,
                             ReserveMode mode) {
  AcopfModel model(c, ReserveModel::from_case(c, mode), d_pu, l_pu);
  SolveResult r = solve(model.base_problem(), model.flat_start(), opts);
  return model.interpret(r);
}

PowerFlowResidual power_flow_residual(const NetworkCase& c, const DispatchSolution& point) {
  PowerFlowResidual res;
  Eigen::VectorXd p, q;
  bus_injections(c, point.vm, point.va, p, q);
  Eigen::VectorXd d = point.d.size() ? point.d : c.d_pu();
  Eigen::VectorXd l = point.l.size() ? point.l : c.l_pu();
  res.real_residual = d - c.M() * point.g + p;
  res.reactive_residual = l - c.M() * point.r + q;
  res.max_norm = std::max(res.real_residual.lpNorm<Eigen::Infinity>(),
                          res.reactive_residual.lpNorm<Eigen::Infinity>());
  return res;
}

std::string serialize_dispatch(const NetworkCase& c, const DispatchSolution& s) {
  std::ostringstream os;
  os << "dispatch { status " << to_string(s.status) << " objective " << fmt17(s.objective)
     << " iterations " << s.iterations << " }\n";
  for (int j = 0; j < c.m(); ++j) {
    os << "gen { id " << c.gens[j].id << " g " << fmt17(s.g(j)) << " r " << fmt17(s.r(j));
    if (s.h.size() == c.m()) os << " h " << fmt17(s.h(j));
    os << " }\n";
  }
  for (int i = 0; i < c.n(); ++i) {
    os << "bus { id " << c.buses[i].id << " vm " << fmt17(s.vm(i)) << " va " << fmt17(s.va(i))
       << " p " << fmt17(s.p(i)) << " q " << fmt17(s.q(i)) << " lambda " << fmt17(s.lambda(i))
       << " mu " << fmt17(s.mu(i)) << " d " << fmt17(s.d.size() ? s.d(i) : 0.0) << " l "
       << fmt17(s.l.size() ? s.l(i) : 0.0) << " }\n";
  }
  return os.str();
}

DispatchSolution parse_dispatch(const NetworkCase& c, const std::string& text) {
  Tokenizer tk(text);
  DispatchSolution s;
  const int n = c.n(), m = c.m();
  s.g.setZero(m);
  s.r.setZero(m);
  s.vm.setOnes(n);
  s.va.setZero(n);
  s.lambda.setZero(n);
  s.mu.setZero(n);
  s.d.setZero(n);
  s.l.setZero(n);
  bool any_h = false;
  Eigen::VectorXd h = Eigen::VectorXd::Zero(m);
  static const std::map<std::string, SolveStatus> status_map = {
      {"locally-solved", SolveStatus::LocallySolved},
      {"locally-infeasible", SolveStatus::LocallyInfeasible},
      {"iteration-limit", SolveStatus::IterationLimit},
      {"numerical-failure", SolveStatus::NumericalFailure}};
  while (!tk.done()) {
    int ln = tk.line();
    std::string sec = tk.next();
    if (sec == "dispatch") {
      tk.expect("{");
      while (tk.peek() != "}") {
        std::string key = tk.next();
        if (key == "status") {
          std::string v = tk.next();
          auto it = status_map.find(v);
          if (it == status_map.end()) throw ParseError(ln, "unknown status '" + v + "'");
          s.status = it->second;
        } else if (key == "objective") {
          s.objective = tk.next_number();
        } else if (key == "iterations") {
          s.iterations = static_cast<int>(tk.next_integer());
        } else {
          throw ParseError(ln, "unknown field '" + key + "'");
        }
      }
      tk.expect("}");
    } else if (sec == "gen") {
      tk.expect("{");
      int j = -1;
      std::map<std::string, double> kv;
      while (tk.peek() != "}") {
        std::string key = tk.next();
        double v = tk.next_number();
        if (key == "id")
          j = c.gen_index(static_cast<int>(v));
        else
          kv[key] = v;
      }
      tk.expect("}");
      if (j < 0) throw ParseError(ln, "gen block missing id");
      s.g(j) = kv.count("g") ? kv["g"] : 0.0;
      s.r(j) = kv.count("r") ? kv["r"] : 0.0;
      if (kv.count("h")) {
        h(j) = kv["h"];
        any_h = true;
      }
    } else if (sec == "bus") {
      tk.expect("{");
      int i = -1;
      std::map<std::string, double> kv;
      while (tk.peek() != "}") {
        std::string key = tk.next();
        double v = tk.next_number();
        if (key == "id")
          i = c.bus_index(static_cast<int>(v));
        else
          kv[key] = v;
      }
      tk.expect("}");
      if (i < 0) throw ParseError(ln, "bus block missing id");
      if (kv.count("vm")) s.vm(i) = kv["vm"];
      if (kv.count("va")) s.va(i) = kv["va"];
      if (kv.count("lambda")) s.lambda(i) = kv["lambda"];
      if (kv.count("mu")) s.mu(i) = kv["mu"];
      if (kv.count("d")) s.d(i) = kv["d"];
      if (kv.count("l")) s.l(i) = kv["l"];
    } else {
      throw ParseError(ln, "unknown section '" + sec + "'");
    }
  }
  if (any_h) s.h = h;
  bus_injections(c, s.vm, s.va, s.p, s.q);
  return s;
}

}  // namespace tscopf
