#include <lapacke.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "tscopf/nlp.hpp"

namespace tscopf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Factorization {
  Eigen::MatrixXd A;  // overwritten with factors
  std::vector<lapack_int> ipiv;
  int n = 0;
  bool ok = false;
  int pos = 0, neg = 0, zero = 0;
};

// Symmetric-indefinite (Bunch-Kaufman) factorization with inertia extraction.
Factorization factor_sym(const Eigen::MatrixXd& K) {
  Factorization f;
  f.n = static_cast<int>(K.rows());
  f.A = K;
  f.ipiv.resize(f.n);
  lapack_int info = LAPACKE_dsytrf(LAPACK_COL_MAJOR, 'L', f.n, f.A.data(), f.n, f.ipiv.data());
  if (info < 0) return f;
  // inertia from the block-diagonal D
  int i = 0;
  const double tiny = 1e-300;
  while (i < f.n) {
    if (f.ipiv[i] > 0) {
      double d = f.A(i, i);
      if (d > tiny)
        ++f.pos;
      else if (d < -tiny)
        ++f.neg;
      else
        ++f.zero;
      ++i;
    } else {
      // 2x2 pivot: one positive and one negative eigenvalue unless singular
      double a = f.A(i, i), c = f.A(i + 1, i + 1), b = f.A(i + 1, i);
      double det = a * c - b * b;
      if (det < -tiny) {
        ++f.pos;
        ++f.neg;
      } else if (det > tiny) {
        if (a + c > 0) f.pos += 2; else f.neg += 2;
      } else {
        f.zero += 2;
      }
      i += 2;
    }
  }
  f.ok = (info == 0 && f.zero == 0);
  return f;
}

bool solve_sym(const Factorization& f, Eigen::VectorXd& rhs) {
  lapack_int info = LAPACKE_dsytrs(LAPACK_COL_MAJOR, 'L', f.n, 1, f.A.data(), f.n,
                                   const_cast<lapack_int*>(f.ipiv.data()), rhs.data(), f.n);
  return info == 0;
}

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

SolveResult solve(const NlpProblem& p, const SolveOptions& opts) {
  // Default start: center of the box, seeded perturbation for diversity.
  Eigen::VectorXd x0(p.num_vars);
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < p.num_vars; ++i) {
    double lo = p.lb(i), hi = p.ub(i);
    double base;
    if (lo > -kInf && hi < kInf)
      base = 0.5 * (lo + hi);
    else if (lo > -kInf)
      base = lo + 1.0;
    else if (hi < kInf)
      base = hi - 1.0;
    else
      base = 0.0;
    double width = (lo > -kInf && hi < kInf) ? (hi - lo) : 1.0;
    x0(i) = base + 0.01 * width * u(rng);
  }
  return solve(p, x0, opts);
}

SolveResult solve(const NlpProblem& p, const Eigen::VectorXd& start, const SolveOptions& opts) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();

  const int nx = p.num_vars;
  const int mE = p.num_eq;
  const int mI = p.num_ineq;
  const int nv = nx + mI;
  const int mC = mE + mI;

  SolveResult res;
  std::ostringstream trace;
  if (opts.collect_trace) trace << "iter,objective,kkt,mu,alpha\n";

  // Extended bounds over v = (x, s).
  Eigen::VectorXd vL(nv), vU(nv);
  vL.head(nx) = p.lb;
  vU.head(nx) = p.ub;
  vL.tail(mI).setZero();
  vU.tail(mI).setConstant(kInf);

  auto interior_project = [&](Eigen::VectorXd& v) {
    for (int i = 0; i < nv; ++i) {
      double lo = vL(i), hi = vU(i);
      if (lo > -kInf && hi < kInf) {
        double pad = std::min(1e-2 * std::max(1.0, std::abs(lo)), 1e-2 * (hi - lo));
        v(i) = std::clamp(v(i), lo + pad, hi - pad);
      } else if (lo > -kInf) {
        v(i) = std::max(v(i), lo + 1e-2 * std::max(1.0, std::abs(lo)));
      } else if (hi < kInf) {
        v(i) = std::min(v(i), hi - 1e-2 * std::max(1.0, std::abs(hi)));
      }
    }
  };

  Eigen::VectorXd v(nv);
  v.head(nx) = start;
  if (mI > 0) {
    Eigen::VectorXd ci0 = p.ineq(start);
    for (int i = 0; i < mI; ++i) v(nx + i) = std::max(1e-2, ci0(i));
  }
  interior_project(v);

  Eigen::VectorXd lam = Eigen::VectorXd::Zero(mC);
  Eigen::VectorXd zL = Eigen::VectorXd::Zero(nv), zU = Eigen::VectorXd::Zero(nv);
  for (int i = 0; i < nv; ++i) {
    if (vL(i) > -kInf) zL(i) = 1.0;
    if (vU(i) < kInf) zU(i) = 1.0;
  }

  double mu = opts.mu_init;
  const double mu_min = opts.tol / 11.0;
  const double kappa_eps = 10.0;

  // Evaluation cache at the current point.
  double fval = 0.0;
  Eigen::VectorXd grad(nx), C(mC), gv(nv);
  Eigen::MatrixXd J(mC, nv);

  auto evaluate = [&](const Eigen::VectorXd& vv, bool with_derivs) -> bool {
    const Eigen::VectorXd xx = vv.head(nx);
    fval = p.objective(xx);
    if (!std::isfinite(fval)) return false;
    if (mE > 0) C.head(mE) = p.eq(xx);
    if (mI > 0) C.tail(mI) = p.ineq(xx) - vv.tail(mI);
    if (mC > 0 && !finite(C)) return false;
    if (with_derivs) {
      grad = p.gradient(xx);
      if (!finite(grad)) return false;
      gv.setZero();
      gv.head(nx) = grad;
      J.setZero();
      if (mE > 0) J.topLeftCorner(mE, nx) = p.eq_jacobian(xx);
      if (mI > 0) {
        J.bottomLeftCorner(mI, nx) = p.ineq_jacobian(xx);
        J.bottomRightCorner(mI, mI) = -Eigen::MatrixXd::Identity(mI, mI);
      }
      if (mC > 0 && !J.allFinite()) return false;
    }
    return true;
  };

  auto finish = [&](SolveStatus st, int iters) {
    res.status = st;
    res.x = v.head(nx);
    res.y_eq = lam.head(mE);
    res.z_ineq = zL.tail(mI);
    res.z_lb = zL.head(nx);
    res.z_ub = zU.head(nx);
    res.objective = p.objective(res.x);
    res.kkt_residual = kkt_residual(p, res);
    res.iterations = iters;
    res.trace = trace.str();
    res.wall_time_s = std::chrono::duration<double>(clock::now() - t0).count();
    return res;
  };

  if (!evaluate(v, true)) return finish(SolveStatus::NumericalFailure, 0);

  // Barrier objective (no constraint penalty); +inf outside the open box.
  auto barrier_phi = [&](const Eigen::VectorXd& vv, double fv) {
    double phi = fv;
    for (int i = 0; i < nv; ++i) {
      if (vL(i) > -kInf) {
        double d = vv(i) - vL(i);
        if (d <= 0) return kInf;
        phi -= mu * std::log(d);
      }
      if (vU(i) < kInf) {
        double d = vU(i) - vv(i);
        if (d <= 0) return kInf;
        phi -= mu * std::log(d);
      }
    }
    return phi;
  };

  auto kkt_error = [&](double barrier_mu) {
    // IPOPT-style scaled optimality error.
    Eigen::VectorXd stat = gv - zL + zU;
    if (mC > 0) stat += J.transpose() * lam;
    int nb = 0;
    double dual_sum = lam.lpNorm<1>();
    double bound_sum = 0.0;
    for (int i = 0; i < nv; ++i) {
      if (vL(i) > -kInf) { bound_sum += zL(i); ++nb; }
      if (vU(i) < kInf) { bound_sum += zU(i); ++nb; }
    }
    const double smax = 100.0;
    double sd = std::max(smax, (dual_sum + bound_sum) / std::max(1, mC + nb)) / smax;
    double sc = std::max(smax, bound_sum / std::max(1, nb)) / smax;
    double e = stat.lpNorm<Eigen::Infinity>() / sd;
    if (mC > 0) e = std::max(e, C.lpNorm<Eigen::Infinity>());
    for (int i = 0; i < nv; ++i) {
      if (vL(i) > -kInf)
        e = std::max(e, std::abs(zL(i) * (v(i) - vL(i)) - barrier_mu) / sc);
      if (vU(i) < kInf)
        e = std::max(e, std::abs(zU(i) * (vU(i) - v(i)) - barrier_mu) / sc);
    }
    return e;
  };

  // Quasi-Newton state (damped BFGS on the x-block of the Lagrangian).
  Eigen::MatrixXd Bq;
  if (opts.hessian_mode == HessianMode::QuasiBfgs)
    Bq = Eigen::MatrixXd::Identity(nx, nx) * std::max(1.0, grad.norm());

  auto lagrangian_grad_x = [&](const Eigen::VectorXd& xx, const Eigen::VectorXd& ll) {
    Eigen::VectorXd g = p.gradient(xx);
    if (mE > 0) g += p.eq_jacobian(xx).transpose() * ll.head(mE);
    if (mI > 0) g += p.ineq_jacobian(xx).transpose() * ll.tail(mI);
    return g;
  };

  double delta_last = 0.0;
  double nu = 1e-2;  // merit penalty weight
  int ls_failures = 0;
  double theta_best = std::numeric_limits<double>::max();
  int theta_stall = 0;

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    double e0 = kkt_error(0.0);
    if (e0 <= opts.tol) {
      if (opts.collect_trace)
        trace << iter << "," << fval << "," << e0 << "," << mu << ",0\n";
      return finish(SolveStatus::LocallySolved, iter);
    }
    while (mu > mu_min && kkt_error(mu) <= kappa_eps * mu) {
      mu = std::max(mu_min, std::min(0.2 * mu, std::pow(mu, 1.5)));
    }

    // Infeasibility detection: the best constraint violation seen so far has
    // not improved for a long stretch while staying clearly nonzero.
    double theta = (mC > 0) ? C.lpNorm<Eigen::Infinity>() : 0.0;
    if (theta < theta_best - 1e-8 * std::max(1.0, theta_best)) {
      theta_best = theta;
      theta_stall = 0;
    } else {
      ++theta_stall;
    }
    if (theta_best > std::sqrt(opts.tol) && theta_stall >= 30)
      return finish(SolveStatus::LocallyInfeasible, iter);

    // Hessian of the Lagrangian (x-block); internal multipliers on cI carry
    // the opposite sign of the reported inequality duals.
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(nv, nv);
    if (opts.hessian_mode == HessianMode::Exact) {
      if (!p.lagrangian_hessian)
        return finish(SolveStatus::NumericalFailure, iter);
      Eigen::VectorXd zrep = -lam.tail(mI);
      W.topLeftCorner(nx, nx) = p.lagrangian_hessian(v.head(nx), lam.head(mE), zrep);
    } else {
      W.topLeftCorner(nx, nx) = Bq;
    }
    if (!W.allFinite()) return finish(SolveStatus::NumericalFailure, iter);

    Eigen::VectorXd sigL = Eigen::VectorXd::Zero(nv), sigU = Eigen::VectorXd::Zero(nv);
    for (int i = 0; i < nv; ++i) {
      if (vL(i) > -kInf) sigL(i) = zL(i) / (v(i) - vL(i));
      if (vU(i) < kInf) sigU(i) = zU(i) / (vU(i) - v(i));
    }

    // Assemble and factor the KKT system with inertia correction.
    Eigen::VectorXd dv(nv), dlam(mC);
    double delta_w = 0.0, delta_c = 0.0;
    bool factored = false;
    for (int attempt = 0; attempt < 40 && !factored; ++attempt) {
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nv + mC, nv + mC);
      K.topLeftCorner(nv, nv) = W;
      K.topLeftCorner(nv, nv).diagonal() += sigL + sigU;
      K.topLeftCorner(nv, nv).diagonal().array() += delta_w;
      if (mC > 0) {
        K.bottomLeftCorner(mC, nv) = J;
        K.topRightCorner(nv, mC) = J.transpose();
        K.bottomRightCorner(mC, mC).diagonal().array() -= std::max(delta_c, 1e-12);
      }
      Factorization F = factor_sym(K);
      if (F.ok && F.pos == nv && F.neg == mC) {
        Eigen::VectorXd rhs(nv + mC);
        Eigen::VectorXd r1 = gv;
        if (mC > 0) r1 += J.transpose() * lam;
        for (int i = 0; i < nv; ++i) {
          if (vL(i) > -kInf) r1(i) -= mu / (v(i) - vL(i));
          if (vU(i) < kInf) r1(i) += mu / (vU(i) - v(i));
        }
        rhs.head(nv) = -r1;
        if (mC > 0) rhs.tail(mC) = -C;
        if (!solve_sym(F, rhs)) return finish(SolveStatus::NumericalFailure, iter);
        dv = rhs.head(nv);
        dlam = rhs.tail(mC);
        if (dv.allFinite() && dlam.allFinite()) factored = true;
      }
      if (!factored) {
        if (F.zero > 0 && delta_c == 0.0) delta_c = 1e-8 * std::max(1.0, std::pow(mu, 0.25));
        if (delta_w == 0.0)
          delta_w = (delta_last == 0.0) ? 1e-4 : std::max(1e-20, delta_last / 3.0);
        else
          delta_w *= 10.0;
        if (delta_w > 1e40) return finish(SolveStatus::NumericalFailure, iter);
      }
    }
    if (!factored) return finish(SolveStatus::NumericalFailure, iter);
    if (delta_w > 0.0) delta_last = delta_w;

    Eigen::VectorXd dzL = Eigen::VectorXd::Zero(nv), dzU = Eigen::VectorXd::Zero(nv);
    for (int i = 0; i < nv; ++i) {
      if (vL(i) > -kInf) dzL(i) = mu / (v(i) - vL(i)) - zL(i) - sigL(i) * dv(i);
      if (vU(i) < kInf) dzU(i) = mu / (vU(i) - v(i)) - zU(i) + sigU(i) * dv(i);
    }

    // Fraction-to-boundary rule.
    const double tau = std::max(0.995, 1.0 - mu);
    double a_pri = 1.0, a_dual = 1.0;
    for (int i = 0; i < nv; ++i) {
      if (vL(i) > -kInf && dv(i) < 0)
        a_pri = std::min(a_pri, -tau * (v(i) - vL(i)) / dv(i));
      if (vU(i) < kInf && dv(i) > 0)
        a_pri = std::min(a_pri, tau * (vU(i) - v(i)) / dv(i));
      if (vL(i) > -kInf && dzL(i) < 0) a_dual = std::min(a_dual, -tau * zL(i) / dzL(i));
      if (vU(i) < kInf && dzU(i) < 0) a_dual = std::min(a_dual, -tau * zU(i) / dzU(i));
    }

    // l1 merit line search.
    double theta1 = (mC > 0) ? C.lpNorm<1>() : 0.0;
    Eigen::VectorXd dphi = gv;
    for (int i = 0; i < nv; ++i) {
      if (vL(i) > -kInf) dphi(i) -= mu / (v(i) - vL(i));
      if (vU(i) < kInf) dphi(i) += mu / (vU(i) - v(i));
    }
    double gtd = dphi.dot(dv);
    double nu_req = (theta1 > 1e-14) ? gtd / (0.5 * theta1) : 0.0;
    nu = std::max({nu, (lam + dlam).lpNorm<Eigen::Infinity>() * 1.1 + 1e-4, nu_req + 1e-4});
    double D = gtd - nu * theta1;

    double phi0 = barrier_phi(v, fval) + nu * theta1;
    double alpha = a_pri;
    bool accepted = false;
    Eigen::VectorXd v_new(nv);
    for (int bt = 0; bt < 40; ++bt) {
      v_new = v + alpha * dv;
      double f_old = fval;
      Eigen::VectorXd C_old = C;
      if (evaluate(v_new, false)) {
        double phi_t = barrier_phi(v_new, fval) + nu * ((mC > 0) ? C.lpNorm<1>() : 0.0);
        if (phi_t <= phi0 + 1e-4 * alpha * std::min(D, 0.0) + 1e-14 * std::abs(phi0)) {
          accepted = true;
          break;
        }
      }
      fval = f_old;
      C = C_old;
      alpha *= 0.5;
      if (alpha < 1e-12) break;
    }

    if (!accepted) {
      ++ls_failures;
      if (ls_failures >= 3) {
        double th = (mC > 0) ? C.lpNorm<Eigen::Infinity>() : 0.0;
        return finish(th > 100.0 * opts.tol ? SolveStatus::LocallyInfeasible
                                            : SolveStatus::NumericalFailure,
                      iter);
      }
      // fall back to a pure dual update and a barrier reduction
      mu = std::max(mu_min, 0.2 * mu);
      evaluate(v, true);
      continue;
    }
    ls_failures = 0;

    Eigen::VectorXd x_old = v.head(nx);
    Eigen::VectorXd lam_new = lam + alpha * dlam;

    v = v_new;
    lam = lam_new;
    zL += a_dual * dzL;
    zU += a_dual * dzU;
    // keep bound duals within a neighborhood of the central path
    const double ks = 1e10;
    for (int i = 0; i < nv; ++i) {
      if (vL(i) > -kInf) {
        double ref = mu / (v(i) - vL(i));
        zL(i) = std::clamp(zL(i), ref / ks, ref * ks);
      }
      if (vU(i) < kInf) {
        double ref = mu / (vU(i) - v(i));
        zU(i) = std::clamp(zU(i), ref / ks, ref * ks);
      }
    }

    if (opts.hessian_mode == HessianMode::QuasiBfgs) {
      Eigen::VectorXd sx = v.head(nx) - x_old;
      if (sx.norm() > 1e-14) {
        Eigen::VectorXd y = lagrangian_grad_x(v.head(nx), lam) - lagrangian_grad_x(x_old, lam);
        Eigen::VectorXd Bs = Bq * sx;
        double sBs = sx.dot(Bs);
        double sy = sx.dot(y);
        if (sBs > 1e-16) {
          if (sy < 0.2 * sBs) {
            double th = 0.8 * sBs / (sBs - sy);
            y = th * y + (1.0 - th) * Bs;
            sy = sx.dot(y);
          }
          if (sy > 1e-16)
            Bq += y * y.transpose() / sy - Bs * Bs.transpose() / sBs;
        }
      }
    }

    if (!evaluate(v, true)) return finish(SolveStatus::NumericalFailure, iter + 1);
    if (opts.collect_trace)
      trace << iter << "," << fval << "," << kkt_error(0.0) << "," << mu << "," << alpha << "\n";
  }

  return finish(SolveStatus::IterationLimit, opts.max_iter);
}

}  // namespace tscopf
