// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Numbered criteria cover the solver, classifier gradients,
// dynamics fidelity, the stability-improvement campaign, cost monotonicity,
// active-vs-simple sampling, pricing, threshold-zero equivalence, and
// end-to-end determinism.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "tscopf/market.hpp"
#include "tscopf/textio.hpp"

using namespace tscopf;

namespace {

const std::string kFixtures = TSCOPF_FIXTURE_DIR;
int g_failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s — %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

// ---------------------------------------------------------------- criterion 1
void criterion_solver() {
  double t0 = now_s();
  bool ok = true;
  std::string why;

  {  // equality-constrained QP with a closed-form KKT solution
    Eigen::Matrix2d Q;
    Q << 2, 0, 0, 4;
    Eigen::Vector2d cvec(-1.0, -2.0);
    NlpProblem p;
    p.num_vars = 2;
    p.num_eq = 1;
    p.num_ineq = 0;
    p.lb = Eigen::VectorXd::Constant(2, -1e20);
    p.ub = Eigen::VectorXd::Constant(2, 1e20);
    p.objective = [=](const Eigen::VectorXd& x) {
      return 0.5 * x.dot(Q * x) + cvec.dot(x);
    };
    p.gradient = [=](const Eigen::VectorXd& x) -> Eigen::VectorXd { return Q * x + cvec; };
    p.eq = [](const Eigen::VectorXd& x) {
      return Eigen::VectorXd::Constant(1, x(0) + x(1) - 1.0);
    };
    p.eq_jacobian = [](const Eigen::VectorXd&) {
      Eigen::MatrixXd J(1, 2);
      J << 1, 1;
      return J;
    };
    p.ineq = [](const Eigen::VectorXd&) { return Eigen::VectorXd(0); };
    p.ineq_jacobian = [](const Eigen::VectorXd&) { return Eigen::MatrixXd(0, 2); };
    p.lagrangian_hessian = [=](const Eigen::VectorXd&, const Eigen::VectorXd&,
                               const Eigen::VectorXd&) -> Eigen::MatrixXd { return Q; };
    // closed form: [Q A'; A 0] [x; y] = [-c; b]
    Eigen::Matrix3d K;
    K << 2, 0, 1, 0, 4, 1, 1, 1, 0;
    Eigen::Vector3d rhs(1.0, 2.0, 1.0);
    Eigen::Vector3d ref = K.fullPivLu().solve(rhs);
    auto r = solve(p, Eigen::VectorXd::Zero(2), SolveOptions{});
    if (r.status != SolveStatus::LocallySolved) { ok = false; why = "equality QP failed"; }
    else if ((r.x - ref.head(2)).cwiseAbs().maxCoeff() > 1e-6) { ok = false; why = "equality QP primal"; }
    else if (std::abs(r.y_eq(0) - ref(2)) > 1e-5) { ok = false; why = "equality QP dual"; }
    else if (kkt_residual(p, r) > 1e-6) { ok = false; why = "equality QP kkt residual"; }
  }

  if (ok) {  // bound-constrained scalar: min (x-2)^2 with x <= 1
    NlpProblem p;
    p.num_vars = 1;
    p.num_eq = 0;
    p.num_ineq = 0;
    p.lb = Eigen::VectorXd::Constant(1, -1e20);
    p.ub = Eigen::VectorXd::Constant(1, 1.0);
    p.objective = [](const Eigen::VectorXd& x) { return (x(0) - 2) * (x(0) - 2); };
    p.gradient = [](const Eigen::VectorXd& x) {
      return Eigen::VectorXd::Constant(1, 2 * (x(0) - 2));
    };
    p.eq = [](const Eigen::VectorXd&) { return Eigen::VectorXd(0); };
    p.eq_jacobian = [](const Eigen::VectorXd&) { return Eigen::MatrixXd(0, 1); };
    p.ineq = [](const Eigen::VectorXd&) { return Eigen::VectorXd(0); };
    p.ineq_jacobian = [](const Eigen::VectorXd&) { return Eigen::MatrixXd(0, 1); };
    p.lagrangian_hessian = [](const Eigen::VectorXd&, const Eigen::VectorXd&,
                              const Eigen::VectorXd&) {
      return Eigen::MatrixXd::Constant(1, 1, 2.0);
    };
    auto r = solve(p, Eigen::VectorXd::Zero(1), SolveOptions{});
    if (r.status != SolveStatus::LocallySolved || std::abs(r.x(0) - 1.0) > 1e-6) {
      ok = false; why = "bound QP primal";
    } else if (std::abs(r.z_ub(0) - 2.0) > 1e-5) {
      ok = false; why = "bound QP multiplier";
    }
  }

  if (ok) {  // inequality QP: min |x|^2 s.t. x1 + x2 >= 1 -> (0.5, 0.5), z = 1
    NlpProblem p;
    p.num_vars = 2;
    p.num_eq = 0;
    p.num_ineq = 1;
    p.lb = Eigen::VectorXd::Constant(2, -1e20);
    p.ub = Eigen::VectorXd::Constant(2, 1e20);
    p.objective = [](const Eigen::VectorXd& x) { return x.squaredNorm(); };
    p.gradient = [](const Eigen::VectorXd& x) -> Eigen::VectorXd { return 2 * x; };
    p.eq = [](const Eigen::VectorXd&) { return Eigen::VectorXd(0); };
    p.eq_jacobian = [](const Eigen::VectorXd&) { return Eigen::MatrixXd(0, 2); };
    p.ineq = [](const Eigen::VectorXd& x) {
      return Eigen::VectorXd::Constant(1, x(0) + x(1) - 1.0);
    };
    p.ineq_jacobian = [](const Eigen::VectorXd&) {
      Eigen::MatrixXd J(1, 2);
      J << 1, 1;
      return J;
    };
    p.lagrangian_hessian = [](const Eigen::VectorXd&, const Eigen::VectorXd&,
                              const Eigen::VectorXd&) {
      return Eigen::MatrixXd(2 * Eigen::Matrix2d::Identity());
    };
    auto r = solve(p, Eigen::VectorXd::Zero(2), SolveOptions{});
    if (r.status != SolveStatus::LocallySolved ||
        (r.x - Eigen::Vector2d(0.5, 0.5)).cwiseAbs().maxCoeff() > 1e-6) {
      ok = false; why = "inequality QP primal";
    } else if (std::abs(r.z_ineq(0) - 1.0) > 1e-5) {
      ok = false; why = "inequality QP dual";
    } else if (kkt_residual(p, r) > 1e-6) {
      ok = false; why = "inequality QP kkt residual";
    }
  }

  double dt = now_s() - t0;
  if (ok && dt >= 10.0) { ok = false; why = "runtime budget exceeded"; }
  report(1, ok, ok ? fmt("QP suite primal<=1e-6 dual<=1e-5 in %.2fs", dt) : why);
}

// ---------------------------------------------------------------- criterion 2
void criterion_gradients() {
  double t0 = now_s();
  std::mt19937_64 rng(2024);
  auto u = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  double worst_grad = 0.0, worst_jac = 0.0;
  bool ok = true;

  for (int draw = 0; draw < 100 && ok; ++draw) {
    int dim = 2 + draw % 5;
    std::vector<int> widths = {3 + draw % 3, 2 + draw % 4, 1};
    MlpParams params;
    int prev = dim;
    for (size_t k = 0; k < widths.size(); ++k) {
      Eigen::MatrixXd W(widths[k], prev);
      Eigen::VectorXd b(widths[k]);
      for (int i = 0; i < W.size(); ++i) W(i / prev, i % prev) = u(-1.2, 1.2);
      for (int i = 0; i < b.size(); ++i) b(i) = u(-0.5, 0.5);
      params.W.push_back(W);
      params.b.push_back(b);
      params.act.push_back(k + 1 == widths.size() ? Activation::Sigmoid
                           : (k % 2 ? Activation::Softplus : Activation::Tanh));
      prev = widths[k];
    }
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = u(-2, 2);

    // input_gradient vs central differences
    Eigen::VectorXd g = input_gradient(params, x);
    const double h = 1e-6;
    for (int i = 0; i < dim; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      double fd = (forward(params, xp) - forward(params, xm)) / (2 * h);
      double rel = std::abs(g(i) - fd) / std::max(1e-3, std::abs(fd));
      worst_grad = std::max(worst_grad, rel);
    }

    // constraint-block Jacobian vs central differences
    FeatureSpec spec;
    spec.variant = FeatureVariant::B;
    spec.m = 1;
    spec.n = dim - 1;
    auto blk = emit_constraints(params, spec, 0.5);
    Eigen::VectorXd aux = blk.consistent_aux(x);
    for (int i = 0; i < aux.size(); ++i) aux(i) += u(-0.05, 0.05);
    Eigen::MatrixXd Jx, Ja;
    blk.eq_jacobian(aux, Jx, Ja);
    for (int i = 0; i < dim; ++i) {
      Eigen::VectorXd xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      Eigen::VectorXd fd = (blk.eq(xp, aux) - blk.eq(xm, aux)) / (2 * h);
      double rel = (fd - Jx.col(i)).cwiseAbs().maxCoeff() /
                   std::max(1.0, Jx.col(i).cwiseAbs().maxCoeff());
      worst_jac = std::max(worst_jac, rel);
    }
    for (int i = 0; i < aux.size(); ++i) {
      Eigen::VectorXd ap = aux, am = aux;
      ap(i) += h;
      am(i) -= h;
      Eigen::VectorXd fd = (blk.eq(x, ap) - blk.eq(x, am)) / (2 * h);
      double rel = (fd - Ja.col(i)).cwiseAbs().maxCoeff() /
                   std::max(1.0, Ja.col(i).cwiseAbs().maxCoeff());
      worst_jac = std::max(worst_jac, rel);
    }
    if (worst_grad > 1e-5 || worst_jac > 1e-5) ok = false;
  }
  double dt = now_s() - t0;
  if (dt >= 30.0) ok = false;
  report(2, ok,
         fmt("100 draws, worst gradient err %.2e, worst Jacobian err %.2e, %.2fs",
             worst_grad, worst_jac, dt));
}

// ---------------------------------------------------------------- criterion 3
void criterion_dynamics() {
  double t0 = now_s();
  bool ok = true;
  std::string why;

  auto solved = [](const NetworkCase& c) {
    auto s = solve_acopf(c, SolveOptions{});
    if (s.status != SolveStatus::LocallySolved) throw std::runtime_error("fixture solve");
    return s;
  };

  {  // analytic swing slope after the trip
    auto c = load_case_file(kFixtures + "/smib.case");
    c.branches[0].r = 0.0;
    c.loads[0].l_mvar = 0.0;
    c.gens[c.gen_index(1)].gmax = 2000.0;
    c.finalize();
    auto s = solved(c);
    auto init = initialize_steady_state(c, s);
    SimConfig cfg;
    cfg.step_s = 0.002;
    cfg.trip_gen_id = 2;
    cfg.governors_enabled = false;
    cfg.early_stop = false;
    cfg.horizon_s = 1.5;
    auto traj = simulate_contingency(init, c, cfg);
    double expected = -s.g(c.gen_index(2)) * 60.0 / (2.0 * c.gens[c.gen_index(1)].inertia_s);
    int i0 = -1;
    for (int i = 0; i < traj.time_s.size(); ++i)
      if (std::abs(traj.time_s(i) - 1.0) < 1e-9) i0 = i;
    double rocof =
        (traj.freq_hz(i0 + 1, c.bus_index(1)) - traj.freq_hz(i0, c.bus_index(1))) / cfg.step_s;
    if (std::abs(rocof - expected) / std::abs(expected) > 0.01) {
      ok = false;
      why = fmt("rocof %.4f vs %.4f", rocof, expected);
    }
  }

  if (ok) {  // equilibrium hold over the full horizon
    auto c = load_case_file(kFixtures + "/case9.case");
    auto init = initialize_steady_state(c, solved(c));
    SimConfig cfg;
    cfg.horizon_s = 60.0;
    cfg.trip_gen_id = -1;
    cfg.early_stop = false;
    auto traj = simulate_contingency(init, c, cfg);
    double drift = (traj.freq_hz.array() - 60.0).abs().maxCoeff();
    if (drift > 1e-3) { ok = false; why = fmt("equilibrium drift %.2e Hz", drift); }
  }

  if (ok) {  // step-halving convergence of the nadir
    auto c = load_case_file(kFixtures + "/smib.case");
    auto init = initialize_steady_state(c, solved(c));
    SimConfig cfg;
    cfg.trip_gen_id = 2;
    cfg.early_stop = false;
    cfg.horizon_s = 10.0;
    auto t1 = simulate_contingency(init, c, cfg);
    cfg.step_s = 0.005;
    auto t2 = simulate_contingency(init, c, cfg);
    if (std::abs(t1.nadir_hz - t2.nadir_hz) > 1e-3) {
      ok = false;
      why = fmt("step-halving nadir shift %.2e Hz", std::abs(t1.nadir_hz - t2.nadir_hz));
    }
  }

  if (ok) {  // governor clamp binds exactly at capacity
    auto c = load_case_file(kFixtures + "/smib.case");
    c.gens[c.gen_index(1)].gmax = 140.0;
    c.finalize();
    auto init = initialize_steady_state(c, solved(c));
    SimConfig cfg;
    cfg.trip_gen_id = 2;
    cfg.early_stop = false;
    cfg.horizon_s = 20.0;
    auto traj = simulate_contingency(init, c, cfg);
    double top = traj.pm.col(c.gen_index(1)).maxCoeff();
    if (!(top <= 1.4) || std::abs(top - 1.4) > 1e-12) {
      ok = false;
      why = fmt("governor clamp top %.15f", top);
    }
  }

  double dt = now_s() - t0;
  if (ok && dt >= 120.0) { ok = false; why = "runtime budget exceeded"; }
  report(3, ok, ok ? fmt("rocof/equilibrium/step/clamp in %.1fs", dt) : why);
}

// ------------------------------------------------------- criteria 4,5,6,8,9
// shared trained models and campaign results

SamplerConfig active_config(std::uint64_t seed) {
  SamplerConfig cfg;
  cfg.samples_per_iteration = 50;
  cfg.iterations = 3;
  cfg.seed = seed;
  cfg.variant = FeatureVariant::B;
  return cfg;
}

TrainConfig acceptance_train() {
  TrainConfig tc;
  tc.hidden = {16, 16};
  tc.batch_size = 32;
  tc.max_epochs = 150;
  tc.seed = 11;
  return tc;
}

void criteria_campaign() {
  auto c = load_case_file(kFixtures + "/case9.case");
  LoadDistribution dist = LoadDistribution::scaled_to(c);
  const std::uint64_t train_seed = 5;

  SamplingResult active;
  try {
    active = run_active_sampling(c, active_config(train_seed), dist, acceptance_train());
  } catch (const std::exception& e) {
    for (int id : {4, 5, 6, 8, 9}) report(id, false, std::string("training failed: ") + e.what());
    return;
  }

  // ---- criterion 4: stability improvement over the threshold sweep
  double t4 = now_s();
  std::vector<double> grid = {0.0, 0.3, 0.5, 0.7, 0.85};
  auto rep = run_campaign(c, active.model, grid, 200, dist, 404, -1, SolveOptions{});
  double base_unstable = rep.unstable_fraction(0.0);
  double top_c = -1.0;
  for (double g : grid)
    if (rep.infeasible_fraction(g) <= 0.10) top_c = std::max(top_c, g);
  double top_unstable = top_c >= 0 ? rep.unstable_fraction(top_c) : 1.0;
  int violations = 0;
  for (size_t i = 0; i + 1 < grid.size(); ++i)
    if (rep.unstable_fraction(grid[i + 1]) > rep.unstable_fraction(grid[i]) + 1e-12)
      ++violations;
  bool ok4 = base_unstable >= 0.05 && base_unstable <= 0.40 && top_c > 0.0 &&
             top_unstable <= 0.20 * base_unstable && violations <= 1 && now_s() - t4 < 1800.0;
  report(4, ok4,
         fmt("baseline unstable %.3f, top c=%.2f unstable %.3f, %d adjacent violations, %.0fs",
             base_unstable, top_c, top_unstable, violations, now_s() - t4));

  // ---- criterion 5: cost monotonicity and strict top-end increase
  bool mono = true;
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    if (grid[i + 1] > top_c) break;  // beyond the feasible range
    double a = rep.mean_cost(grid[i]), b = rep.mean_cost(grid[i + 1]);
    if (b < a - 1e-5 * std::abs(a)) mono = false;
  }
  bool strict = top_c > 0.0 && rep.mean_cost(top_c) > rep.mean_cost(0.0);
  report(5, mono && strict,
         fmt("mean cost %.2f at c=0 -> %.2f at c=%.2f, monotone=%d", rep.mean_cost(0.0),
             rep.mean_cost(top_c), top_c, mono ? 1 : 0));

  // ---- criterion 6: active vs simple sampling at equal budget. An
  // infeasible constrained instance falls back to the unconstrained
  // dispatch and inherits its stability, so badly calibrated classifiers
  // cannot hide unstable loads behind infeasibility.
  auto effective = [](const CampaignReport& r, double cthr) {
    std::map<long, const CampaignRecord*> base, at;
    for (const auto& row : r.rows) {
      if (row.threshold == 0.0) base[row.load_id] = &row;
      if (row.threshold == cthr) at[row.load_id] = &row;
    }
    int unstable = 0, n = 0;
    for (auto& [id, row] : at) {
      ++n;
      if (row->status == SolveStatus::LocallySolved) {
        if (!row->stable) ++unstable;
      } else {
        auto it = base.find(id);
        if (it == base.end() || it->second->status != SolveStatus::LocallySolved ||
            !it->second->stable)
          ++unstable;
      }
    }
    return n ? static_cast<double>(unstable) / n : 1.0;
  };
  bool ok6 = false;
  std::string det6;
  try {
    SamplerConfig scfg = active_config(train_seed);
    auto simple = run_simple_sampling(c, 150, scfg, dist, acceptance_train());
    std::vector<double> cgrid = {0.0, 0.3, 0.5, 0.7};
    auto rep_a = run_campaign(c, active.model, cgrid, 60, dist, 505, -1, SolveOptions{});
    auto rep_s = run_campaign(c, simple.model, cgrid, 60, dist, 505, -1, SolveOptions{});
    double best_c = -1.0, best_a = 2.0;
    for (double g : cgrid) {
      if (g == 0.0) continue;
      double fa = effective(rep_a, g);
      if (fa <= best_a) { best_a = fa; best_c = g; }
    }
    double fs = best_c >= 0 ? effective(rep_s, best_c) : -1.0;
    ok6 = best_c >= 0 && best_a < fs;
    det6 = fmt("best common c=%.2f: active unstable %.3f vs simple %.3f (fallback rule)",
               best_c, best_a, fs);
  } catch (const std::exception& e) {
    det6 = std::string("simple sampling failed: ") + e.what();
  }
  report(6, ok6, det6);

  // ---- criterion 8: threshold-zero equivalence on 20 seeded loads
  bool ok8 = true;
  double worst8 = 0.0;
  for (std::uint64_t s = 1; s <= 20 && ok8; ++s) {
    Eigen::VectorXd d, l;
    sample_load(c, dist, mix_seed(808, 0, s), d, l);
    auto plain = solve_acopf(c, d, l, SolveOptions{});
    auto tsc = solve_tscopf(c, active.model, 0.0, d, l, SolveOptions{});
    if (plain.status != SolveStatus::LocallySolved ||
        tsc.dispatch.status != SolveStatus::LocallySolved) {
      ok8 = false;
      break;
    }
    double rel = std::abs(tsc.dispatch.objective - plain.objective) /
                 std::max(1.0, std::abs(plain.objective));
    worst8 = std::max(worst8, rel);
    if (rel > 1e-6) ok8 = false;
  }
  report(8, ok8, fmt("20 loads, worst relative objective gap %.2e", worst8));

  // ---- criterion 9: end-to-end determinism
  bool ok9 = false;
  std::string det9;
  try {
    auto again = run_active_sampling(c, active_config(train_seed), dist, acceptance_train());
    bool weights_same =
        serialize_surrogate(active.model) == serialize_surrogate(again.model);
    bool store_same = active.store.to_csv() == again.store.to_csv();
    std::vector<double> cgrid = {0.0, 0.5};
    auto r1 = run_campaign(c, active.model, cgrid, 20, dist, 909, -1, SolveOptions{});
    auto r2 = run_campaign(c, again.model, cgrid, 20, dist, 909, -1, SolveOptions{});
    bool summary_same = r1.summary_csv() == r2.summary_csv() &&
                        r1.per_instance_csv() == r2.per_instance_csv();
    ok9 = weights_same && store_same && summary_same;
    det9 = fmt("weights=%d store=%d summary=%d byte-identical", weights_same ? 1 : 0,
               store_same ? 1 : 0, summary_same ? 1 : 0);
  } catch (const std::exception& e) {
    det9 = std::string("rerun failed: ") + e.what();
  }
  report(9, ok9, det9);
}

// ---------------------------------------------------------------- criterion 7
NetworkCase split_case() {
  auto c = load_case_file(kFixtures + "/case9.case");
  Generator twin = c.gens[0];
  c.gens[0].gmax = 60.0;
  c.gens[0].gmin = 5.0;
  twin.id = 5;
  twin.gmax = 60.0;
  twin.gmin = 5.0;
  twin.c1 = 5.5;
  c.gens.push_back(twin);
  c.finalize();
  return c;
}

SurrogateModel synthetic(const NetworkCase& c, FeatureVariant v, const Eigen::VectorXd& w,
                         double b) {
  SurrogateModel sm;
  sm.spec = FeatureSpec::for_case(c, v);
  sm.spec.mean = Eigen::VectorXd::Zero(sm.spec.dim());
  sm.spec.stdev = Eigen::VectorXd::Ones(sm.spec.dim());
  sm.params.W = {w.transpose()};
  sm.params.b = {Eigen::VectorXd::Constant(1, b)};
  sm.params.act = {Activation::Sigmoid};
  return sm;
}

void criterion_pricing() {
  double t0 = now_s();
  auto c = split_case();
  bool ok = true;
  std::string why;

  {  // injection inputs: co-located pair priced identically
    Eigen::VectorXd w = Eigen::VectorXd::Zero(c.n());
    w(c.bus_index(1)) = -3.0;
    w(c.bus_index(2)) = -1.0;
    auto sm = synthetic(c, FeatureVariant::C, w, 2.0);
    auto sol = solve_tscopf(c, sm, 0.8, c.d_pu(), c.l_pu(), SolveOptions{});
    auto p = compute_prices(c, sm, sol);
    double spread = std::abs(p.pi(c.gen_index(1)) - p.pi(c.gen_index(5)));
    if (sol.dispatch.status != SolveStatus::LocallySolved || sol.gamma <= 1e-3 ||
        !p.uniform || spread > 1e-8) {
      ok = false;
      why = fmt("variant C spread %.2e gamma %.2e", spread, sol.gamma);
    }
  }

  if (ok) {  // injections + zonal reserve: still uniform, reserve priced
    Eigen::VectorXd w = Eigen::VectorXd::Zero(c.n() + 1);
    w(c.bus_index(1)) = -3.0;
    w(c.n()) = 2.0;  // more headroom reads as more stable
    auto sm = synthetic(c, FeatureVariant::D, w, 1.0);
    auto sol = solve_tscopf(c, sm, 0.8, c.d_pu(), c.l_pu(), SolveOptions{});
    auto p = compute_prices(c, sm, sol);
    double spread = std::abs(p.pi(c.gen_index(1)) - p.pi(c.gen_index(5)));
    if (sol.dispatch.status != SolveStatus::LocallySolved || sol.gamma <= 1e-3 ||
        !p.uniform || spread > 1e-8 || p.alpha.minCoeff() < 0.0) {
      ok = false;
      why = fmt("variant D spread %.2e gamma %.2e alpha_min %.2e", spread, sol.gamma,
                p.alpha.minCoeff());
    }
  }

  int binding = 0, aligned = 0;
  double spread_b = 0.0;
  if (ok) {  // setpoint inputs: discriminatory at the pair + Prop-1 brute force
    Eigen::VectorXd w = Eigen::VectorXd::Zero(c.m() + c.n());
    w(c.gen_index(1)) = -3.0;
    w(c.gen_index(5)) = -1.0;
    auto sm = synthetic(c, FeatureVariant::B, w, 2.0);
    for (std::uint64_t s = 0; s < 16 && binding < 10; ++s) {
      Eigen::VectorXd d = c.d_pu(), l = c.l_pu();
      if (s > 0) sample_load(c, LoadDistribution::scaled_to(c), 700 + s, d, l);
      auto sol = solve_tscopf(c, sm, 0.8, d, l, SolveOptions{});
      if (sol.dispatch.status != SolveStatus::LocallySolved || sol.gamma <= 1e-3) continue;
      ++binding;
      auto p = compute_prices(c, sm, sol);
      spread_b = std::max(spread_b, std::abs(p.pi(c.gen_index(1)) - p.pi(c.gen_index(5))));
      auto rep = check_incentive_alignment(c, sol, p);
      bool conclusive = true;
      for (const auto& row : rep.rows) conclusive = conclusive && row.conclusive;
      if (rep.all_pass && conclusive) ++aligned;
    }
    if (binding < 10 || aligned < binding || spread_b <= 1e-4) {
      ok = false;
      why = fmt("variant B: %d binding, %d aligned, spread %.2e", binding, aligned, spread_b);
    }
  }

  double dt = now_s() - t0;
  if (ok && dt >= 300.0) { ok = false; why = "runtime budget exceeded"; }
  report(7, ok,
         ok ? fmt("C/D uniform, B spread %.2e, %d/%d instances aligned, %.0fs", spread_b,
                  aligned, binding, dt)
            : why);
}

}  // namespace

int main() {
  criterion_solver();
  criterion_gradients();
  criterion_dynamics();
  criteria_campaign();
  criterion_pricing();
  std::printf("%s\n", g_failures == 0 ? "all criteria passed" : "FAILURES present");
  return g_failures;
}
