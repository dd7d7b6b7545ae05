#include "tscopf/dynamics.hpp"

#include <cmath>
#include <queue>
#include <sstream>

#include "tscopf/textio.hpp"

namespace tscopf {

double transient_reactance(const Generator& g, double base_mva) {
  double gmax_pu = g.gmax / base_mva;
  return 0.25 / std::max(gmax_pu, 0.05);
}

namespace {

// Admittance over network buses plus machine internal nodes, with loads as
// constant shunts, Kron-reduced to the active machines' internal nodes.
Eigen::MatrixXcd reduced_admittance(const NetworkCase& c, const Eigen::VectorXcd& load_adm,
                                    const Eigen::VectorXd& xdp,
                                    const std::vector<bool>& active) {
  const int n = c.n(), m = c.m();
  std::vector<int> node_of(m, -1);
  int na = 0;
  for (int j = 0; j < m; ++j)
    if (active[j]) node_of[j] = na++;
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n + na, n + na);
  Y.topLeftCorner(n, n) = admittance_matrix(c);
  for (int i = 0; i < n; ++i) Y(i, i) += load_adm(i);
  for (int j = 0; j < m; ++j) {
    if (!active[j]) continue;
    int b = c.bus_index(c.gens[j].bus);
    int g = n + node_of[j];
    std::complex<double> ym = 1.0 / std::complex<double>(0.0, xdp(j));
    Y(b, b) += ym;
    Y(g, g) += ym;
    Y(b, g) -= ym;
    Y(g, b) -= ym;
  }
  // eliminate the n network buses
  Eigen::MatrixXcd Ybb = Y.topLeftCorner(n, n);
  Eigen::MatrixXcd Ybg = Y.topRightCorner(n, na);
  Eigen::MatrixXcd Ygb = Y.bottomLeftCorner(na, n);
  Eigen::MatrixXcd Ygg = Y.bottomRightCorner(na, na);
  return Ygg - Ygb * Ybb.partialPivLu().solve(Ybg);
}

// Electrical power of each active machine given rotor angles.
Eigen::VectorXd electrical_power(const Eigen::MatrixXcd& Yred, const Eigen::VectorXd& emag,
                                 const Eigen::VectorXd& delta, const std::vector<int>& idx) {
  const int na = static_cast<int>(idx.size());
  Eigen::VectorXd pe = Eigen::VectorXd::Zero(na);
  for (int a = 0; a < na; ++a) {
    for (int b = 0; b < na; ++b) {
      double G = Yred(a, b).real(), B = Yred(a, b).imag();
      double dd = delta(idx[a]) - delta(idx[b]);
      pe(a) += emag(idx[a]) * emag(idx[b]) * (G * std::cos(dd) + B * std::sin(dd));
    }
  }
  return pe;
}

// Reactance-weighted shortest distance from every machine bus to every bus.
Eigen::MatrixXd machine_distances(const NetworkCase& c) {
  const int n = c.n(), m = c.m();
  Eigen::MatrixXd adj = Eigen::MatrixXd::Constant(n, n, -1.0);
  for (const auto& br : c.branches) {
    int f = c.bus_index(br.from), t = c.bus_index(br.to);
    double w = std::abs(br.x);
    if (adj(f, t) < 0 || w < adj(f, t)) adj(f, t) = adj(t, f) = w;
  }
  Eigen::MatrixXd dist(m, n);
  for (int j = 0; j < m; ++j) {
    std::vector<double> d(n, std::numeric_limits<double>::infinity());
    using Node = std::pair<double, int>;
    std::priority_queue<Node, std::vector<Node>, std::greater<Node>> pq;
    int src = c.bus_index(c.gens[j].bus);
    d[src] = 0.0;
    pq.push({0.0, src});
    while (!pq.empty()) {
      auto [dd, u] = pq.top();
      pq.pop();
      if (dd > d[u]) continue;
      for (int v = 0; v < n; ++v) {
        if (adj(u, v) < 0) continue;
        if (d[u] + adj(u, v) < d[v]) {
          d[v] = d[u] + adj(u, v);
          pq.push({d[v], v});
        }
      }
    }
    for (int i = 0; i < n; ++i) dist(j, i) = d[i];
  }
  return dist;
}

// Each bus follows its electrically nearest active machine.
std::vector<int> nearest_machine(const NetworkCase& c, const Eigen::MatrixXd& dist,
                                 const Eigen::VectorXd& xdp, const std::vector<bool>& active) {
  std::vector<int> owner(c.n(), -1);
  for (int i = 0; i < c.n(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < c.m(); ++j) {
      if (!active[j]) continue;
      double d = dist(j, i) + xdp(j);
      if (d < best) {
        best = d;
        owner[i] = j;
      }
    }
  }
  return owner;
}

struct Derivs {
  Eigen::VectorXd ddelta, ddomega, dpm;
};

Derivs rhs(const NetworkCase& c, const SimConfig& cfg, const Eigen::MatrixXcd& Yred,
           const Eigen::VectorXd& emag, const std::vector<int>& idx,
           const std::vector<bool>& active, const Eigen::VectorXd& delta,
           const Eigen::VectorXd& domega, const Eigen::VectorXd& pm,
           const Eigen::VectorXd& valve) {
  const int m = c.m();
  const double w0 = 2.0 * M_PI * c.nominal_hz;
  Derivs d;
  d.ddelta = Eigen::VectorXd::Zero(m);
  d.ddomega = Eigen::VectorXd::Zero(m);
  d.dpm = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd pe = electrical_power(Yred, emag, delta, idx);
  for (size_t a = 0; a < idx.size(); ++a) {
    int j = idx[a];
    const Generator& g = c.gens[j];
    double gmax = g.gmax / c.base_mva;
    double pmc = std::clamp(pm(j), 0.0, gmax);
    d.ddelta(j) = w0 * domega(j);
    d.ddomega(j) = (pmc - pe(a) - g.damping * domega(j)) / (2.0 * g.inertia_s);
    if (cfg.governors_enabled) {
      double dpm = ((valve(j) - domega(j) / g.droop) - pm(j)) / g.tgov_s;
      // anti-windup: the hard limit stops integration into the bound
      if ((pm(j) >= gmax && dpm > 0) || (pm(j) <= 0.0 && dpm < 0)) dpm = 0.0;
      d.dpm(j) = dpm;
    }
  }
  (void)active;
  return d;
}

}  // namespace

DynamicInit initialize_steady_state(const NetworkCase& c, const DispatchSolution& dispatch) {
  auto res = power_flow_residual(c, dispatch);
  if (!(res.max_norm <= 1e-6))
    throw DynamicsInitError("dispatch is not AC-consistent (balance residual " +
                            std::to_string(res.max_norm) + " > 1e-6)");
  const int n = c.n(), m = c.m();
  DynamicInit init;
  init.mach.resize(m);
  init.emf_mag.resize(m);
  init.xd_prime.resize(m);
  init.load_admittance.resize(n);
  Eigen::VectorXd d = dispatch.d.size() ? dispatch.d : c.d_pu();
  Eigen::VectorXd l = dispatch.l.size() ? dispatch.l : c.l_pu();
  for (int i = 0; i < n; ++i) {
    std::complex<double> s(d(i), l(i));
    double v2 = dispatch.vm(i) * dispatch.vm(i);
    init.load_admittance(i) = std::conj(s) / v2;
  }
  for (int j = 0; j < m; ++j) {
    int b = c.bus_index(c.gens[j].bus);
    std::complex<double> V = std::polar(dispatch.vm(b), dispatch.va(b));
    std::complex<double> S(dispatch.g(j), dispatch.r(j));
    std::complex<double> I = std::conj(S / V);
    init.xd_prime(j) = transient_reactance(c.gens[j], c.base_mva);
    std::complex<double> E = V + std::complex<double>(0.0, init.xd_prime(j)) * I;
    init.emf_mag(j) = std::abs(E);
    init.mach[j].delta = std::arg(E);
    init.mach[j].domega = 0.0;
    init.mach[j].pm = dispatch.g(j);
    init.mach[j].valve = dispatch.g(j);
  }
  // equilibrium check: electrical power from the reduced network must match
  // the dispatch, so all derivatives vanish
  std::vector<bool> active(m, true);
  std::vector<int> idx(m);
  for (int j = 0; j < m; ++j) idx[j] = j;
  Eigen::MatrixXcd Yred = reduced_admittance(c, init.load_admittance, init.xd_prime, active);
  Eigen::VectorXd delta(m);
  for (int j = 0; j < m; ++j) delta(j) = init.mach[j].delta;
  Eigen::VectorXd pe = electrical_power(Yred, init.emf_mag, delta, idx);
  init.max_derivative = 0.0;
  for (int j = 0; j < m; ++j) {
    double acc = (init.mach[j].pm - pe(j)) / (2.0 * c.gens[j].inertia_s);
    init.max_derivative = std::max(init.max_derivative, std::abs(acc));
  }
  return init;
}

Trajectory simulate_contingency(const DynamicInit& init, const NetworkCase& c,
                                const SimConfig& cfg) {
  if (!(cfg.step_s > 0) || cfg.horizon_s < cfg.trip_time_s)
    throw SemanticError("invalid simulation configuration");
  const int n = c.n(), m = c.m();
  int trip = cfg.trip_gen_id >= 0 ? c.gen_index(cfg.trip_gen_id) : -1;

  std::vector<bool> pre_active(m, true), post_active(m, true);
  if (trip >= 0) post_active[trip] = false;
  auto make_idx = [&](const std::vector<bool>& act) {
    std::vector<int> idx;
    for (int j = 0; j < m; ++j)
      if (act[j]) idx.push_back(j);
    return idx;
  };
  std::vector<int> pre_idx = make_idx(pre_active), post_idx = make_idx(post_active);
  Eigen::MatrixXcd Ypre = reduced_admittance(c, init.load_admittance, init.xd_prime, pre_active);
  Eigen::MatrixXcd Ypost =
      trip >= 0 ? reduced_admittance(c, init.load_admittance, init.xd_prime, post_active) : Ypre;
  Eigen::MatrixXd dist = machine_distances(c);
  std::vector<int> owner_pre = nearest_machine(c, dist, init.xd_prime, pre_active);
  std::vector<int> owner_post = nearest_machine(c, dist, init.xd_prime, post_active);

  Eigen::VectorXd delta(m), domega(m), pm(m), valve(m);
  for (int j = 0; j < m; ++j) {
    delta(j) = init.mach[j].delta;
    domega(j) = init.mach[j].domega;
    pm(j) = init.mach[j].pm;
    valve(j) = init.mach[j].valve;
  }

  const int steps = static_cast<int>(std::llround(cfg.horizon_s / cfg.step_s));
  std::vector<double> times;
  std::vector<Eigen::VectorXd> freqs, pms, doms, pes;
  times.reserve(steps + 1);

  std::string termination = "horizon";
  double prev_min = c.nominal_hz;
  bool tripped = false;

  auto record = [&](double t) {
    bool post = tripped;
    const std::vector<int>& owner = post ? owner_post : owner_pre;
    const std::vector<int>& idx = post ? post_idx : pre_idx;
    const Eigen::MatrixXcd& Y = post ? Ypost : Ypre;
    Eigen::VectorXd f(n);
    for (int i = 0; i < n; ++i)
      f(i) = c.nominal_hz * (1.0 + (owner[i] >= 0 ? domega(owner[i]) : 0.0));
    Eigen::VectorXd pe_full = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd pe = electrical_power(Y, init.emf_mag, delta, idx);
    for (size_t a = 0; a < idx.size(); ++a) pe_full(idx[a]) = pe(a);
    times.push_back(t);
    freqs.push_back(f);
    pms.push_back(pm);
    doms.push_back(domega);
    pes.push_back(pe_full);
    return f.minCoeff();
  };

  prev_min = record(0.0);
  for (int s = 0; s < steps; ++s) {
    double t = s * cfg.step_s;
    if (!tripped && trip >= 0 && t + cfg.step_s >= cfg.trip_time_s - 1e-12) tripped = true;
    const std::vector<bool>& act = tripped ? post_active : pre_active;
    const std::vector<int>& idx = tripped ? post_idx : pre_idx;
    const Eigen::MatrixXcd& Y = tripped ? Ypost : Ypre;

    auto f1 = rhs(c, cfg, Y, init.emf_mag, idx, act, delta, domega, pm, valve);
    double h = cfg.step_s;
    auto f2 = rhs(c, cfg, Y, init.emf_mag, idx, act, delta + 0.5 * h * f1.ddelta,
                  domega + 0.5 * h * f1.ddomega, pm + 0.5 * h * f1.dpm, valve);
    auto f3 = rhs(c, cfg, Y, init.emf_mag, idx, act, delta + 0.5 * h * f2.ddelta,
                  domega + 0.5 * h * f2.ddomega, pm + 0.5 * h * f2.dpm, valve);
    auto f4 = rhs(c, cfg, Y, init.emf_mag, idx, act, delta + h * f3.ddelta,
                  domega + h * f3.ddomega, pm + h * f3.dpm, valve);
    delta += (h / 6.0) * (f1.ddelta + 2 * f2.ddelta + 2 * f3.ddelta + f4.ddelta);
    domega += (h / 6.0) * (f1.ddomega + 2 * f2.ddomega + 2 * f3.ddomega + f4.ddomega);
    pm += (h / 6.0) * (f1.dpm + 2 * f2.dpm + 2 * f3.dpm + f4.dpm);
    for (int j = 0; j < m; ++j) pm(j) = std::clamp(pm(j), 0.0, c.gens[j].gmax / c.base_mva);

    bool collapse = false;
    for (int j : idx)
      if (!std::isfinite(delta(j)) || !std::isfinite(domega(j)) || std::abs(domega(j)) > 0.5)
        collapse = true;

    double fmin = record(t + h);
    if (collapse) {
      termination = "numerical collapse";
      break;
    }
    if (cfg.early_stop && tripped && t + h > cfg.trip_time_s + h) {
      if (fmin < c.min_hz) {
        termination = "frequency-threshold";
        break;
      }
      if (fmin > prev_min + 1e-9 && prev_min < c.nominal_hz - 1e-6) {
        termination = "frequency-rising";
        break;
      }
    }
    prev_min = fmin;
  }

  Trajectory traj;
  const int ns = static_cast<int>(times.size());
  traj.time_s.resize(ns);
  traj.freq_hz.resize(ns, n);
  traj.pm.resize(ns, m);
  traj.domega.resize(ns, m);
  traj.pe.resize(ns, m);
  for (int s = 0; s < ns; ++s) {
    traj.time_s(s) = times[s];
    traj.freq_hz.row(s) = freqs[s];
    traj.pm.row(s) = pms[s];
    traj.domega.row(s) = doms[s];
    traj.pe.row(s) = pes[s];
  }
  traj.termination = termination;
  traj.nadir_hz = traj.freq_hz.minCoeff();
  return traj;
}

StabilityLabel classify_stability(const Trajectory& traj, double min_hz) {
  if (traj.time_s.size() == 0) throw SemanticError("empty trajectory");
  StabilityLabel out;
  out.nadir_hz = traj.freq_hz.minCoeff();
  out.label = out.nadir_hz >= min_hz ? 1 : 0;
  if (traj.termination == "numerical collapse") out.label = 0;
  return out;
}

std::string trajectory_csv(const NetworkCase& c, const Trajectory& traj) {
  std::ostringstream os;
  os << "time_s";
  for (const auto& b : c.buses) os << ",freq_hz_bus" << b.id;
  for (const auto& g : c.gens) os << ",pm_gen" << g.id;
  for (const auto& g : c.gens) os << ",domega_gen" << g.id;
  os << "\n";
  for (int s = 0; s < traj.time_s.size(); ++s) {
    os << fmt17(traj.time_s(s));
    for (int i = 0; i < traj.freq_hz.cols(); ++i) os << "," << fmt17(traj.freq_hz(s, i));
    for (int j = 0; j < traj.pm.cols(); ++j) os << "," << fmt17(traj.pm(s, j));
    for (int j = 0; j < traj.domega.cols(); ++j) os << "," << fmt17(traj.domega(s, j));
    os << "\n";
  }
  return os.str();
}

}  // namespace tscopf
