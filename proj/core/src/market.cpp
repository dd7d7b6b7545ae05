#include "tscopf/market.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tscopf/textio.hpp"

namespace tscopf {

NlpProblem build_tscopf(const NetworkCase& c, const SurrogateModel& surrogate, double threshold,
                        const Eigen::VectorXd& d_pu, const Eigen::VectorXd& l_pu) {
  EmbeddedStabilityModel em(c, surrogate, EmbeddedStabilityModel::Mode::Threshold, threshold,
                            d_pu, l_pu);
  return em.problem();
}

TscSolution solve_tscopf(const NetworkCase& c, const SurrogateModel& surrogate,
                         double threshold, const Eigen::VectorXd& d_pu,
                         const Eigen::VectorXd& l_pu, const SolveOptions& opts) {
  EmbeddedStabilityModel em(c, surrogate, EmbeddedStabilityModel::Mode::Threshold, threshold,
                            d_pu, l_pu);
  auto prob = em.problem();
  auto r = solve(prob, em.start_from(em.acopf().flat_start()), opts);
  if (r.status != SolveStatus::LocallySolved && r.status != SolveStatus::LocallyInfeasible) {
    auto r2 = solve(prob, em.start_from(random_start(em.acopf(), mix_seed(opts.seed, 0x7c, 1))),
                    opts);
    if (r2.status == SolveStatus::LocallySolved) r = r2;
  }
  TscSolution out;
  out.dispatch = em.interpret(r);
  if (r.status == SolveStatus::LocallySolved) {
    out.gamma = em.stability_dual(r);
    out.f_value = em.classifier_value(r);
  }
  return out;
}

PriceSet compute_prices(const NetworkCase& c, const SurrogateModel& surrogate,
                        const TscSolution& sol) {
  const auto& s = sol.dispatch;
  if (s.lambda.size() != c.n() || s.mu.size() != c.n())
    throw SemanticError("dispatch carries no balance duals");
  const FeatureSpec& spec = surrogate.spec;
  const int m = c.m();

  // total classifier sensitivity to each base variable, through every
  // feature slot the variable reaches
  EmbeddedStabilityModel em(c, surrogate, EmbeddedStabilityModel::Mode::Threshold,
                            std::min(std::max(sol.f_value, 0.5), 1.0 - 1e-9), s.d, s.l);
  Eigen::VectorXd x0n =
      normalize_features(spec, extract_raw_features(c, s, s.d, s.l, spec));
  Eigen::VectorXd grad_n = input_gradient(surrogate.params, x0n);
  Eigen::VectorXd dbase = em.feature_matrix().transpose() * grad_n;

  const auto& lay = em.acopf().layout();
  PriceSet p;
  p.lambda = s.lambda;
  p.mu = s.mu;
  p.gamma = sol.gamma;
  p.df_dg.setZero(m);
  p.df_dr.setZero(m);
  p.df_dzh.setZero(spec.z);
  p.pi.resize(m);
  p.sigma.resize(m);
  p.alpha.setZero(m);
  for (int j = 0; j < m; ++j) {
    int i = c.bus_index(c.gens[j].bus);
    p.df_dg(j) = dbase(lay.g0 + j);
    p.df_dr(j) = dbase(lay.r0 + j);
    p.pi(j) = s.lambda(i) + p.df_dg(j) * sol.gamma;
    p.sigma(j) = s.mu(i) + p.df_dr(j) * sol.gamma;
    if (lay.has_reserve) {
      double dh = dbase(lay.h0 + j);  // equals df/d(zone total) for j's zone
      int zk = c.zone_index(c.buses[i].zone);
      p.df_dzh(zk) = dh;
      p.alpha(j) = dh * sol.gamma;
    }
  }
  p.uniform = true;
  for (int a = 0; a < m && p.uniform; ++a)
    for (int b = a + 1; b < m; ++b)
      if (c.gens[a].bus == c.gens[b].bus &&
          (std::abs(p.pi(a) - p.pi(b)) > 1e-8 || std::abs(p.sigma(a) - p.sigma(b)) > 1e-8)) {
        p.uniform = false;
        break;
      }
  return p;
}

IncentiveReport check_incentive_alignment(const NetworkCase& c, const TscSolution& sol,
                                          const PriceSet& prices) {
  const auto& s = sol.dispatch;
  const bool has_reserve = s.h.size() == c.m();
  Eigen::VectorXd h_max;
  if (has_reserve)
    h_max = ReserveModel::from_case(c, ReserveMode::RelaxedInequalities).h_max_pu;

  IncentiveReport rep;
  for (int j = 0; j < c.m(); ++j) {
    const Generator& gen = c.gens[j];
    auto cost = [&](double g_pu) {
      double mw = g_pu * c.base_mva;
      return gen.c2 * mw * mw + gen.c1 * mw + gen.c0;
    };
    auto profit = [&](double g, double r) {
      double h = 0.0;
      if (has_reserve) h = std::min(h_max(j), gen.gmax / c.base_mva - g);
      return prices.pi(j) * g + prices.sigma(j) * r + prices.alpha(j) * h - cost(g);
    };
    const int N = 200;
    double glo = gen.gmin / c.base_mva, ghi = gen.gmax / c.base_mva;
    double rlo = gen.rmin / c.base_mva, rhi = gen.rmax / c.base_mva;
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < N; ++a) {
      double g = N == 1 ? glo : glo + (ghi - glo) * a / (N - 1.0);
      for (int b = 0; b < N; ++b) {
        double r = N == 1 ? rlo : rlo + (rhi - rlo) * b / (N - 1.0);
        best = std::max(best, profit(g, r));
      }
    }
    IncentiveReport::Row row;
    row.gen_id = gen.id;
    row.grid_max_profit = best;
    {
      double h = has_reserve ? s.h(j) : 0.0;
      row.dispatch_profit =
          prices.pi(j) * s.g(j) + prices.sigma(j) * s.r(j) + prices.alpha(j) * h - cost(s.g(j));
    }
    row.conclusive = prices.alpha(j) >= 0.0;
    row.pass = row.dispatch_profit >= best - 1e-4 * (1.0 + std::abs(best));
    if (row.conclusive && !row.pass) rep.all_pass = false;
    rep.rows.push_back(row);
  }
  return rep;
}

namespace {

StabilityLabel label_dispatch(const NetworkCase& c, const DispatchSolution& disp, int trip_id) {
  auto init = initialize_steady_state(c, disp);
  SimConfig sim;
  sim.trip_gen_id = trip_id;
  auto traj = simulate_contingency(init, c, sim);
  return classify_stability(traj, c.min_hz);
}

int default_trip(const NetworkCase& c, int requested) {
  if (requested >= 0) return requested;
  int best = 0;
  for (int j = 1; j < c.m(); ++j)
    if (c.gens[j].gmax > c.gens[best].gmax) best = j;
  return c.gens[best].id;
}

}  // namespace

CampaignReport run_campaign(const NetworkCase& c, const SurrogateModel& surrogate,
                            const std::vector<double>& thresholds, int num_loads,
                            const LoadDistribution& dist, std::uint64_t seed, int trip_gen_id,
                            const SolveOptions& opts) {
  CampaignReport rep;
  rep.thresholds = thresholds;
  rep.num_loads = num_loads;
  int trip = default_trip(c, trip_gen_id);
  for (long i = 0; i < num_loads; ++i) {
    Eigen::VectorXd d, l;
    sample_load(c, dist, mix_seed(seed, 0xca, i), d, l);
    for (double th : thresholds) {
      CampaignRecord rec;
      rec.load_id = i;
      rec.threshold = th;
      try {
        TscSolution sol = solve_tscopf(c, surrogate, th, d, l, opts);
        rec.status = sol.dispatch.status;
        if (rec.status == SolveStatus::LocallySolved) {
          rec.objective = sol.dispatch.objective;
          rec.gamma = sol.gamma;
          auto label = label_dispatch(c, sol.dispatch, trip);
          rec.stable = label.label;
          rec.nadir_hz = label.nadir_hz;
          PriceSet prices = compute_prices(c, surrogate, sol);
          rec.mean_price = prices.pi.mean() / c.base_mva;
          rec.min_price = prices.pi.minCoeff() / c.base_mva;
          rec.max_price = prices.pi.maxCoeff() / c.base_mva;
          rec.alpha_zone1 =
              prices.alpha.size() ? prices.alpha.maxCoeff() / c.base_mva : 0.0;
        }
      } catch (const std::exception&) {
        rec.status = SolveStatus::NumericalFailure;
      }
      rep.rows.push_back(rec);
    }
  }
  return rep;
}

double CampaignReport::unstable_fraction(double threshold) const {
  int solved = 0, unstable = 0;
  for (const auto& r : rows)
    if (r.threshold == threshold && r.status == SolveStatus::LocallySolved) {
      ++solved;
      unstable += r.stable ? 0 : 1;
    }
  return solved ? static_cast<double>(unstable) / solved : 0.0;
}

double CampaignReport::infeasible_fraction(double threshold) const {
  int total = 0, inf = 0;
  for (const auto& r : rows)
    if (r.threshold == threshold) {
      ++total;
      inf += r.status == SolveStatus::LocallyInfeasible ? 1 : 0;
    }
  return total ? static_cast<double>(inf) / total : 0.0;
}

double CampaignReport::mean_cost(double threshold) const {
  int solved = 0;
  double acc = 0.0;
  for (const auto& r : rows)
    if (r.threshold == threshold && r.status == SolveStatus::LocallySolved) {
      ++solved;
      acc += r.objective;
    }
  return solved ? acc / solved : 0.0;
}

std::string CampaignReport::per_instance_csv() const {
  std::ostringstream os;
  os << "load_id,c,status,objective,stable,nadir_hz,gamma,mean_price,min_price,max_price,"
        "alpha\n";
  for (const auto& r : rows) {
    os << r.load_id << "," << fmt17(r.threshold) << "," << to_string(r.status) << ","
       << fmt17(r.objective) << "," << r.stable << "," << fmt17(r.nadir_hz) << ","
       << fmt17(r.gamma) << "," << fmt17(r.mean_price) << "," << fmt17(r.min_price) << ","
       << fmt17(r.max_price) << "," << fmt17(r.alpha_zone1) << "\n";
  }
  return os.str();
}

std::string CampaignReport::summary_csv() const {
  std::ostringstream os;
  os << "c,frac_unstable,frac_infeasible,mean_cost,mean_gamma\n";
  for (double th : thresholds) {
    int solved = 0;
    double gacc = 0.0;
    for (const auto& r : rows)
      if (r.threshold == th && r.status == SolveStatus::LocallySolved) {
        ++solved;
        gacc += r.gamma;
      }
    os << fmt17(th) << "," << fmt17(unstable_fraction(th)) << ","
       << fmt17(infeasible_fraction(th)) << "," << fmt17(mean_cost(th)) << ","
       << fmt17(solved ? gacc / solved : 0.0) << "\n";
  }
  return os.str();
}

std::string CampaignReport::price_trend_csv() const {
  std::vector<const CampaignRecord*> solved;
  for (const auto& r : rows)
    if (r.status == SolveStatus::LocallySolved) solved.push_back(&r);
  std::sort(solved.begin(), solved.end(), [](const CampaignRecord* a, const CampaignRecord* b) {
    if (a->gamma != b->gamma) return a->gamma > b->gamma;
    if (a->load_id != b->load_id) return a->load_id < b->load_id;
    return a->threshold < b->threshold;
  });
  size_t keep = std::max<size_t>(1, static_cast<size_t>(0.07 * solved.size()));
  keep = std::min(keep, solved.size());
  std::ostringstream os;
  os << "load_id,c,gamma,mean_price,min_price,max_price,alpha\n";
  for (size_t i = 0; i < keep; ++i) {
    const auto& r = *solved[i];
    os << r.load_id << "," << fmt17(r.threshold) << "," << fmt17(r.gamma) << ","
       << fmt17(r.mean_price) << "," << fmt17(r.min_price) << "," << fmt17(r.max_price) << ","
       << fmt17(r.alpha_zone1) << "\n";
  }
  return os.str();
}

}  // namespace tscopf
