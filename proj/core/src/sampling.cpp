#include "tscopf/sampling.hpp"

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "tscopf/textio.hpp"

namespace tscopf {

namespace {
// reference parameters: shift 909 MW on a 1136.25 MW system
constexpr double kShiftFraction = 0.8;
constexpr double kScaleFraction = 40.0 / 1136.25;
}  // namespace

LoadDistribution LoadDistribution::scaled_to(const NetworkCase& c) {
  double total = 0.0;
  for (const auto& ld : c.loads) total += ld.d_mw;
  if (!(total > 0)) throw SemanticError("case has no load to scale the distribution to");
  LoadDistribution d;
  d.shift_mw = kShiftFraction * total;
  d.scale_mw = kScaleFraction * total;
  return d;
}

void sample_load(const NetworkCase& c, const LoadDistribution& dist, std::uint64_t seed,
                 Eigen::VectorXd& d_pu, Eigen::VectorXd& l_pu) {
  double nominal_total = 0.0;
  for (const auto& ld : c.loads) nominal_total += ld.d_mw;
  if (!(nominal_total > 0)) throw SemanticError("case has no load");

  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(dist.shape, dist.scale_mw);
  double total_mw = dist.shift_mw + gamma(rng);
  double factor = total_mw / nominal_total;

  d_pu = Eigen::VectorXd::Zero(c.n());
  l_pu = Eigen::VectorXd::Zero(c.n());
  std::normal_distribution<double> unit_normal(0.0, 1.0);
  for (const auto& ld : c.loads) {
    double d_mw = ld.d_mw * factor;
    double l_mvar = ld.l_mvar * (dist.scale_reactive ? factor : 1.0);
    if (dist.std_fraction > 0) {
      d_mw += dist.std_fraction * std::abs(d_mw) * unit_normal(rng);
      l_mvar += dist.std_fraction * std::abs(l_mvar) * unit_normal(rng);
    }
    int i = c.bus_index(ld.bus);
    d_pu(i) += std::max(d_mw, 0.0) / c.base_mva;
    l_pu(i) += std::max(l_mvar, 0.0) / c.base_mva;
  }
}

Eigen::VectorXd random_start(const AcopfModel& model, std::uint64_t seed) {
  const auto& lay = model.layout();
  const NetworkCase& c = model.network();
  std::mt19937_64 rng(seed);
  auto uni = [&](double lo, double hi) {
    if (!(hi > lo)) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };
  Eigen::VectorXd x = model.flat_start();
  for (int j = 0; j < lay.m; ++j) {
    x(lay.g0 + j) = uni(c.gmin_pu()(j), c.gmax_pu()(j));
    x(lay.r0 + j) = uni(c.rmin_pu()(j), c.rmax_pu()(j));
  }
  for (int i = 0; i < lay.n; ++i)
    x(lay.v0 + i) = uni(c.buses[i].vmin, c.buses[i].vmax);
  // angles stay zero; reserve stays at mid-range from the flat start
  return x;
}

NlpProblem build_asopf(const NetworkCase& c, const SurrogateModel& surrogate,
                       const Eigen::VectorXd& d_pu, const Eigen::VectorXd& l_pu) {
  EmbeddedStabilityModel em(c, surrogate, EmbeddedStabilityModel::Mode::Boundary, 0.5, d_pu,
                            l_pu);
  return em.problem();
}

namespace {

int default_trip(const NetworkCase& c, int requested) {
  if (requested >= 0) return requested;
  int best = 0;
  for (int j = 1; j < c.m(); ++j)
    if (c.gens[j].gmax > c.gens[best].gmax) best = j;
  return c.gens[best].id;
}

// Cache key: the dispatch rounded hard enough that re-solved duplicates of
// the same boundary point hit the same entry.
std::string cache_key(const DispatchSolution& s) {
  std::ostringstream os;
  auto put = [&](const Eigen::VectorXd& v) {
    for (int i = 0; i < v.size(); ++i) {
      char buf[32];
      snprintf(buf, sizeof(buf), "%.8f|", v(i));
      os << buf;
    }
  };
  put(s.g);
  put(s.r);
  put(s.vm);
  put(s.va);
  put(s.d);
  put(s.l);
  return os.str();
}

struct Labeler {
  const NetworkCase& c;
  int trip_id;
  std::map<std::string, StabilityLabel> cache;

  StabilityLabel operator()(const DispatchSolution& disp) {
    std::string key = cache_key(disp);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto init = initialize_steady_state(c, disp);
    SimConfig sim;
    sim.trip_gen_id = trip_id;
    auto traj = simulate_contingency(init, c, sim);
    auto label = classify_stability(traj, c.min_hz);
    cache.emplace(std::move(key), label);
    return label;
  }
};

std::vector<TrainingSample> training_set(const SampleStore& store, const FeatureSpec& spec) {
  std::vector<TrainingSample> data;
  data.reserve(store.rows.size());
  for (const auto& r : store.rows) {
    TrainingSample t;
    t.x = normalize_features(spec, r.features);
    t.label = r.label;
    t.iteration = r.iteration;
    t.sample_id = r.sample_id;
    data.push_back(t);
  }
  return data;
}

}  // namespace

SamplingResult run_active_sampling(const NetworkCase& c, const SamplerConfig& cfg,
                                   const LoadDistribution& dist, const TrainConfig& train_cfg) {
  if (cfg.samples_per_iteration < 1 || cfg.iterations < 1)
    throw SemanticError("sampler needs at least one sample and one iteration");
  const int trip_id = default_trip(c, cfg.trip_gen_id);
  ReserveMode rmode = reserve_mode_for(cfg.variant);
  FeatureSpec spec = FeatureSpec::for_case(c, cfg.variant);

  SamplingResult out;
  out.store.variant = cfg.variant;
  Labeler labeler{c, trip_id, {}};
  SurrogateModel current;
  bool trained = false;

  for (int k = 1; k <= cfg.iterations; ++k) {
    int fails = 0;
    std::vector<StoredSample> fresh;
    for (int s = 0; s < cfg.samples_per_iteration; ++s) {
      std::uint64_t seed = mix_seed(cfg.seed, k, s);
      Eigen::VectorXd d, l;
      sample_load(c, dist, seed, d, l);

      DispatchSolution disp;
      bool ok = false;
      if (k == 1 || !trained) {
        disp = solve_acopf(c, d, l, cfg.solver, rmode);
        ok = disp.status == SolveStatus::LocallySolved;
        if (!ok) {
          AcopfModel model(c, ReserveModel::from_case(c, rmode), d, l);
          auto r = solve(model.base_problem(), random_start(model, mix_seed(seed, 7, 1)),
                         cfg.solver);
          disp = model.interpret(r);
          ok = disp.status == SolveStatus::LocallySolved;
        }
      } else {
        EmbeddedStabilityModel em(c, current, EmbeddedStabilityModel::Mode::Boundary, 0.5, d,
                                  l);
        auto prob = em.problem();
        auto r = solve(prob, em.start_from(random_start(em.acopf(), seed)), cfg.solver);
        if (r.status != SolveStatus::LocallySolved)
          r = solve(prob, em.start_from(random_start(em.acopf(), mix_seed(seed, 7, 2))),
                    cfg.solver);
        if (r.status == SolveStatus::LocallySolved) {
          disp = em.interpret(r);
          ok = true;
        } else {
          // fall back to a plain feasible point at this load
          disp = solve_acopf(c, d, l, cfg.solver, rmode);
          ok = disp.status == SolveStatus::LocallySolved;
        }
      }
      if (!ok) {
        ++fails;
        continue;
      }
      StoredSample row;
      row.iteration = k;
      row.sample_id = s;
      row.seed = seed;
      row.solver_status = to_string(disp.status);
      try {
        auto label = labeler(disp);
        row.label = label.label;
        row.nadir_hz = label.nadir_hz;
      } catch (const DynamicsInitError&) {
        ++fails;
        continue;
      }
      row.features = extract_raw_features(c, disp, d, l, spec);
      fresh.push_back(std::move(row));
    }
    if (fails * 2 > cfg.samples_per_iteration)
      throw SamplingError("iteration " + std::to_string(k) + " lost " + std::to_string(fails) +
                          " of " + std::to_string(cfg.samples_per_iteration) + " samples");
    out.failed_samples += fails;
    for (auto& r : fresh) out.store.rows.push_back(std::move(r));

    if (k == 1) {
      std::vector<Eigen::VectorXd> raw;
      for (const auto& r : out.store.rows) raw.push_back(r.features);
      fit_normalization(spec, raw);
    }
    TrainConfig tc = train_cfg;
    tc.seed = mix_seed(train_cfg.seed, 0x7472, k);
    current.params = train(training_set(out.store, spec), tc);
    current.spec = spec;
    trained = true;
  }

  out.model = current;
  out.boundary_distance.assign(cfg.iterations, 0.0);
  std::vector<int> counts(cfg.iterations, 0);
  for (const auto& r : out.store.rows) {
    double f = forward(current.params, normalize_features(spec, r.features));
    out.boundary_distance[r.iteration - 1] += std::abs(f - 0.5);
    counts[r.iteration - 1] += 1;
  }
  for (int k = 0; k < cfg.iterations; ++k)
    if (counts[k]) out.boundary_distance[k] /= counts[k];
  return out;
}

SamplingResult run_simple_sampling(const NetworkCase& c, int n, const SamplerConfig& cfg,
                                   const LoadDistribution& dist, const TrainConfig& train_cfg) {
  if (n < 1) throw SemanticError("need at least one sample");
  const int trip_id = default_trip(c, cfg.trip_gen_id);
  ReserveMode rmode = reserve_mode_for(cfg.variant);
  FeatureSpec spec = FeatureSpec::for_case(c, cfg.variant);

  SamplingResult out;
  out.store.variant = cfg.variant;
  Labeler labeler{c, trip_id, {}};
  int fails = 0;
  for (int s = 0; s < n; ++s) {
    std::uint64_t seed = mix_seed(cfg.seed, 1, s);
    Eigen::VectorXd d, l;
    sample_load(c, dist, seed, d, l);
    DispatchSolution disp = solve_acopf(c, d, l, cfg.solver, rmode);
    if (disp.status != SolveStatus::LocallySolved) {
      AcopfModel model(c, ReserveModel::from_case(c, rmode), d, l);
      auto r =
          solve(model.base_problem(), random_start(model, mix_seed(seed, 7, 1)), cfg.solver);
      disp = model.interpret(r);
    }
    if (disp.status != SolveStatus::LocallySolved) {
      ++fails;
      continue;
    }
    StoredSample row;
    row.iteration = 1;
    row.sample_id = s;
    row.seed = seed;
    row.solver_status = to_string(disp.status);
    try {
      auto label = labeler(disp);
      row.label = label.label;
      row.nadir_hz = label.nadir_hz;
    } catch (const DynamicsInitError&) {
      ++fails;
      continue;
    }
    row.features = extract_raw_features(c, disp, d, l, spec);
    out.store.rows.push_back(std::move(row));
  }
  if (fails * 2 > n) throw SamplingError("simple sampling lost " + std::to_string(fails) +
                                         " of " + std::to_string(n) + " samples");
  out.failed_samples = fails;
  std::vector<Eigen::VectorXd> raw;
  for (const auto& r : out.store.rows) raw.push_back(r.features);
  fit_normalization(spec, raw);
  TrainConfig tc = train_cfg;
  tc.seed = mix_seed(train_cfg.seed, 0x7472, 1);
  out.model.params = train(training_set(out.store, spec), tc);
  out.model.spec = spec;
  out.boundary_distance.assign(1, 0.0);
  for (const auto& r : out.store.rows)
    out.boundary_distance[0] +=
        std::abs(forward(out.model.params, normalize_features(spec, r.features)) - 0.5);
  if (!out.store.rows.empty()) out.boundary_distance[0] /= out.store.rows.size();
  return out;
}

std::string SampleStore::to_csv() const {
  std::ostringstream os;
  os << "# variant " << to_string(variant) << "\n";
  os << "iteration,sample_id,seed";
  int dim = rows.empty() ? 0 : static_cast<int>(rows.front().features.size());
  for (int i = 0; i < dim; ++i) os << ",f" << i;
  os << ",label,nadir_hz,solver_status\n";
  for (const auto& r : rows) {
    os << r.iteration << "," << r.sample_id << "," << r.seed;
    for (int i = 0; i < r.features.size(); ++i) os << "," << fmt17(r.features(i));
    os << "," << r.label << "," << fmt17(r.nadir_hz) << "," << r.solver_status << "\n";
  }
  return os.str();
}

SampleStore SampleStore::from_csv(const std::string& text) {
  SampleStore store;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int dim = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line.rfind("# variant ", 0) == 0) {
      store.variant = feature_variant_from_string(line.substr(10));
      continue;
    }
    if (line.rfind("iteration,", 0) == 0) {
      dim = 0;
      size_t pos = 0;
      while ((pos = line.find(",f", pos)) != std::string::npos) {
        ++dim;
        pos += 2;
      }
      continue;
    }
    if (dim < 0) throw ParseError(lineno, "missing header row");
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != dim + 6)
      throw ParseError(lineno, "wrong column count");
    StoredSample r;
    r.iteration = std::stoi(cells[0]);
    r.sample_id = std::stol(cells[1]);
    r.seed = std::stoull(cells[2]);
    r.features.resize(dim);
    for (int i = 0; i < dim; ++i) r.features(i) = std::stod(cells[3 + i]);
    r.label = std::stoi(cells[3 + dim]);
    r.nadir_hz = std::stod(cells[4 + dim]);
    r.solver_status = cells[5 + dim];
    store.rows.push_back(std::move(r));
  }
  return store;
}

}  // namespace tscopf
