// Command-line front end: validates cases, trains the stability classifier,
// solves dispatch problems, runs time-domain simulations, and sweeps
// threshold campaigns. Emits CSV data files plus a JSON run manifest.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "tscopf/market.hpp"
#include "tscopf/textio.hpp"

using namespace tscopf;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// exit codes are a public contract
enum ExitCode {
  kOk = 0,
  kParse = 2,
  kValidate = 3,
  kSampling = 4,
  kInfeasible = 5,
  kNumerical = 6,
  kDynamicsInit = 7,
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct Manifest {
  std::string command;
  std::string case_path;
  std::uint64_t seed = 0;
  std::string config;  // normalized flag string, digested below
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void write(const std::string& path) const {
    json j;
    j["command"] = command;
    j["case"] = case_path;
    j["seed"] = seed;
    char digest[32];
    snprintf(digest, sizeof(digest), "%016llx",
             static_cast<unsigned long long>(fnv1a(config + case_path)));
    j["config_digest"] = digest;
    j["tool_version"] = kVersion;
    j["outputs"] = outputs;
    j["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file(path, j.dump(2) + "\n");
  }
};

int status_exit(SolveStatus st) {
  switch (st) {
    case SolveStatus::LocallySolved: return kOk;
    case SolveStatus::LocallyInfeasible: return kInfeasible;
    default: return kNumerical;
  }
}

NetworkCase load_case_or_exit(const std::string& path) {
  try {
    auto c = load_case_file(path);
    auto problems = validate_case(c);
    if (!problems.empty()) {
      for (const auto& p : problems) std::cerr << "invalid: " << p << "\n";
      std::exit(kValidate);
    }
    return c;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    std::exit(kParse);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    std::exit(kParse);
  }
}

std::string prices_csv(const NetworkCase& c, const PriceSet& p) {
  std::ostringstream os;
  os << "# gamma " << fmt17(p.gamma) << "\n";
  os << "# uniform " << (p.uniform ? 1 : 0) << "\n";
  os << "gen_id,bus,pi_usd_mwh,sigma_usd_mvarh,alpha_usd_mwh,df_dg,df_dr\n";
  for (int j = 0; j < c.m(); ++j) {
    os << c.gens[j].id << "," << c.gens[j].bus << "," << fmt17(p.pi(j) / c.base_mva) << ","
       << fmt17(p.sigma(j) / c.base_mva) << "," << fmt17(p.alpha(j) / c.base_mva) << ","
       << fmt17(p.df_dg(j)) << "," << fmt17(p.df_dr(j)) << "\n";
  }
  return os.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transient stability-constrained dispatch toolkit"};
  app.require_subcommand(1);

  // ---- case validate|show ----------------------------------------------
  auto* cmd_case = app.add_subcommand("case", "validate or print a case file");
  std::string case_action, case_path;
  cmd_case->add_option("action", case_action, "validate | show")
      ->check(CLI::IsMember({"validate", "show"}))
      ->required();
  cmd_case->add_option("path", case_path, "case file")->required();

  // ---- train ------------------------------------------------------------
  auto* cmd_train = app.add_subcommand("train", "train the stability classifier");
  std::string tr_case, tr_inputs = "B", tr_out = "weights.txt", tr_store;
  int tr_iters = 30, tr_per_iter = 500, tr_n = 0, tr_trip = -1, tr_workers = 0;
  std::vector<int> tr_hidden = {128, 128};
  int tr_epochs = 200;
  std::uint64_t tr_seed = 0;
  bool tr_simple = false;
  cmd_train->add_option("case", tr_case)->required();
  cmd_train->add_option("--inputs", tr_inputs, "feature variant A|B|C|D")
      ->check(CLI::IsMember({"A", "B", "C", "D"}));
  cmd_train->add_option("--iters", tr_iters, "active-sampling iterations");
  cmd_train->add_option("--per-iter", tr_per_iter, "samples per iteration");
  cmd_train->add_flag("--simple-sampling", tr_simple, "one-shot baseline sampling");
  cmd_train->add_option("--n", tr_n, "sample count for --simple-sampling");
  cmd_train->add_option("--seed", tr_seed);
  cmd_train->add_option("--trip-gen", tr_trip, "contingency generator id (-1 = largest)");
  cmd_train->add_option("--workers", tr_workers, "parallelism hint (results identical)");
  cmd_train->add_option("--hidden", tr_hidden, "hidden layer widths");
  cmd_train->add_option("--epochs", tr_epochs, "max training epochs");
  cmd_train->add_option("--out", tr_out, "weights file");
  cmd_train->add_option("--store", tr_store, "sample store CSV (default <out>.store.csv)");

  // ---- solve ------------------------------------------------------------
  auto* cmd_solve = app.add_subcommand("solve", "solve a dispatch problem");
  std::string so_case, so_mode = "acopf", so_weights, so_out = "dispatch.txt";
  double so_c = 0.0;
  std::uint64_t so_load_seed = 0;
  cmd_solve->add_option("case", so_case)->required();
  cmd_solve->add_option("--mode", so_mode, "acopf | tscopf | asopf")
      ->check(CLI::IsMember({"acopf", "tscopf", "asopf"}));
  cmd_solve->add_option("--weights", so_weights, "classifier weights file");
  cmd_solve->add_option("--c", so_c, "stability threshold");
  cmd_solve->add_option("--load-seed", so_load_seed,
                        "sample the load from this seed (0 = nominal load)");
  cmd_solve->add_option("--out", so_out, "dispatch file");

  // ---- simulate ---------------------------------------------------------
  auto* cmd_sim = app.add_subcommand("simulate", "simulate the study contingency");
  std::string si_case, si_dispatch, si_out = "trajectory.csv";
  int si_trip = -1;
  cmd_sim->add_option("case", si_case)->required();
  cmd_sim->add_option("--dispatch", si_dispatch, "dispatch file")->required();
  cmd_sim->add_option("--trip-gen", si_trip, "tripped generator id (-1 = largest)");
  cmd_sim->add_option("--out", si_out, "trajectory CSV");

  // ---- campaign ---------------------------------------------------------
  auto* cmd_camp = app.add_subcommand("campaign", "threshold sweep over random loads");
  std::string ca_case, ca_weights, ca_out = ".";
  std::vector<double> ca_grid = {0.0, 0.5, 0.9};
  int ca_n = 100, ca_trip = -1, ca_workers = 0;
  std::uint64_t ca_seed = 0;
  cmd_camp->add_option("case", ca_case)->required();
  cmd_camp->add_option("--weights", ca_weights)->required();
  cmd_camp->add_option("--c-grid", ca_grid, "threshold grid");
  cmd_camp->add_option("--n", ca_n, "number of load samples");
  cmd_camp->add_option("--seed", ca_seed);
  cmd_camp->add_option("--trip-gen", ca_trip, "contingency generator id (-1 = largest)");
  cmd_camp->add_option("--workers", ca_workers, "parallelism hint (results identical)");
  cmd_camp->add_option("--out", ca_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_case) {
      if (case_action == "show") {
        NetworkCase c;
        try {
          c = parse_case_lenient(read_file(case_path));
        } catch (const ParseError& e) {
          std::cerr << "parse error: " << e.what() << "\n";
          return kParse;
        }
        std::cout << serialize_case(c);
        return kOk;
      }
      load_case_or_exit(case_path);
      std::cout << "ok\n";
      return kOk;
    }

    if (*cmd_train) {
      auto c = load_case_or_exit(tr_case);
      if (tr_store.empty()) tr_store = tr_out + ".store.csv";
      Manifest man;
      man.command = "train";
      man.case_path = tr_case;
      man.seed = tr_seed;
      std::ostringstream cf;
      cf << tr_inputs << "|" << tr_iters << "|" << tr_per_iter << "|" << tr_simple << "|"
         << tr_n << "|" << tr_trip << "|" << tr_epochs;
      for (int h : tr_hidden) cf << "|" << h;
      man.config = cf.str();

      SamplerConfig cfg;
      cfg.samples_per_iteration = tr_per_iter;
      cfg.iterations = tr_iters;
      cfg.trip_gen_id = tr_trip;
      cfg.workers = tr_workers;
      cfg.seed = tr_seed;
      cfg.variant = feature_variant_from_string(tr_inputs);
      TrainConfig tc;
      tc.hidden = tr_hidden;
      tc.max_epochs = tr_epochs;
      tc.seed = tr_seed;
      LoadDistribution dist = LoadDistribution::scaled_to(c);

      SamplingResult res;
      try {
        res = tr_simple ? run_simple_sampling(c, tr_n > 0 ? tr_n : tr_iters * tr_per_iter,
                                              cfg, dist, tc)
                        : run_active_sampling(c, cfg, dist, tc);
      } catch (const SamplingError& e) {
        std::cerr << "sampling failed: " << e.what() << "\n";
        return kSampling;
      }
      write_file(tr_out, serialize_surrogate(res.model));
      write_file(tr_store, res.store.to_csv());
      man.outputs = {tr_out, tr_store};
      man.write(tr_out + ".manifest.json");
      std::cout << "samples " << res.store.rows.size() << " failed " << res.failed_samples
                << "\n";
      return kOk;
    }

    if (*cmd_solve) {
      auto c = load_case_or_exit(so_case);
      Eigen::VectorXd d = c.d_pu(), l = c.l_pu();
      if (so_load_seed != 0)
        sample_load(c, LoadDistribution::scaled_to(c), so_load_seed, d, l);
      Manifest man;
      man.command = "solve";
      man.case_path = so_case;
      man.seed = so_load_seed;
      man.config = so_mode + "|" + fmt17(so_c) + "|" + so_weights;

      SolveOptions opts;
      if (so_mode == "acopf") {
        auto s = solve_acopf(c, d, l, opts);
        if (s.status != SolveStatus::LocallySolved) return status_exit(s.status);
        write_file(so_out, serialize_dispatch(c, s));
        man.outputs = {so_out};
        man.write(so_out + ".manifest.json");
        std::cout << "objective " << fmt17(s.objective) << "\n";
        return kOk;
      }

      if (so_weights.empty()) {
        std::cerr << "--weights required for mode " << so_mode << "\n";
        return kParse;
      }
      auto sm = parse_surrogate(read_file(so_weights));
      if (so_mode == "tscopf") {
        auto sol = solve_tscopf(c, sm, so_c, d, l, opts);
        if (sol.dispatch.status != SolveStatus::LocallySolved)
          return status_exit(sol.dispatch.status);
        write_file(so_out, serialize_dispatch(c, sol.dispatch));
        auto prices = compute_prices(c, sm, sol);
        std::string price_path = so_out + ".prices.csv";
        write_file(price_path, prices_csv(c, prices));
        man.outputs = {so_out, price_path};
        man.write(so_out + ".manifest.json");
        std::cout << "objective " << fmt17(sol.dispatch.objective) << " gamma "
                  << fmt17(sol.gamma) << " f " << fmt17(sol.f_value) << "\n";
        return kOk;
      }
      // asopf: hunt the decision boundary at this load
      EmbeddedStabilityModel em(c, sm, EmbeddedStabilityModel::Mode::Boundary, 0.5, d, l);
      auto prob = em.problem();
      auto r = solve(prob, em.start_from(em.acopf().flat_start()), opts);
      if (r.status != SolveStatus::LocallySolved)
        r = solve(prob, em.start_from(random_start(em.acopf(), mix_seed(so_load_seed, 7, 2))),
                  opts);
      if (r.status != SolveStatus::LocallySolved) return status_exit(r.status);
      auto disp = em.interpret(r);
      write_file(so_out, serialize_dispatch(c, disp));
      man.outputs = {so_out};
      man.write(so_out + ".manifest.json");
      std::cout << "objective " << fmt17(disp.objective) << " f "
                << fmt17(em.classifier_value(r)) << "\n";
      return kOk;
    }

    if (*cmd_sim) {
      auto c = load_case_or_exit(si_case);
      auto disp = parse_dispatch(c, read_file(si_dispatch));
      int trip = si_trip;
      if (trip < 0) {
        int best = 0;
        for (int j = 1; j < c.m(); ++j)
          if (c.gens[j].gmax > c.gens[best].gmax) best = j;
        trip = c.gens[best].id;
      }
      DynamicInit init;
      try {
        init = initialize_steady_state(c, disp);
      } catch (const DynamicsInitError& e) {
        std::cerr << "dynamics initialization failed: " << e.what() << "\n";
        return kDynamicsInit;
      }
      SimConfig sim;
      sim.trip_gen_id = trip;
      auto traj = simulate_contingency(init, c, sim);
      auto label = classify_stability(traj, c.min_hz);
      write_file(si_out, trajectory_csv(c, traj));
      Manifest man;
      man.command = "simulate";
      man.case_path = si_case;
      man.config = si_dispatch + "|" + std::to_string(trip);
      man.outputs = {si_out};
      man.write(si_out + ".manifest.json");
      std::cout << "nadir " << fmt17(label.nadir_hz) << " label " << label.label << "\n";
      return kOk;
    }

    if (*cmd_camp) {
      auto c = load_case_or_exit(ca_case);
      auto sm = parse_surrogate(read_file(ca_weights));
      Manifest man;
      man.command = "campaign";
      man.case_path = ca_case;
      man.seed = ca_seed;
      std::ostringstream cf;
      cf << ca_weights << "|" << ca_n << "|" << ca_trip;
      for (double g : ca_grid) cf << "|" << fmt17(g);
      man.config = cf.str();

      auto rep = run_campaign(c, sm, ca_grid, ca_n, LoadDistribution::scaled_to(c), ca_seed,
                              ca_trip, SolveOptions{});
      std::string pi = ca_out + "/per_instance.csv";
      std::string su = ca_out + "/summary.csv";
      std::string pt = ca_out + "/price_trend.csv";
      write_file(pi, rep.per_instance_csv());
      write_file(su, rep.summary_csv());
      write_file(pt, rep.price_trend_csv());
      man.outputs = {pi, su, pt};
      man.write(ca_out + "/manifest.json");
      std::cout << rep.summary_csv();
      return kOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const SamplingError& e) {
    std::cerr << "sampling failed: " << e.what() << "\n";
    return kSampling;
  } catch (const DynamicsInitError& e) {
    std::cerr << "dynamics initialization failed: " << e.what() << "\n";
    return kDynamicsInit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
