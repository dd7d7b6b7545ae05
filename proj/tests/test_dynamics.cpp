#include <doctest.h>

#include <cmath>

#include "tscopf/dynamics.hpp"
#include "tscopf/textio.hpp"

using namespace tscopf;

namespace {
const std::string kFixtures = TSCOPF_FIXTURE_DIR;

DispatchSolution solved(const NetworkCase& c) {
  auto s = solve_acopf(c, SolveOptions{});
  REQUIRE(s.status == SolveStatus::LocallySolved);
  return s;
}

int time_index(const Trajectory& t, double when) {
  for (int i = 0; i < t.time_s.size(); ++i)
    if (std::abs(t.time_s(i) - when) < 1e-9) return i;
  REQUIRE(false);
  return -1;
}
}  // namespace

TEST_CASE("transient reactance scales inversely with unit size") {
  Generator g;
  g.gmax = 87.2;
  CHECK(transient_reactance(g, 100.0) == doctest::Approx(0.25 / 0.872).epsilon(1e-12));
  g.gmax = 1.0;  // tiny unit hits the floor
  CHECK(transient_reactance(g, 100.0) == doctest::Approx(0.25 / 0.05).epsilon(1e-12));
}

TEST_CASE("solved dispatch initializes at equilibrium") {
  auto c = load_case_file(kFixtures + "/case9.case");
  auto init = initialize_steady_state(c, solved(c));
  CHECK(init.max_derivative <= 1e-8);
  for (int j = 0; j < c.m(); ++j) CHECK(init.mach[j].domega == 0.0);
}

TEST_CASE("non-solution dispatch is rejected") {
  auto c = load_case_file(kFixtures + "/case9.case");
  DispatchSolution flat;
  flat.g = Eigen::VectorXd::Zero(c.m());
  flat.r = Eigen::VectorXd::Zero(c.m());
  flat.vm = Eigen::VectorXd::Ones(c.n());
  flat.va = Eigen::VectorXd::Zero(c.n());
  CHECK_THROWS_AS(initialize_steady_state(c, flat), DynamicsInitError);
}

TEST_CASE("no contingency holds frequency flat") {
  auto c = load_case_file(kFixtures + "/case9.case");
  auto init = initialize_steady_state(c, solved(c));
  SimConfig cfg;
  cfg.horizon_s = 10.0;
  cfg.trip_gen_id = -1;
  auto traj = simulate_contingency(init, c, cfg);
  CHECK((traj.freq_hz.array() - 60.0).abs().maxCoeff() <= 1e-3);
  CHECK(traj.freq_hz.row(0).minCoeff() == doctest::Approx(60.0).epsilon(1e-9));
}

TEST_CASE("initial rate of change of frequency follows the swing equation") {
  auto c = load_case_file(kFixtures + "/smib.case");
  // keep the surviving machine stiff and the load purely real so the lost
  // injection maps one-to-one into accelerating power
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
  double dp = s.g(c.gen_index(2));
  double h_sys = c.gens[c.gen_index(1)].inertia_s;
  double expected = -dp * 60.0 / (2.0 * h_sys);
  int i0 = time_index(traj, 1.0);
  int bus1 = c.bus_index(1);
  double rocof = (traj.freq_hz(i0 + 1, bus1) - traj.freq_hz(i0, bus1)) / cfg.step_s;
  CHECK(std::abs(rocof - expected) / std::abs(expected) <= 0.01);
}

TEST_CASE("tripping an idle generator is a null contingency") {
  auto c = load_case_file(kFixtures + "/smib.case");
  c.gens[c.gen_index(2)].c1 = 50.0;  // price it out of the dispatch
  c.finalize();
  auto s = solved(c);
  CHECK(s.g(c.gen_index(2)) <= 1e-5);
  auto init = initialize_steady_state(c, s);
  SimConfig cfg;
  cfg.trip_gen_id = 2;
  cfg.horizon_s = 10.0;
  auto traj = simulate_contingency(init, c, cfg);
  auto label = classify_stability(traj, c.min_hz);
  CHECK(label.label == 1);
  CHECK(label.nadir_hz == doctest::Approx(60.0).epsilon(1e-4));
}

TEST_CASE("governor output is hard-limited to capacity") {
  auto c = load_case_file(kFixtures + "/smib.case");
  c.gens[c.gen_index(1)].gmax = 140.0;  // too little headroom to cover the trip
  c.finalize();
  auto s = solved(c);
  auto init = initialize_steady_state(c, s);
  SimConfig cfg;
  cfg.trip_gen_id = 2;
  cfg.early_stop = false;
  cfg.horizon_s = 20.0;
  auto traj = simulate_contingency(init, c, cfg);
  int j1 = c.gen_index(1);
  double top = traj.pm.col(j1).maxCoeff();
  CHECK(top <= 1.4);           // never exceeds capacity, exactly
  CHECK(top == doctest::Approx(1.4));  // and the limit actually binds here
  CHECK(classify_stability(traj, c.min_hz).label == 0);
}

TEST_CASE("halving the step barely moves the nadir") {
  auto c = load_case_file(kFixtures + "/smib.case");
  auto init = initialize_steady_state(c, solved(c));
  SimConfig cfg;
  cfg.trip_gen_id = 2;
  cfg.early_stop = false;
  cfg.horizon_s = 10.0;
  auto t1 = simulate_contingency(init, c, cfg);
  cfg.step_s = 0.005;
  auto t2 = simulate_contingency(init, c, cfg);
  CHECK(std::abs(t1.nadir_hz - t2.nadir_hz) <= 1e-3);
}

TEST_CASE("early stop never changes the label") {
  for (const char* name : {"smib.case", "case9.case"}) {
    auto c = load_case_file(kFixtures + std::string("/") + name);
    auto init = initialize_steady_state(c, solved(c));
    SimConfig cfg;
    cfg.trip_gen_id = c.gens[0].id;
    cfg.horizon_s = 30.0;
    cfg.early_stop = true;
    auto quick = simulate_contingency(init, c, cfg);
    cfg.early_stop = false;
    auto full = simulate_contingency(init, c, cfg);
    CHECK(classify_stability(quick, c.min_hz).label ==
          classify_stability(full, c.min_hz).label);
    CHECK(quick.time_s.size() <= full.time_s.size());
  }
}

TEST_CASE("kinetic energy change matches the work integral") {
  auto c = load_case_file(kFixtures + "/smib.case");
  for (auto& g : c.gens) g.damping = 0.0;
  c.finalize();
  auto init = initialize_steady_state(c, solved(c));
  SimConfig cfg;
  cfg.trip_gen_id = 2;
  cfg.governors_enabled = false;
  cfg.early_stop = false;
  cfg.horizon_s = 3.0;
  auto traj = simulate_contingency(init, c, cfg);
  int i0 = time_index(traj, 1.0);
  int j1 = c.gen_index(1);
  double h1 = c.gens[j1].inertia_s;
  for (int s = i0; s + 1 < traj.time_s.size(); ++s) {
    double ke0 = h1 * traj.domega(s, j1) * traj.domega(s, j1);
    double ke1 = h1 * traj.domega(s + 1, j1) * traj.domega(s + 1, j1);
    double p0 = traj.domega(s, j1) * (traj.pm(s, j1) - traj.pe(s, j1));
    double p1 = traj.domega(s + 1, j1) * (traj.pm(s + 1, j1) - traj.pe(s + 1, j1));
    double work = 0.5 * (p0 + p1) * cfg.step_s;
    double scale = std::max({std::abs(ke1 - ke0), std::abs(work), 1e-9});
    CHECK(std::abs((ke1 - ke0) - work) / scale <= 1e-3);
  }
}

TEST_CASE("more output on the tripped unit never raises the nadir") {
  double prev = 61.0;
  for (double cap : {20.0, 40.0, 60.0, 80.0}) {
    auto c = load_case_file(kFixtures + "/smib.case");
    c.gens[c.gen_index(2)].gmax = cap;  // cheap unit dispatches at its cap
    c.finalize();
    auto s = solved(c);
    CHECK(s.g(c.gen_index(2)) == doctest::Approx(cap / 100.0).epsilon(1e-3));
    auto init = initialize_steady_state(c, s);
    SimConfig cfg;
    cfg.trip_gen_id = 2;
    cfg.early_stop = false;
    cfg.horizon_s = 15.0;
    auto traj = simulate_contingency(init, c, cfg);
    CHECK(traj.nadir_hz <= prev + 1e-9);
    prev = traj.nadir_hz;
  }
}

TEST_CASE("classification convention at the threshold") {
  Trajectory t;
  t.time_s = Eigen::VectorXd::LinSpaced(3, 0.0, 0.02);
  t.freq_hz.resize(3, 1);
  t.termination = "horizon";
  t.freq_hz << 60.0, 59.1, 59.5;
  CHECK(classify_stability(t, 58.5).label == 1);
  t.freq_hz << 60.0, 58.2, 59.0;
  CHECK(classify_stability(t, 58.5).label == 0);
  t.freq_hz << 60.0, 58.5, 59.0;  // exactly at the limit counts as stable
  auto lab = classify_stability(t, 58.5);
  CHECK(lab.label == 1);
  CHECK(lab.nadir_hz == 58.5);
}

TEST_CASE("trajectory CSV shape") {
  auto c = load_case_file(kFixtures + "/smib.case");
  auto init = initialize_steady_state(c, solved(c));
  SimConfig cfg;
  cfg.trip_gen_id = 2;
  cfg.horizon_s = 2.0;
  auto traj = simulate_contingency(init, c, cfg);
  std::string csv = trajectory_csv(c, traj);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "time_s,freq_hz_bus1,freq_hz_bus2,pm_gen1,pm_gen2,domega_gen1,domega_gen2");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == traj.time_s.size());
}
