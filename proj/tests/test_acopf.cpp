#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "tscopf/acopf.hpp"
#include "tscopf/textio.hpp"

using namespace tscopf;

namespace {
const std::string kFixtures = TSCOPF_FIXTURE_DIR;

NetworkCase load(const std::string& name) {
  return load_case_file(kFixtures + "/" + name);
}

// Interior point with a deterministic wiggle so derivative checks see the
// full nonlinearity (flat start has many zero angles).
Eigen::VectorXd wiggled_start(const AcopfModel& model, unsigned seed) {
  Eigen::VectorXd x = model.flat_start();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  for (int i = 0; i < x.size(); ++i) x(i) += u(rng);
  return x;
}

void check_jacobian_fd(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                       const Eigen::MatrixXd& J, const Eigen::VectorXd& x0) {
  const double h = 1e-6;
  for (int j = 0; j < x0.size(); ++j) {
    Eigen::VectorXd xp = x0, xm = x0;
    xp(j) += h;
    xm(j) -= h;
    Eigen::VectorXd col = (f(xp) - f(xm)) / (2 * h);
    for (int i = 0; i < col.size(); ++i) {
      double denom = 1.0 + std::abs(J(i, j));
      CHECK(std::abs(col(i) - J(i, j)) / denom <= 1e-5);
    }
  }
}
}  // namespace

TEST_CASE("headroom cap formula") {
  Generator g;
  g.gmax = 87.2;
  g.droop = 0.05;
  CHECK(max_reserve(g, 60.0, 58.5) == doctest::Approx(43.6).epsilon(1e-12));
}

TEST_CASE("variable layout of the 2-bus case with reserve") {
  auto c = load("case2.case");
  AcopfModel model(c, ReserveModel::from_case(c, ReserveMode::RelaxedInequalities), c.d_pu(),
                   c.l_pu());
  const auto& lay = model.layout();
  CHECK(lay.num_vars == 6);  // g, r, h, V1, V2, theta2
  CHECK(lay.num_eq == 4);
  CHECK(lay.num_ineq == 4);  // two branch ends + two reserve rows
  CHECK(lay.theta_var(lay.ref_bus) == -1);
}

TEST_CASE("equality Jacobian matches finite differences") {
  auto c = load("case9.case");
  AcopfModel model(c, ReserveModel::from_case(c, ReserveMode::RelaxedInequalities), c.d_pu(),
                   c.l_pu());
  Eigen::VectorXd x0 = wiggled_start(model, 11);
  check_jacobian_fd([&](const Eigen::VectorXd& x) { return model.eq(x); },
                    model.eq_jacobian(x0), x0);
}

TEST_CASE("inequality Jacobian matches finite differences") {
  auto c = load("case9.case");
  AcopfModel model(c, ReserveModel::from_case(c, ReserveMode::RelaxedInequalities), c.d_pu(),
                   c.l_pu());
  Eigen::VectorXd x0 = wiggled_start(model, 12);
  check_jacobian_fd([&](const Eigen::VectorXd& x) { return model.ineq(x); },
                    model.ineq_jacobian(x0), x0);
}

TEST_CASE("Lagrangian Hessian matches finite differences of the gradient") {
  auto c = load("case9.case");
  AcopfModel model(c, ReserveModel::from_case(c, ReserveMode::RelaxedInequalities), c.d_pu(),
                   c.l_pu());
  const auto& lay = model.layout();
  Eigen::VectorXd x0 = wiggled_start(model, 13);
  std::mt19937 rng(14);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd y(lay.num_eq), z(lay.num_ineq);
  for (int i = 0; i < y.size(); ++i) y(i) = u(rng);
  for (int i = 0; i < z.size(); ++i) z(i) = u(rng);

  auto grad_lagrangian = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return model.cost_gradient(x) + model.eq_jacobian(x).transpose() * y -
           model.ineq_jacobian(x).transpose() * z;
  };
  Eigen::MatrixXd H = model.lagrangian_hessian(x0, y, z, true);
  CHECK((H - H.transpose()).norm() <= 1e-12);
  check_jacobian_fd(grad_lagrangian, H, x0);
}

TEST_CASE("lossless uncongested dispatch prices at marginal cost") {
  auto c = load("case2.case");
  auto s = solve_acopf(c, SolveOptions{});
  REQUIRE(s.status == SolveStatus::LocallySolved);
  // one generator at $10/MWh serving 80 MW over a lossless line
  CHECK(s.g(0) == doctest::Approx(0.8).epsilon(1e-5));
  CHECK(s.objective == doctest::Approx(800.0).epsilon(1e-5));
  // balance dual in $/pu-h is marginal cost times the MVA base, equal at
  // every bus when nothing is lossy or congested
  CHECK(s.lambda(0) == doctest::Approx(1000.0).epsilon(1e-4));
  CHECK(s.lambda(1) == doctest::Approx(1000.0).epsilon(1e-4));
  auto res = power_flow_residual(c, s);
  CHECK(res.max_norm <= 1e-6);
}

TEST_CASE("flat voltage profile leaves the full load as balance residual") {
  auto c = load("case2.case");
  DispatchSolution pt;
  pt.g = Eigen::VectorXd::Zero(c.m());
  pt.r = Eigen::VectorXd::Zero(c.m());
  pt.vm = Eigen::VectorXd::Ones(c.n());
  pt.va = Eigen::VectorXd::Zero(c.n());
  auto res = power_flow_residual(c, pt);
  CHECK((res.real_residual - c.d_pu()).lpNorm<Eigen::Infinity>() <= 1e-12);
  CHECK((res.reactive_residual - c.l_pu()).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("undeliverable load is locally infeasible") {
  auto c = load("case2.case");
  Eigen::VectorXd d = c.d_pu(), l = c.l_pu();
  d(c.bus_index(2)) = 2.0;  // 200 MW against a 150 MW fleet
  auto s = solve_acopf(c, d, l, SolveOptions{});
  CHECK(s.status == SolveStatus::LocallyInfeasible);
}

TEST_CASE("reserve rows leave the energy solution unchanged") {
  auto c = load("case2.case");
  auto base = solve_acopf(c, SolveOptions{}, ReserveMode::Absent);
  auto with = solve_acopf(c, SolveOptions{}, ReserveMode::RelaxedInequalities);
  REQUIRE(base.status == SolveStatus::LocallySolved);
  REQUIRE(with.status == SolveStatus::LocallySolved);
  CHECK(with.g(0) == doctest::Approx(base.g(0)).epsilon(1e-5));
  CHECK(with.lambda(1) == doctest::Approx(base.lambda(1)).epsilon(1e-4));
  REQUIRE(with.h.size() == 1);
  double cap = ReserveModel::from_case(c, ReserveMode::RelaxedInequalities).h_max_pu(0);
  CHECK(with.h(0) >= -1e-8);
  CHECK(with.h(0) <= cap + 1e-8);
  CHECK(with.h(0) <= c.gmax_pu()(0) - with.g(0) + 1e-6);
}

TEST_CASE("nine-bus dispatch solves and respects limits") {
  auto c = load("case9.case");
  auto s = solve_acopf(c, SolveOptions{});
  REQUIRE(s.status == SolveStatus::LocallySolved);
  auto res = power_flow_residual(c, s);
  CHECK(res.max_norm <= 1e-6);
  for (int j = 0; j < c.m(); ++j) {
    CHECK(s.g(j) >= c.gmin_pu()(j) - 1e-8);
    CHECK(s.g(j) <= c.gmax_pu()(j) + 1e-8);
  }
  // generation covers load plus (small, nonnegative) losses
  double losses = s.g.sum() - c.d_pu().sum();
  CHECK(losses >= -1e-8);
  CHECK(losses <= 0.1 * c.d_pu().sum());
}

TEST_CASE("dispatch text round trip") {
  auto c = load("case2.case");
  auto s = solve_acopf(c, SolveOptions{}, ReserveMode::RelaxedInequalities);
  REQUIRE(s.status == SolveStatus::LocallySolved);
  std::string t1 = serialize_dispatch(c, s);
  auto s2 = parse_dispatch(c, t1);
  CHECK(serialize_dispatch(c, s2) == t1);
  CHECK(s2.g(0) == s.g(0));
  CHECK(s2.h(0) == s.h(0));
  CHECK(s2.lambda(1) == s.lambda(1));
}
