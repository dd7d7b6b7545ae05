#include <benchmark/benchmark.h>

#include "tscopf/market.hpp"

using namespace tscopf;

namespace {

const std::string kFixtures = TSCOPF_FIXTURE_DIR;

NetworkCase case9() {
  static NetworkCase c = load_case_file(kFixtures + "/case9.case");
  return c;
}

SurrogateModel bench_model() {
  // small trained-shape classifier with deterministic pseudo-random weights,
  // enough to exercise the embedded constraint machinery
  auto c = case9();
  SurrogateModel sm;
  sm.spec = FeatureSpec::for_case(c, FeatureVariant::B);
  int dim = sm.spec.dim();
  sm.spec.mean = Eigen::VectorXd::Zero(dim);
  sm.spec.stdev = Eigen::VectorXd::Ones(dim);
  std::vector<int> widths = {16, 16, 1};
  int prev = dim;
  std::uint64_t s = 0x9e3779b97f4a7c15ull;
  auto next = [&s]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s % 20001) / 10000.0 - 1.0;
  };
  for (size_t k = 0; k < widths.size(); ++k) {
    Eigen::MatrixXd W(widths[k], prev);
    Eigen::VectorXd b(widths[k]);
    for (int i = 0; i < W.rows(); ++i) {
      for (int j = 0; j < W.cols(); ++j) W(i, j) = 0.3 * next();
      b(i) = 0.1 * next();
    }
    sm.params.W.push_back(W);
    sm.params.b.push_back(b);
    sm.params.act.push_back(k + 1 == widths.size() ? Activation::Sigmoid
                            : (k % 2 ? Activation::Softplus : Activation::Tanh));
    prev = widths[k];
  }
  return sm;
}

void BM_AcopfSolve(benchmark::State& state) {
  auto c = case9();
  for (auto _ : state) {
    auto r = solve_acopf(c, SolveOptions{});
    benchmark::DoNotOptimize(r.objective);
  }
}
BENCHMARK(BM_AcopfSolve)->Unit(benchmark::kMillisecond);

void BM_TscopfSolve(benchmark::State& state) {
  auto c = case9();
  auto sm = bench_model();
  for (auto _ : state) {
    auto r = solve_tscopf(c, sm, 0.5, c.d_pu(), c.l_pu(), SolveOptions{});
    benchmark::DoNotOptimize(r.f_value);
  }
}
BENCHMARK(BM_TscopfSolve)->Unit(benchmark::kMillisecond);

void BM_SimulateContingency(benchmark::State& state) {
  auto c = case9();
  auto s = solve_acopf(c, SolveOptions{});
  auto init = initialize_steady_state(c, s);
  SimConfig cfg;
  cfg.trip_gen_id = 1;
  for (auto _ : state) {
    auto traj = simulate_contingency(init, c, cfg);
    benchmark::DoNotOptimize(traj.nadir_hz);
  }
}
BENCHMARK(BM_SimulateContingency)->Unit(benchmark::kMillisecond);

void BM_InputGradient(benchmark::State& state) {
  auto sm = bench_model();
  Eigen::VectorXd x = Eigen::VectorXd::Constant(sm.spec.dim(), 0.3);
  for (auto _ : state) {
    auto g = input_gradient(sm.params, x);
    benchmark::DoNotOptimize(g.sum());
  }
}
BENCHMARK(BM_InputGradient);

}  // namespace

BENCHMARK_MAIN();
