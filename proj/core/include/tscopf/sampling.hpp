#pragma once

#include <cstdint>

#include "tscopf/dynamics.hpp"
#include "tscopf/stability.hpp"

namespace tscopf {

/// Raised when a sampling iteration loses more than half its samples to
/// solver failures.
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Total system load drawn from a shifted gamma distribution, then spread
/// over the nominal profile with per-load Gaussian noise.
struct LoadDistribution {
  double shape = 3.0;
  double scale_mw = 40.0;
  double shift_mw = 909.0;
  double std_fraction = 0.20;
  bool scale_reactive = true;

  /// Re-expresses the defaults for a given case: shift = 80% of nominal
  /// total load, scale preserved as the same fraction of total as the
  /// reference parameters imply (40 / 1136.25).
  static LoadDistribution scaled_to(const NetworkCase& c);
};

void sample_load(const NetworkCase& c, const LoadDistribution& dist, std::uint64_t seed,
                 Eigen::VectorXd& d_pu, Eigen::VectorXd& l_pu);

/// Random primal start: g, r uniform in bounds, V uniform in voltage band,
/// angles zero, reserve at mid-range.
Eigen::VectorXd random_start(const AcopfModel& model, std::uint64_t seed);

/// The boundary-seeking problem: minimize (f - 0.5)^2 over the AC-OPF
/// feasible set.
NlpProblem build_asopf(const NetworkCase& c, const SurrogateModel& surrogate,
                       const Eigen::VectorXd& d_pu, const Eigen::VectorXd& l_pu);

struct SamplerConfig {
  int samples_per_iteration = 500;
  int iterations = 30;
  int trip_gen_id = -1;  // defaults to the largest unit when < 0
  int workers = 1;
  std::uint64_t seed = 0;
  FeatureVariant variant = FeatureVariant::B;
  SolveOptions solver;
};

struct StoredSample {
  int iteration = 0;
  long sample_id = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd features;  // raw (unnormalized)
  int label = 0;
  double nadir_hz = 0.0;
  std::string solver_status;
};

struct SampleStore {
  FeatureVariant variant = FeatureVariant::B;
  std::vector<StoredSample> rows;

  std::string to_csv() const;
  static SampleStore from_csv(const std::string& text);
};

struct SamplingResult {
  SurrogateModel model;
  SampleStore store;
  int failed_samples = 0;
  /// mean |f - 0.5| of the final classifier over each iteration's samples
  std::vector<double> boundary_distance;
};

SamplingResult run_active_sampling(const NetworkCase& c, const SamplerConfig& cfg,
                                   const LoadDistribution& dist, const TrainConfig& train_cfg);

/// Baseline: n AC-OPF solves at random loads, one training pass.
SamplingResult run_simple_sampling(const NetworkCase& c, int n, const SamplerConfig& cfg,
                                   const LoadDistribution& dist, const TrainConfig& train_cfg);

}  // namespace tscopf
