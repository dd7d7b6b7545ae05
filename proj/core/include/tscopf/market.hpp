#pragma once

#include "tscopf/sampling.hpp"
#include "tscopf/stability.hpp"

namespace tscopf {

NlpProblem build_tscopf(const NetworkCase& c, const SurrogateModel& surrogate, double threshold,
                        const Eigen::VectorXd& d_pu, const Eigen::VectorXd& l_pu);

struct TscSolution {
  DispatchSolution dispatch;
  double gamma = 0.0;    // dual of the stability constraint, f-space, $/pu-h
  double f_value = 0.0;  // classifier output at the solution
};

/// Solves the stability-constrained dispatch; threshold 0 degenerates to the
/// plain AC-OPF feasible set (the constraint is never binding).
TscSolution solve_tscopf(const NetworkCase& c, const SurrogateModel& surrogate,
                         double threshold, const Eigen::VectorXd& d_pu,
                         const Eigen::VectorXd& l_pu, const SolveOptions& opts);

struct PriceSet {
  Eigen::VectorXd pi;      // per generator, $/pu-h real energy
  Eigen::VectorXd sigma;   // per generator, $/pu-h reactive
  Eigen::VectorXd alpha;   // per generator, $/pu-h reserve
  Eigen::VectorXd lambda;  // per bus
  Eigen::VectorXd mu;      // per bus
  double gamma = 0.0;
  Eigen::VectorXd df_dg, df_dr, df_dzh;  // classifier sensitivities at the KKT point
  bool uniform = false;  // co-located generators share pi and sigma
};

PriceSet compute_prices(const NetworkCase& c, const SurrogateModel& surrogate,
                        const TscSolution& sol);

struct IncentiveReport {
  struct Row {
    int gen_id = 0;
    double dispatch_profit = 0.0;
    double grid_max_profit = 0.0;
    bool conclusive = true;  // false when alpha_j < 0 (hypothesis unmet)
    bool pass = false;
  };
  std::vector<Row> rows;
  bool all_pass = true;  // over conclusive rows
};

/// Brute-force profit maximization per generator over a 200x200 (g, r) grid
/// with reserve at h = min(h_max, gmax - g).
IncentiveReport check_incentive_alignment(const NetworkCase& c, const TscSolution& sol,
                                          const PriceSet& prices);

struct CampaignRecord {
  long load_id = 0;
  double threshold = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;  // $
  int stable = 0;
  double nadir_hz = 0.0;
  double gamma = 0.0;
  double mean_price = 0.0, min_price = 0.0, max_price = 0.0;  // pi over generators, $/MWh
  double alpha_zone1 = 0.0;                                   // $/MWh
};

struct CampaignReport {
  std::vector<double> thresholds;
  int num_loads = 0;
  std::vector<CampaignRecord> rows;  // sorted by (load_id, threshold)

  std::string per_instance_csv() const;
  /// One row per threshold: c, frac_unstable, frac_infeasible, mean_cost,
  /// mean_gamma. Infeasible instances are excluded from the unstable and
  /// cost aggregates.
  std::string summary_csv() const;
  /// Rows for the top 7% of solved instances by gamma.
  std::string price_trend_csv() const;

  double unstable_fraction(double threshold) const;
  double infeasible_fraction(double threshold) const;
  double mean_cost(double threshold) const;
};

CampaignReport run_campaign(const NetworkCase& c, const SurrogateModel& surrogate,
                            const std::vector<double>& thresholds, int num_loads,
                            const LoadDistribution& dist, std::uint64_t seed, int trip_gen_id,
                            const SolveOptions& opts);

}  // namespace tscopf
