#pragma once

#include "tscopf/acopf.hpp"
#include "tscopf/network.hpp"

namespace tscopf {

/// Thrown when a dispatch handed to the simulator is not an AC-consistent
/// operating point (power-flow residual too large to equilibrate).
class DynamicsInitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MachineState {
  double delta = 0.0;   // rotor angle, rad
  double domega = 0.0;  // speed deviation, pu
  double pm = 0.0;      // mechanical power, pu (hard-limited to [0, gmax])
  double valve = 0.0;   // governor reference, pu
};

/// Equilibrium snapshot: classical machines behind transient reactances,
/// loads frozen as constant admittances at the dispatch voltages.
struct DynamicInit {
  std::vector<MachineState> mach;   // per generator
  Eigen::VectorXd emf_mag;          // internal EMF magnitudes, pu
  Eigen::VectorXd xd_prime;         // per-machine transient reactance, pu
  Eigen::VectorXcd load_admittance; // per bus
  double max_derivative = 0.0;      // RHS max-norm at t=0 (equilibrium check)
};

struct SimConfig {
  double step_s = 0.01;
  double horizon_s = 60.0;
  double trip_time_s = 1.0;
  int trip_gen_id = -1;  // generator to disconnect; -1 = no contingency
  bool early_stop = true;
  bool governors_enabled = true;
};

struct Trajectory {
  Eigen::VectorXd time_s;
  Eigen::MatrixXd freq_hz;  // samples x buses
  Eigen::MatrixXd domega;   // samples x machines (tripped column frozen)
  Eigen::MatrixXd pm;       // samples x machines
  Eigen::MatrixXd pe;       // samples x machines, electrical power
  std::string termination;  // horizon | frequency-threshold | frequency-rising | numerical collapse
  double nadir_hz = 0.0;    // min over buses and time
};

struct StabilityLabel {
  int label = 0;  // 1 = stable
  double nadir_hz = 0.0;
};

/// Per-machine transient reactance. The case schema carries no machine
/// impedance, so it is derived from unit size: x' = 0.25 / max(gmax_pu, 0.05),
/// i.e. 0.25 pu on the machine base mapped to the system base.
double transient_reactance(const Generator& g, double base_mva);

DynamicInit initialize_steady_state(const NetworkCase& c, const DispatchSolution& dispatch);

Trajectory simulate_contingency(const DynamicInit& init, const NetworkCase& c,
                                const SimConfig& cfg);

StabilityLabel classify_stability(const Trajectory& traj, double min_hz);

/// CSV: header then one row per sample with time, per-bus frequency, and
/// per-machine pm / speed deviation columns.
std::string trajectory_csv(const NetworkCase& c, const Trajectory& traj);

}  // namespace tscopf
