#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <string>
#include <vector>

namespace tscopf {

struct Bus {
  int id = 0;
  double vmin = 0.9;
  double vmax = 1.1;
  int zone = 1;
};

struct Branch {
  int from = 0;
  int to = 0;
  double r = 0.0;     // series resistance, pu
  double x = 0.0;     // series reactance, pu
  double b = 0.0;     // total line charging, pu
  double smax = 0.0;  // apparent-power limit, pu
  double tap = 1.0;
  double shift = 0.0;  // radians
};

struct Generator {
  int id = 0;
  int bus = 0;
  double gmin = 0.0, gmax = 0.0;  // MW
  double rmin = 0.0, rmax = 0.0;  // MVAr
  double c2 = 0.0, c1 = 0.0, c0 = 0.0;  // $/MW^2 h, $/MWh, $/h
  double droop = 0.05;                  // pu frequency per pu power
  double inertia_s = 4.0;               // H, seconds on system base
  double damping = 0.0;                 // pu
  double tgov_s = 0.5;                  // governor time constant
};

struct LoadPoint {
  int bus = 0;
  double d_mw = 0.0;
  double l_mvar = 0.0;
};

/// Immutable static grid model. Raw fields keep file units (MW at the I/O
/// edge); all *_pu accessors are on the system MVA base.
struct NetworkCase {
  double base_mva = 100.0;
  double nominal_hz = 60.0;
  double min_hz = 58.5;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> gens;
  std::vector<LoadPoint> loads;

  int n() const { return static_cast<int>(buses.size()); }
  int m() const { return static_cast<int>(gens.size()); }
  int num_zones() const { return static_cast<int>(zone_ids_.size()); }

  int bus_index(int id) const;   // throws SemanticError on unknown id
  int gen_index(int id) const;
  int zone_index(int zone_id) const;

  /// Generator-to-bus incidence, n x m 0/1.
  const Eigen::MatrixXd& M() const { return M_; }
  /// Zone incidence, z x m 0/1.
  const Eigen::MatrixXd& Z() const { return Z_; }

  Eigen::VectorXd d_pu() const;  // per-bus real load
  Eigen::VectorXd l_pu() const;  // per-bus reactive load

  Eigen::VectorXd gmin_pu() const;
  Eigen::VectorXd gmax_pu() const;
  Eigen::VectorXd rmin_pu() const;
  Eigen::VectorXd rmax_pu() const;
  // Cost in $/h of a pu dispatch vector.
  double cost(const Eigen::VectorXd& g_pu) const;
  Eigen::VectorXd cost_gradient(const Eigen::VectorXd& g_pu) const;
  Eigen::VectorXd cost_hessian_diag() const;

  /// Rebuilds index maps and incidence matrices; called by the parser and by
  /// any code that constructs a case programmatically.
  void finalize();

 private:
  std::map<int, int> bus_idx_, gen_idx_;
  std::vector<int> zone_ids_;
  std::map<int, int> zone_idx_;
  Eigen::MatrixXd M_, Z_;
};

NetworkCase parse_case(const std::string& text);
/// Parses without enforcing invariants (used by `case validate`); still
/// requires syntactic well-formedness and resolvable bus references.
NetworkCase parse_case_lenient(const std::string& text);

/// Canonical serialization: fixed section and field order, 17-significant-digit
/// floats. parse(serialize(parse(t))) round-trips bit-exactly.
std::string serialize_case(const NetworkCase& c);

/// Human-readable invariant violations; empty iff the case is valid.
std::vector<std::string> validate_case(const NetworkCase& c);

/// Bus admittance matrix from branch data (taps, shifts, line charging).
/// Throws SemanticError on a zero-reactance branch.
Eigen::MatrixXcd admittance_matrix(const NetworkCase& c);

NetworkCase load_case_file(const std::string& path);

}  // namespace tscopf
