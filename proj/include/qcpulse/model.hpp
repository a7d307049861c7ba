#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace qcp {

// Energy landscape objective: 1 - <psi0| X_T^dag Hbar X_T |psi0> / e_min,
// normalized so the reachable range is [0,1] when e_min is the ground energy.
struct EnergySpec {
  Eigen::MatrixXcd hbar;
  Eigen::VectorXcd psi0;
  double e_min = 0.0;
};

// Gate synthesis objective: 1 - |tr(target^dag X_T)| / norm_dim.
struct InfidelitySpec {
  Eigen::MatrixXcd target;
  double norm_dim = 0.0;
  // Set when the target is unitary and norm_dim equals the space dimension;
  // in that case the objective provably lies in [0,1] and debug builds
  // assert it on every evaluation.
  bool unit_range = false;
};

using ObjectiveSpec = std::variant<EnergySpec, InfidelitySpec>;

// Suggested experiment parameters carried alongside each instance so the
// pipeline can fill in anything the config leaves unspecified.
struct InstanceDefaults {
  double t_f = 1.0;
  int n_steps = 1;
  double alpha = 0.0;
  int t_minup = 1;
  int s_max = 0;
  double rho = 1.0;
};

struct QuantumInstance {
  std::string name;
  int dim = 0;
  Eigen::MatrixXcd h_drift;               // zero matrix when absent
  std::vector<Eigen::MatrixXcd> h_controls;
  Eigen::MatrixXcd x_init;
  ObjectiveSpec objective;
  InstanceDefaults defaults;

  int n_controllers() const { return static_cast<int>(h_controls.size()); }
};

}  // namespace qcp
