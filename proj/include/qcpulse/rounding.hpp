#pragma once

#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qcpulse/control.hpp"
#include "qcpulse/status.hpp"

namespace qcp {

struct Unconstrained {};

// At most one switch per controller inside any window of t_minup consecutive
// step transitions.
struct MinUpTime {
  int t_minup = 1;
};

// At most s_max switches per controller over the whole horizon.
struct MaxSwitching {
  int s_max = 0;
};

using RoundingConstraint = std::variant<Unconstrained, MinUpTime, MaxSwitching>;

// Number of transitions k with u_jk != u_j,k+1 for controller j (0-based row).
int switch_count(const ControlSequence& u, int controller);

// Literal transcription of the switching constraint on a binary sequence.
bool satisfies_constraint(const ControlSequence& u, const RoundingConstraint& constraint);

// Sum-up rounding: step by step, activate the controller with the largest
// accumulated continuous-minus-binary integral; ties pick the smallest index.
ControlSequence sum_up_rounding(const ControlSequence& u_c);

// max_k | sum_{tau<=k} (sum_j u_jtau - 1) dt |, the accumulated one-hot drift.
double sos1_drift_epsilon(const ControlSequence& u_c);

// max_{j,k} | sum_{tau<=k} (u_c - u_b) dt |.
double max_integral_deviation(const ControlSequence& u_c, const ControlSequence& u_b);

struct BoundCertificate {
  double epsilon = 0.0;
  double max_deviation = 0.0;
  // (N-1) dt + (2N-1)/N * epsilon: guaranteed ceiling for the sum-up-rounding
  // deviation.
  double sur_deviation_bound = 0.0;
  // sqrt(t_f * sos1_penalty * dt): guaranteed ceiling for epsilon.
  double epsilon_bound = 0.0;
  double sos1_penalty_value = 0.0;
};

BoundCertificate bound_certificate(const ControlSequence& u_c, const ControlSequence& u_b);

struct CiaResult {
  ControlSequence controls;
  double objective = 0.0;  // max integral deviation of the returned sequence
  long long nodes = 0;
  SolveStatus status = SolveStatus::kConverged;
};

// Minimizes the max integral deviation over one-hot binary sequences subject
// to the switching constraint, by depth-first branch and bound over the
// per-step active controller.  Within the time limit the result is optimal;
// on timeout the incumbent is returned with status kTimeLimit.
CiaResult cia_round(const ControlSequence& u_c, const RoundingConstraint& constraint,
                    double time_limit_seconds = 60.0);

struct LinearPathResult {
  std::vector<int> active;  // chosen controller per step
  double objective = 0.0;   // sum_k cost(active[k], k)
  long long nodes = 0;
  SolveStatus status = SolveStatus::kConverged;
};

// Minimizes an additive per-step cost over one-hot sequences subject to the
// switching constraint and to changing the active controller on at most
// max_changed_steps steps relative to base_active.  Shares the branch-and-
// bound machinery with cia_round; used by the local-branching improver.
LinearPathResult solve_linear_path(const Eigen::MatrixXd& cost, const std::vector<int>& base_active,
                                   int max_changed_steps, const RoundingConstraint& constraint,
                                   double time_limit_seconds = 60.0);

}  // namespace qcp
