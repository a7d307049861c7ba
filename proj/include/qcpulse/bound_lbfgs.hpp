#pragma once

#include <functional>

#include <Eigen/Dense>

#include "qcpulse/status.hpp"

namespace qcp {

// Objective callback: returns f(x) and, when grad is non-null, fills the
// gradient.  Line-search probes pass grad = nullptr so a cheaper value-only
// path can be used.
using BoxObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct BoundLbfgsConfig {
  int memory = 10;
  int max_iterations = 5000;
  double projected_gradient_tol = 1e-8;
  double armijo_c1 = 1e-4;
  double backtrack_factor = 0.5;
  int max_line_search_trials = 50;
  // Observer invoked on every accepted iterate (used by tests to check the
  // accepted values decrease monotonically and stay inside the box).
  std::function<void(const Eigen::VectorXd& x, double f)> on_accept;
};

struct BoundLbfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double projected_gradient_norm = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::kMaxIterations;
};

// Limited-memory BFGS with box constraints: gradient projection identifies
// the active face, the two-loop recursion runs on the free variables, and an
// Armijo backtracking search walks the projected path.  A failed line search
// returns the best point seen with status kStalled.
BoundLbfgsResult bound_lbfgs_minimize(const BoxObjective& objective, const Eigen::VectorXd& x0,
                                      const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                      const BoundLbfgsConfig& config);

}  // namespace qcp
