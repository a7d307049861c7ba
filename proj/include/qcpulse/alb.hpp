#pragma once

#include <utility>
#include <variant>

#include <Eigen/Dense>

#include "qcpulse/control.hpp"
#include "qcpulse/model.hpp"
#include "qcpulse/report.hpp"
#include "qcpulse/rounding.hpp"

namespace qcp {

// Improvement objective F + alpha * TV over all one-hot binary sequences.
struct TvMode {
  double alpha = 0.0;
};

// Improvement objective F over the switching-constrained set; every iterate
// stays feasible for the constraint.
struct ConstrainedMode {
  RoundingConstraint constraint;
};

using ImproveMode = std::variant<TvMode, ConstrainedMode>;

struct TrustRegionConfig {
  int r0 = 0;        // starting flip budget; 0 means ceil(T/5), floored at r_bar
  int r_bar = 2;     // radius floor before the budget counts down by one
  double eta = 1e-3; // acceptance ratio on predicted vs actual decrease
  int max_outer = 100;
  double subproblem_time_limit = 60.0;
};

struct TrustRegionStep {
  ControlSequence controls;
  double predicted_decrease = 0.0;
};

// Linearized subproblem min <grad, u - u_hat> + alpha (TV(u) - TV(u_hat))
// over one-hot binary u within `radius` bit flips of u_hat, solved exactly by
// dynamic programming over (step, active controller, flips spent).
TrustRegionStep tr_subproblem_tv(const ControlSequence& u_hat, const Eigen::MatrixXd& grad,
                                 double alpha, int radius);

// Same linear model without the TV term, over the switching-constrained set,
// solved by branch and bound.
TrustRegionStep tr_subproblem_constrained(const ControlSequence& u_hat, const Eigen::MatrixXd& grad,
                                          int radius, const RoundingConstraint& constraint,
                                          double time_limit_seconds = 60.0);

// Predicted decrease from the linear model and actual decrease of the mode
// objective between u_hat and u_bar (two evolutions, no gradients).
std::pair<double, double> improvement_decreases(const QuantumInstance& inst,
                                                const ObjectiveSpec& spec,
                                                const ControlSequence& u_hat,
                                                const ControlSequence& u_bar,
                                                const Eigen::MatrixXd& grad,
                                                const ImproveMode& mode);

struct ImproveResult {
  ControlSequence controls;
  SolveReport report;
};

// Trust-region local branching: re-center on accepted steps, shrink the flip
// budget on rejected ones, stop when the model predicts no further decrease.
ImproveResult alb_improve(const QuantumInstance& inst, const ObjectiveSpec& spec,
                          const ControlSequence& u0, const ImproveMode& mode,
                          const TrustRegionConfig& config = {});

}  // namespace qcp
