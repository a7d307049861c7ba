#pragma once

#include <optional>

#include "qcpulse/bound_lbfgs.hpp"
#include "qcpulse/control.hpp"
#include "qcpulse/model.hpp"
#include "qcpulse/objectives.hpp"
#include "qcpulse/report.hpp"

namespace qcp {

struct RelaxResult {
  ControlSequence controls;
  SolveReport report;
};

// Penalized quasi-Newton continuous relaxation.  The SOS1 mode decides the
// variable space: kSubstitutedTwoControl optimizes row 1 only (row 2 is its
// complement), the other modes optimize all N*T amplitudes in [0,1].
RelaxResult pgrape_solve(const QuantumInstance& inst, const ObjectiveSpec& spec,
                         const PenaltyConfig& penalty, const ControlSequence& x0,
                         const BoundLbfgsConfig& config = {});

struct AdmmConfig {
  double beta = 0.5;
  double residual_tol = 1e-6;
  int max_outer = 100;
  BoundLbfgsConfig inner;
};

// Splitting method for the TV-regularized relaxation: quasi-Newton u-update,
// closed-form shrinkage v-update, dual ascent on mu; stops once the squared
// splitting residual falls below residual_tol.
RelaxResult admm_solve(const QuantumInstance& inst, const ObjectiveSpec& spec,
                       const PenaltyConfig& penalty, const ControlSequence& x0,
                       const AdmmConfig& config = {});

// Shrinkage prox min_v (beta/2)(d - v)^2 + alpha |v| in closed form.
double soft_threshold(double d, double alpha, double beta);

}  // namespace qcp
