#pragma once

#include <optional>
#include <utility>

#include <Eigen/Dense>

#include "qcpulse/control.hpp"
#include "qcpulse/dynamics.hpp"
#include "qcpulse/model.hpp"

namespace qcp {

double energy_objective(const EvolutionTrace& trace, const EnergySpec& spec);
double infidelity_objective(const EvolutionTrace& trace, const InfidelitySpec& spec);
double objective_value(const EvolutionTrace& trace, const ObjectiveSpec& spec);

// Squared column-sum violation of the one-hot requirement:
// sum_k (sum_j u_jk - 1)^2.
double sos1_penalty(const ControlSequence& u);

// Total variation along each controller row: sum_j sum_{k<T} |u_jk - u_j,k+1|.
double tv_seminorm(const ControlSequence& u);

// d objective / d u_jk as an N x T matrix, computed with one forward
// evolution and one backward adjoint sweep.  Each step's propagator
// derivative is evaluated exactly from the step eigendecomposition, so the
// result matches central finite differences to solver precision.
Eigen::MatrixXd adjoint_gradient(const QuantumInstance& inst,
                                 const ControlSequence& controls,
                                 const ObjectiveSpec& spec);

enum class Sos1Mode {
  kPenalized,            // add rho * sos1_penalty to the objective
  kSubstitutedTwoControl,  // N = 2 and row 2 is defined as 1 - row 1
  kOff,                  // box constraints only
};

struct PenaltyConfig {
  double rho = 0.0;
  double alpha = 0.0;  // TV weight; used by ADMM and reporting, not added here
  Sos1Mode sos1_mode = Sos1Mode::kPenalized;
};

// Scaled dual state for the ADMM splitting of the TV term.  v and mu have
// one column fewer than the controls (they live on step transitions).
struct AdmmTerms {
  Eigen::MatrixXd v;
  Eigen::MatrixXd mu;
  double beta = 0.0;
};

// Smooth part optimized by the quasi-Newton stage: objective + optional SOS1
// penalty + optional ADMM augmented term (beta/2) sum (du - v + mu)^2.
double composite_value(const QuantumInstance& inst, const ControlSequence& u,
                       const ObjectiveSpec& spec, const PenaltyConfig& penalty,
                       const std::optional<AdmmTerms>& admm = std::nullopt);

std::pair<double, Eigen::MatrixXd> composite_value_and_gradient(
    const QuantumInstance& inst, const ControlSequence& u, const ObjectiveSpec& spec,
    const PenaltyConfig& penalty, const std::optional<AdmmTerms>& admm = std::nullopt);

}  // namespace qcp
