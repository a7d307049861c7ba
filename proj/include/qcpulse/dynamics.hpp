#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qcpulse/control.hpp"
#include "qcpulse/model.hpp"

namespace qcp {

// Entrywise magnitude of A - A^dag; zero for an exactly Hermitian matrix.
double hermiticity_error(const Eigen::MatrixXcd& a);

// Entrywise magnitude of U^dag U - I.
double unitarity_error(const Eigen::MatrixXcd& u);

// Largest tolerated hermiticity_error before a Hamiltonian is rejected.
inline constexpr double kHermitianTol = 1e-12;

// H(u_k) = H_drift + sum_j u_jk H_j.  Throws std::invalid_argument on a
// controller-count or dimension mismatch, naming the offending controller.
Eigen::MatrixXcd assemble_hamiltonian(const QuantumInstance& inst,
                                      const Eigen::VectorXd& controls_at_step);

// Eigendecomposition of a Hermitian step Hamiltonian, kept around so the
// gradient pass can reuse it for exact propagator derivatives.
struct StepEig {
  Eigen::MatrixXcd vectors;
  Eigen::VectorXd eigenvalues;
};

StepEig eig_step(const Eigen::MatrixXcd& h);

Eigen::MatrixXcd propagator_from_eig(const StepEig& eig, double dt);

// exp(-i H dt) for Hermitian H, via eigendecomposition.  Non-Hermitian input
// (beyond kHermitianTol) is rejected, never symmetrized.
Eigen::MatrixXcd step_propagator(const Eigen::MatrixXcd& h, double dt);

struct EvolutionTrace {
  // propagators[k] = U_{k+1} and states[k] = X_k, with states[0] = X_init,
  // so states has one more entry than propagators.
  std::vector<Eigen::MatrixXcd> propagators;
  std::vector<Eigen::MatrixXcd> states;

  const Eigen::MatrixXcd& final_state() const { return states.back(); }
};

EvolutionTrace evolve(const QuantumInstance& inst, const ControlSequence& controls);

}  // namespace qcp
