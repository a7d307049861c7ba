#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qcpulse/model.hpp"

namespace qcp {

// I (x) ... (x) p (x) ... (x) I with p acting on `site` (1-based) of `n_qubits`.
Eigen::MatrixXcd pauli_embed(const Eigen::Matrix2cd& p, int site, int n_qubits);

Eigen::Matrix2cd sigma_x();
Eigen::Matrix2cd sigma_y();
Eigen::Matrix2cd sigma_z();

// Ising energy minimization: controllers are a transverse field -sum_i sx_i
// and a coupling term sum_{i!=j} J_ij sz_i sz_j, started from the uniform
// superposition.  J must be symmetric with zero diagonal.
QuantumInstance build_energy_instance(int n_qubits, const Eigen::MatrixXd& coupling);

// Same with J entries drawn uniformly from [-1,1); reproducible from seed.
QuantumInstance build_energy_instance(int n_qubits, std::uint64_t seed);

// Two qubits under an isotropic exchange drift with local sx/sy drives,
// steering toward the controlled-NOT gate.
QuantumInstance build_cnot_instance(double t_f, int n_steps);

// Single qubit with a leakage level: diagonal drift, ladder-coupling drives,
// steering toward a NOT on the computational subspace (norm_dim = 2).
QuantumInstance build_not_instance(double t_f, int n_steps);

struct CircuitEdge {
  int a = 0;
  int b = 0;
};

// Tunable-coupler chip model: per qubit a charge drive (0.2*pi sx) and a flux
// drive (3*pi diag(0,1)), plus a 0.1*pi sx.sx drive per coupler edge.  The
// target unitary is always loaded from a file, validated for unitarity.
QuantumInstance build_circuit_instance(int n_qubits, const std::vector<CircuitEdge>& edges,
                                       const std::string& target_path, double t_f, int n_steps);

// Small randomized SOS1 instance (random Hermitian drives on q qubits, random
// unitary target) used by the verification sweeps and as a demo family.
QuantumInstance build_random_instance(int n_qubits, int n_controllers, std::uint64_t seed,
                                      double t_f, int n_steps);

// Haar-like random unitary from the QR factorization of a complex Gaussian
// matrix, with the R diagonal phases normalized.
Eigen::MatrixXcd random_unitary(int dim, std::uint64_t seed);

// Text target format: first line "dim d", then d rows of d entries "a+bi".
// Reading rejects malformed entries (reporting the line number) and matrices
// that are not unitary to 1e-8.
Eigen::MatrixXcd read_target_unitary(const std::string& path);
void write_target_unitary(const std::string& path, const Eigen::MatrixXcd& u);

}  // namespace qcp
