#include "qcpulse/dynamics.hpp"

#include <complex>
#include <stdexcept>
#include <string>

namespace qcp {

using std::complex;

double hermiticity_error(const Eigen::MatrixXcd& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

double unitarity_error(const Eigen::MatrixXcd& u) {
  return (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd assemble_hamiltonian(const QuantumInstance& inst,
                                      const Eigen::VectorXd& controls_at_step) {
  if (controls_at_step.size() != inst.n_controllers()) {
    throw std::invalid_argument("expected " + std::to_string(inst.n_controllers()) +
                                " control amplitudes, got " +
                                std::to_string(controls_at_step.size()));
  }
  Eigen::MatrixXcd h = inst.h_drift;
  for (int j = 0; j < inst.n_controllers(); ++j) {
    const Eigen::MatrixXcd& hj = inst.h_controls[static_cast<size_t>(j)];
    if (hj.rows() != h.rows() || hj.cols() != h.cols()) {
      throw std::invalid_argument("control Hamiltonian " + std::to_string(j + 1) + " is " +
                                  std::to_string(hj.rows()) + "x" + std::to_string(hj.cols()) +
                                  ", expected " + std::to_string(h.rows()) + "x" +
                                  std::to_string(h.cols()));
    }
    h += controls_at_step[j] * hj;
  }
  return h;
}

StepEig eig_step(const Eigen::MatrixXcd& h) {
  const double herm = hermiticity_error(h);
  if (herm > kHermitianTol) {
    throw std::invalid_argument("step Hamiltonian is not Hermitian (max |H - H^dag| = " +
                                std::to_string(herm) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition of step Hamiltonian failed");
  }
  return StepEig{solver.eigenvectors(), solver.eigenvalues()};
}

Eigen::MatrixXcd propagator_from_eig(const StepEig& eig, double dt) {
  const Eigen::Index d = eig.vectors.rows();
  Eigen::VectorXcd phases(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    phases[i] = std::exp(complex<double>(0.0, -dt * eig.eigenvalues[i]));
  }
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

Eigen::MatrixXcd step_propagator(const Eigen::MatrixXcd& h, double dt) {
  return propagator_from_eig(eig_step(h), dt);
}

EvolutionTrace evolve(const QuantumInstance& inst, const ControlSequence& controls) {
  if (controls.n_controllers() != inst.n_controllers()) {
    throw std::invalid_argument("instance has " + std::to_string(inst.n_controllers()) +
                                " controllers, controls have " +
                                std::to_string(controls.n_controllers()));
  }
  if (inst.x_init.rows() != inst.dim || inst.x_init.cols() != inst.dim) {
    throw std::invalid_argument("initial operator does not match the instance dimension");
  }
  const int t = controls.n_steps();
  EvolutionTrace trace;
  trace.propagators.reserve(static_cast<size_t>(t));
  trace.states.reserve(static_cast<size_t>(t) + 1);
  trace.states.push_back(inst.x_init);
  for (int k = 0; k < t; ++k) {
    const Eigen::MatrixXcd h = assemble_hamiltonian(inst, controls.values.col(k));
    Eigen::MatrixXcd u = step_propagator(h, controls.dt);
    trace.states.push_back(u * trace.states.back());
    trace.propagators.push_back(std::move(u));
  }
  return trace;
}

}  // namespace qcp
