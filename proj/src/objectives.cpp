#include "qcpulse/objectives.hpp"

#include <cassert>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace qcp {

using std::complex;

namespace {

constexpr double kImagResidueTol = 1e-10;
constexpr double kPhaseTol = 1e-12;

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

// Divided differences of lambda -> exp(-i dt lambda) on the step spectrum:
// Phi_pq = (f(l_p) - f(l_q)) / (l_p - l_q), continued as f' on the diagonal.
// Written via sinc to stay stable when eigenvalues nearly coincide.  Applied
// as V (Phi o V^dag B V) V^dag this gives the exact directional derivative of
// the step propagator along a Hamiltonian perturbation B, which is what makes
// the adjoint gradient agree with finite differences beyond first order in dt.
Eigen::MatrixXcd phase_divided_differences(const Eigen::VectorXd& lambda, double dt) {
  const Eigen::Index d = lambda.size();
  Eigen::MatrixXcd phi(d, d);
  for (Eigen::Index p = 0; p < d; ++p) {
    for (Eigen::Index q = 0; q < d; ++q) {
      const double mid = 0.5 * (lambda[p] + lambda[q]);
      const double half_gap = 0.5 * dt * (lambda[p] - lambda[q]);
      phi(p, q) = complex<double>(0.0, -dt) *
                  std::exp(complex<double>(0.0, -dt * mid)) * sinc(half_gap);
    }
  }
  return phi;
}

struct ForwardSweep {
  std::vector<StepEig> eigs;
  std::vector<Eigen::MatrixXcd> propagators;
  std::vector<Eigen::MatrixXcd> states;  // states[k] = X_k, states[0] = X_init
};

ForwardSweep forward_sweep(const QuantumInstance& inst, const ControlSequence& controls) {
  const int t = controls.n_steps();
  ForwardSweep fs;
  fs.eigs.reserve(static_cast<size_t>(t));
  fs.propagators.reserve(static_cast<size_t>(t));
  fs.states.reserve(static_cast<size_t>(t) + 1);
  fs.states.push_back(inst.x_init);
  for (int k = 0; k < t; ++k) {
    StepEig eig = eig_step(assemble_hamiltonian(inst, controls.values.col(k)));
    Eigen::MatrixXcd u = propagator_from_eig(eig, controls.dt);
    fs.states.push_back(u * fs.states.back());
    fs.propagators.push_back(std::move(u));
    fs.eigs.push_back(std::move(eig));
  }
  return fs;
}

complex<double> overlap_trace(const InfidelitySpec& spec, const Eigen::MatrixXcd& x_final) {
  return (spec.target.adjoint() * x_final).trace();
}

double energy_value_from_final(const Eigen::MatrixXcd& x_final, const EnergySpec& spec) {
  if (spec.e_min == 0.0) {
    throw std::invalid_argument("energy objective needs a nonzero ground energy");
  }
  const Eigen::VectorXcd phi = x_final * spec.psi0;
  const complex<double> e = phi.dot(spec.hbar * phi);
  if (std::abs(e.imag()) > kImagResidueTol) {
    throw std::runtime_error("energy expectation has imaginary residue " +
                             std::to_string(e.imag()));
  }
  return 1.0 - e.real() / spec.e_min;
}

double infidelity_value_from_final(const Eigen::MatrixXcd& x_final, const InfidelitySpec& spec) {
  if (!(spec.norm_dim > 0.0)) {
    throw std::invalid_argument("infidelity objective needs a positive normalization");
  }
  const complex<double> z = overlap_trace(spec, x_final);
  const double value = 1.0 - std::abs(z) / spec.norm_dim;
  // For a unitary target on the full space the overlap magnitude cannot
  // exceed the dimension, so the value is confined to [0,1].
  assert(!spec.unit_range || (value >= -1e-9 && value <= 1.0 + 1e-9));
  return value;
}

double value_from_final(const Eigen::MatrixXcd& x_final, const ObjectiveSpec& spec) {
  if (const auto* energy = std::get_if<EnergySpec>(&spec)) {
    return energy_value_from_final(x_final, *energy);
  }
  return infidelity_value_from_final(x_final, std::get<InfidelitySpec>(spec));
}

}  // namespace

double energy_objective(const EvolutionTrace& trace, const EnergySpec& spec) {
  return energy_value_from_final(trace.final_state(), spec);
}

double infidelity_objective(const EvolutionTrace& trace, const InfidelitySpec& spec) {
  return infidelity_value_from_final(trace.final_state(), spec);
}

double objective_value(const EvolutionTrace& trace, const ObjectiveSpec& spec) {
  return value_from_final(trace.final_state(), spec);
}

double sos1_penalty(const ControlSequence& u) {
  double total = 0.0;
  for (int k = 0; k < u.n_steps(); ++k) {
    const double gap = u.values.col(k).sum() - 1.0;
    total += gap * gap;
  }
  return total;
}

double tv_seminorm(const ControlSequence& u) {
  double total = 0.0;
  for (int j = 0; j < u.n_controllers(); ++j) {
    for (int k = 0; k + 1 < u.n_steps(); ++k) {
      total += std::abs(u.values(j, k) - u.values(j, k + 1));
    }
  }
  return total;
}

namespace {

// Shared adjoint pass: one forward sweep, one backward sweep, objective value
// for free from the stored final state.
std::pair<double, Eigen::MatrixXd> objective_value_and_gradient(
    const QuantumInstance& inst, const ControlSequence& controls, const ObjectiveSpec& spec) {
  const int n = controls.n_controllers();
  const int t = controls.n_steps();
  if (n != inst.n_controllers()) {
    throw std::invalid_argument("controls do not match the instance controller count");
  }
  const ForwardSweep fs = forward_sweep(inst, controls);
  const double value = value_from_final(fs.states.back(), spec);
  Eigen::MatrixXd grad(n, t);

  if (const auto* energy = std::get_if<EnergySpec>(&spec)) {
    if (energy->e_min == 0.0) {
      throw std::invalid_argument("energy objective needs a nonzero ground energy");
    }
    // phi_k = X_k psi0 forward, kappa_k = U_{k+1}^dag ... U_T^dag Hbar phi_T
    // backward; the step derivative contracts both through the eigenbasis.
    std::vector<Eigen::VectorXcd> phi(static_cast<size_t>(t) + 1);
    phi[0] = inst.x_init * energy->psi0;
    for (int k = 0; k < t; ++k) {
      phi[static_cast<size_t>(k) + 1] = fs.propagators[static_cast<size_t>(k)] * phi[static_cast<size_t>(k)];
    }
    Eigen::VectorXcd kappa = energy->hbar * phi[static_cast<size_t>(t)];
    const double scale = -2.0 / energy->e_min;
    for (int k = t - 1; k >= 0; --k) {
      const StepEig& eig = fs.eigs[static_cast<size_t>(k)];
      const Eigen::MatrixXcd phi_dd = phase_divided_differences(eig.eigenvalues, controls.dt);
      const Eigen::VectorXcd a = eig.vectors.adjoint() * kappa;
      const Eigen::VectorXcd b = eig.vectors.adjoint() * phi[static_cast<size_t>(k)];
      const Eigen::MatrixXcd w = (a.conjugate() * b.transpose()).cwiseProduct(phi_dd);
      for (int j = 0; j < n; ++j) {
        const Eigen::MatrixXcd m =
            eig.vectors.adjoint() * inst.h_controls[static_cast<size_t>(j)] * eig.vectors;
        grad(j, k) = scale * w.cwiseProduct(m).sum().real();
      }
      kappa = fs.propagators[static_cast<size_t>(k)].adjoint() * kappa;
    }
    return {value, grad};
  }

  const auto& infid = std::get<InfidelitySpec>(spec);
  const complex<double> z = overlap_trace(infid, fs.states.back());
  if (std::abs(z) <= kPhaseTol) {
    throw std::runtime_error(
        "overlap trace vanishes, infidelity gradient phase is undefined; perturb the controls");
  }
  const complex<double> phase = std::conj(z) / std::abs(z);
  const double scale = -1.0 / infid.norm_dim;
  Eigen::MatrixXcd lambda = infid.target;  // lambda_k, swept backward
  for (int k = t - 1; k >= 0; --k) {
    const StepEig& eig = fs.eigs[static_cast<size_t>(k)];
    const Eigen::MatrixXcd phi_dd = phase_divided_differences(eig.eigenvalues, controls.dt);
    // d z / d u_jk = tr(lambda_k^dag dU_k X_{k-1}) with dU_k expanded in the
    // step eigenbasis; P gathers the k-independent factors once per step.
    const Eigen::MatrixXcd p =
        eig.vectors.adjoint() * fs.states[static_cast<size_t>(k)] * lambda.adjoint() * eig.vectors;
    const Eigen::MatrixXcd w = phi_dd.cwiseProduct(p.transpose());
    for (int j = 0; j < n; ++j) {
      const Eigen::MatrixXcd m =
          eig.vectors.adjoint() * inst.h_controls[static_cast<size_t>(j)] * eig.vectors;
      const complex<double> dz = w.cwiseProduct(m).sum();
      grad(j, k) = scale * (phase * dz).real();
    }
    lambda = fs.propagators[static_cast<size_t>(k)].adjoint() * lambda;
  }
  return {value, grad};
}

double penalty_terms(const ControlSequence& u, const PenaltyConfig& penalty,
                     const std::optional<AdmmTerms>& admm, Eigen::MatrixXd* grad) {
  double value = 0.0;
  if (penalty.sos1_mode == Sos1Mode::kPenalized && penalty.rho != 0.0) {
    value += penalty.rho * sos1_penalty(u);
    if (grad != nullptr) {
      for (int k = 0; k < u.n_steps(); ++k) {
        const double gap = u.values.col(k).sum() - 1.0;
        grad->col(k).array() += 2.0 * penalty.rho * gap;
      }
    }
  }
  if (admm.has_value()) {
    const auto& terms = *admm;
    const int t = u.n_steps();
    if (terms.v.rows() != u.n_controllers() || terms.v.cols() != t - 1 ||
        terms.mu.rows() != u.n_controllers() || terms.mu.cols() != t - 1) {
      throw std::invalid_argument("ADMM split variables must be N x (T-1)");
    }
    const Eigen::MatrixXd diff = u.values.leftCols(t - 1) - u.values.rightCols(t - 1);
    const Eigen::MatrixXd residual = diff - terms.v + terms.mu;
    value += 0.5 * terms.beta * residual.squaredNorm();
    if (grad != nullptr) {
      grad->leftCols(t - 1) += terms.beta * residual;
      grad->rightCols(t - 1) -= terms.beta * residual;
    }
  }
  return value;
}

}  // namespace

Eigen::MatrixXd adjoint_gradient(const QuantumInstance& inst, const ControlSequence& controls,
                                 const ObjectiveSpec& spec) {
  return objective_value_and_gradient(inst, controls, spec).second;
}

double composite_value(const QuantumInstance& inst, const ControlSequence& u,
                       const ObjectiveSpec& spec, const PenaltyConfig& penalty,
                       const std::optional<AdmmTerms>& admm) {
  const double f = objective_value(evolve(inst, u), spec);
  return f + penalty_terms(u, penalty, admm, nullptr);
}

std::pair<double, Eigen::MatrixXd> composite_value_and_gradient(
    const QuantumInstance& inst, const ControlSequence& u, const ObjectiveSpec& spec,
    const PenaltyConfig& penalty, const std::optional<AdmmTerms>& admm) {
  auto [f, grad] = objective_value_and_gradient(inst, u, spec);
  const double extra = penalty_terms(u, penalty, admm, &grad);
  return {f + extra, grad};
}

}  // namespace qcp
