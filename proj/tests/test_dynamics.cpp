#include <doctest.h>

#include <complex>

#include "oracles.hpp"
#include "qcpulse/dynamics.hpp"
#include "qcpulse/rng.hpp"
#include "support.hpp"

using namespace qcp;

TEST_CASE("single step propagator matches fixed-step integration") {
  Rng rng(101);
  for (const int dim : {2, 3, 4}) {
    for (const double dt : {0.05, 0.3, 1.0}) {
      const Eigen::MatrixXcd h = support::random_hermitian(dim, rng);
      const Eigen::MatrixXcd via_eig = step_propagator(h, dt);
      const Eigen::MatrixXcd via_rk4 = oracles::rk4_propagator(h, dt);
      CHECK((via_eig - via_rk4).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("propagator of a pure sigma-x drive has the closed form") {
  Eigen::MatrixXcd sx(2, 2);
  sx << 0, 1, 1, 0;
  const double dt = 0.37;
  const Eigen::MatrixXcd u = step_propagator(sx, dt);
  const std::complex<double> i(0.0, 1.0);
  Eigen::MatrixXcd expected(2, 2);
  expected << std::cos(dt), -i * std::sin(dt), -i * std::sin(dt), std::cos(dt);
  CHECK((u - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("propagators and evolved states stay unitary") {
  Rng rng(102);
  const QuantumInstance inst = support::two_level_instance();
  const ControlSequence u = support::random_controls(2, 25, 0.2, rng);
  const EvolutionTrace trace = evolve(inst, u);
  REQUIRE(trace.propagators.size() == 25);
  REQUIRE(trace.states.size() == 26);
  for (const Eigen::MatrixXcd& step : trace.propagators) {
    CHECK(unitarity_error(step) < 1e-12);
  }
  CHECK(unitarity_error(trace.final_state()) < 1e-12);
}

TEST_CASE("evolution starts at x_init and composes step propagators") {
  Rng rng(103);
  const QuantumInstance inst = support::two_level_instance();
  const ControlSequence u = support::random_controls(2, 6, 0.15, rng);
  const EvolutionTrace trace = evolve(inst, u);
  CHECK((trace.states.front() - inst.x_init).cwiseAbs().maxCoeff() == 0.0);
  Eigen::MatrixXcd x = inst.x_init;
  for (int k = 0; k < u.n_steps(); ++k) {
    Eigen::MatrixXcd h = inst.h_drift;
    for (int j = 0; j < u.n_controllers(); ++j) h += u.values(j, k) * inst.h_controls[j];
    x = oracles::rk4_propagator(h, u.dt) * x;
  }
  CHECK((trace.final_state() - x).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("assembled hamiltonian is affine in the controls") {
  const QuantumInstance inst = support::two_level_instance();
  Eigen::VectorXd at_step(2);
  at_step << 0.3, -1.7;
  const Eigen::MatrixXcd h = assemble_hamiltonian(inst, at_step);
  const Eigen::MatrixXcd expected =
      inst.h_drift + 0.3 * inst.h_controls[0] - 1.7 * inst.h_controls[1];
  CHECK((h - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-hermitian hamiltonians are rejected") {
  Eigen::MatrixXcd bad(2, 2);
  bad << 0, 1, 2, 0;
  CHECK(hermiticity_error(bad) == 1.0);
  CHECK_THROWS_AS(step_propagator(bad, 0.1), std::invalid_argument);
}

TEST_CASE("evolve validates the controls against the instance") {
  Rng rng(104);
  const QuantumInstance inst = support::two_level_instance();
  const ControlSequence wrong_rows = support::random_controls(3, 5, 0.1, rng);
  CHECK_THROWS_AS(evolve(inst, wrong_rows), std::invalid_argument);
}
