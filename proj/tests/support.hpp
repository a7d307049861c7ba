// Shared helpers for building randomized fixtures in the unit tests.
#pragma once

#include <complex>

#include <Eigen/Dense>

#include "qcpulse/control.hpp"
#include "qcpulse/model.hpp"
#include "qcpulse/rng.hpp"

namespace support {

inline Eigen::MatrixXcd random_hermitian(int dim, qcp::Rng& rng) {
  Eigen::MatrixXcd a(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      a(i, j) = std::complex<double>(rng.normal(), rng.normal());
    }
  }
  return 0.5 * (a + a.adjoint());
}

inline qcp::ControlSequence random_controls(int n, int t, double dt, qcp::Rng& rng, double lo = 0.0,
                                            double hi = 1.0) {
  qcp::ControlSequence u;
  u.dt = dt;
  u.values = Eigen::MatrixXd(n, t);
  for (int k = 0; k < t; ++k) {
    for (int j = 0; j < n; ++j) u.values(j, k) = rng.uniform(lo, hi);
  }
  return u;
}

inline qcp::ControlSequence random_one_hot(int n, int t, double dt, qcp::Rng& rng) {
  qcp::ControlSequence u;
  u.dt = dt;
  u.values = Eigen::MatrixXd::Zero(n, t);
  for (int k = 0; k < t; ++k) u.values(rng.uniform_int(0, n - 1), k) = 1.0;
  return u;
}

// Two-level system with a zero drift and sx/sz drives; small enough that
// every objective quantity can be cross-checked by hand or by dense algebra.
inline qcp::QuantumInstance two_level_instance() {
  qcp::QuantumInstance inst;
  inst.name = "test-two-level";
  inst.dim = 2;
  inst.h_drift = Eigen::MatrixXcd::Zero(2, 2);
  Eigen::MatrixXcd sx(2, 2);
  sx << 0, 1, 1, 0;
  Eigen::MatrixXcd sz(2, 2);
  sz << 1, 0, 0, -1;
  inst.h_controls = {sx, sz};
  inst.x_init = Eigen::MatrixXcd::Identity(2, 2);
  qcp::InfidelitySpec spec;
  spec.target = sx;
  spec.norm_dim = 2.0;
  spec.unit_range = true;
  inst.objective = spec;
  inst.defaults = {1.0, 10, 0.01, 2, 4, 1.0};
  return inst;
}

}  // namespace support
