#pragma once

#include <Eigen/Dense>

namespace qcp {

// Piecewise-constant control amplitudes on a uniform time grid: one row per
// controller, one column per step, each column held for a slice of length dt.
struct ControlSequence {
  Eigen::MatrixXd values;  // N x T
  double dt = 0.0;

  int n_controllers() const { return static_cast<int>(values.rows()); }
  int n_steps() const { return static_cast<int>(values.cols()); }
  double total_time() const { return dt * static_cast<double>(n_steps()); }
};

ControlSequence make_constant_controls(int n_controllers, int n_steps, double dt, double value);

bool in_unit_box(const ControlSequence& u, double tol = 0.0);

// True when every entry is exactly 0.0 or 1.0.
bool is_binary(const ControlSequence& u);

// True when every column sums to 1 within tol (exactly, for tol = 0).
bool satisfies_sos1(const ControlSequence& u, double tol = 0.0);

// Throws std::invalid_argument unless both sequences share N, T and dt.
void require_same_grid(const ControlSequence& a, const ControlSequence& b);

}  // namespace qcp
