#include "qcpulse/control.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qcp {

ControlSequence make_constant_controls(int n_controllers, int n_steps, double dt, double value) {
  if (n_controllers < 1 || n_steps < 1) {
    throw std::invalid_argument("control sequence needs at least one controller and one step");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("control sequence needs a positive step length");
  }
  ControlSequence u;
  u.values = Eigen::MatrixXd::Constant(n_controllers, n_steps, value);
  u.dt = dt;
  return u;
}

bool in_unit_box(const ControlSequence& u, double tol) {
  return u.values.minCoeff() >= -tol && u.values.maxCoeff() <= 1.0 + tol;
}

bool is_binary(const ControlSequence& u) {
  for (int k = 0; k < u.n_steps(); ++k) {
    for (int j = 0; j < u.n_controllers(); ++j) {
      const double v = u.values(j, k);
      if (v != 0.0 && v != 1.0) return false;
    }
  }
  return true;
}

bool satisfies_sos1(const ControlSequence& u, double tol) {
  for (int k = 0; k < u.n_steps(); ++k) {
    if (std::abs(u.values.col(k).sum() - 1.0) > tol) return false;
  }
  return true;
}

void require_same_grid(const ControlSequence& a, const ControlSequence& b) {
  if (a.n_controllers() != b.n_controllers() || a.n_steps() != b.n_steps() || a.dt != b.dt) {
    throw std::invalid_argument(
        "control sequences are on different grids: " + std::to_string(a.n_controllers()) + "x" +
        std::to_string(a.n_steps()) + " dt=" + std::to_string(a.dt) + " vs " +
        std::to_string(b.n_controllers()) + "x" + std::to_string(b.n_steps()) +
        " dt=" + std::to_string(b.dt));
  }
}

}  // namespace qcp
