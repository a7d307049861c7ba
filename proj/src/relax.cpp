#include "qcpulse/relax.hpp"

#include <chrono>
#include <stdexcept>

#include "qcpulse/dynamics.hpp"

namespace qcp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(const Clock::time_point& start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Mapping between the solver's flat variable vector and the control matrix.
// Under the two-control substitution only row 1 is free and row 2 mirrors it,
// which keeps the one-hot property exact without a penalty term.
struct VariableSpace {
  bool substituted = false;
  int n = 0;
  int t = 0;
  double dt = 0.0;

  Eigen::Index size() const { return substituted ? t : n * t; }

  Eigen::VectorXd pack(const ControlSequence& u) const {
    if (substituted) return u.values.row(0).transpose();
    return Eigen::Map<const Eigen::VectorXd>(u.values.data(), u.values.size());
  }

  ControlSequence unpack(const Eigen::VectorXd& x) const {
    ControlSequence u;
    u.dt = dt;
    if (substituted) {
      u.values.resize(2, t);
      u.values.row(0) = x.transpose();
      u.values.row(1) = Eigen::RowVectorXd::Ones(t) - x.transpose();
    } else {
      u.values = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, t);
    }
    return u;
  }

  Eigen::VectorXd reduce_gradient(const Eigen::MatrixXd& grad) const {
    if (substituted) return (grad.row(0) - grad.row(1)).transpose();
    return Eigen::Map<const Eigen::VectorXd>(grad.data(), grad.size());
  }
};

VariableSpace make_space(const QuantumInstance& inst, const PenaltyConfig& penalty,
                         const ControlSequence& x0) {
  if (x0.n_controllers() != inst.n_controllers()) {
    throw std::invalid_argument("starting controls do not match the instance controller count");
  }
  if (penalty.sos1_mode == Sos1Mode::kSubstitutedTwoControl && inst.n_controllers() != 2) {
    throw std::invalid_argument("the two-control substitution needs exactly two controllers");
  }
  VariableSpace space;
  space.substituted = penalty.sos1_mode == Sos1Mode::kSubstitutedTwoControl;
  space.n = x0.n_controllers();
  space.t = x0.n_steps();
  space.dt = x0.dt;
  return space;
}

SolveReport make_relax_report(const QuantumInstance& inst, const ObjectiveSpec& spec,
                              const ControlSequence& u, const std::string& stage) {
  SolveReport report;
  report.stage = stage;
  report.instance = inst.name;
  report.objective = objective_value(evolve(inst, u), spec);
  report.tv_value = tv_seminorm(u);
  report.sos1_penalty_value = sos1_penalty(u);
  return report;
}

}  // namespace

RelaxResult pgrape_solve(const QuantumInstance& inst, const ObjectiveSpec& spec,
                         const PenaltyConfig& penalty, const ControlSequence& x0,
                         const BoundLbfgsConfig& config) {
  const auto start = Clock::now();
  const VariableSpace space = make_space(inst, penalty, x0);

  const BoxObjective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
    const ControlSequence u = space.unpack(x);
    if (grad == nullptr) {
      return composite_value(inst, u, spec, penalty);
    }
    auto [value, g] = composite_value_and_gradient(inst, u, spec, penalty);
    *grad = space.reduce_gradient(g);
    return value;
  };

  const Eigen::VectorXd lower = Eigen::VectorXd::Zero(space.size());
  const Eigen::VectorXd upper = Eigen::VectorXd::Ones(space.size());
  const BoundLbfgsResult qn = bound_lbfgs_minimize(objective, space.pack(x0), lower, upper, config);

  RelaxResult result;
  result.controls = space.unpack(qn.x);
  result.report = make_relax_report(inst, spec, result.controls, "relax:pgrape");
  result.report.iterations = qn.iterations;
  result.report.status = qn.status;
  result.report.wall_seconds = seconds_since(start);
  return result;
}

double soft_threshold(double d, double alpha, double beta) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("shrinkage needs a positive beta");
  }
  const double threshold = alpha / beta;
  if (d > threshold) return d - threshold;
  if (d < -threshold) return d + threshold;
  return 0.0;
}

RelaxResult admm_solve(const QuantumInstance& inst, const ObjectiveSpec& spec,
                       const PenaltyConfig& penalty, const ControlSequence& x0,
                       const AdmmConfig& config) {
  const auto start = Clock::now();
  const VariableSpace space = make_space(inst, penalty, x0);
  const int n = x0.n_controllers();
  const int t = x0.n_steps();
  if (t < 2) {
    throw std::invalid_argument("the TV splitting needs at least two steps");
  }

  ControlSequence u = x0;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, t - 1);
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(n, t - 1);

  const auto step_diff = [&](const ControlSequence& c) {
    return Eigen::MatrixXd(c.values.leftCols(t - 1) - c.values.rightCols(t - 1));
  };

  double residual = (step_diff(u) - v).squaredNorm();
  SolveStatus status = SolveStatus::kMaxIterations;
  std::vector<double> history;
  long long outer_done = 0;

  const Eigen::VectorXd lower = Eigen::VectorXd::Zero(space.size());
  const Eigen::VectorXd upper = Eigen::VectorXd::Ones(space.size());

  for (int outer = 0; outer < config.max_outer; ++outer) {
    // u-update: quasi-Newton on the smooth part augmented with the splitting
    // quadratic, warm-started from the previous iterate.  The inner tolerance
    // follows the splitting residual down, floored at 1e-6.
    const AdmmTerms terms{v, mu, config.beta};
    BoundLbfgsConfig inner = config.inner;
    inner.projected_gradient_tol = std::max(1e-6, 0.1 * residual);

    const BoxObjective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
      const ControlSequence c = space.unpack(x);
      if (grad == nullptr) {
        return composite_value(inst, c, spec, penalty, terms);
      }
      auto [value, g] = composite_value_and_gradient(inst, c, spec, penalty, terms);
      *grad = space.reduce_gradient(g);
      return value;
    };
    const BoundLbfgsResult qn = bound_lbfgs_minimize(objective, space.pack(u), lower, upper, inner);
    u = space.unpack(qn.x);

    const Eigen::MatrixXd diff = step_diff(u);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < t - 1; ++k) {
        v(j, k) = soft_threshold(diff(j, k) + mu(j, k), penalty.alpha, config.beta);
      }
    }
    mu += diff - v;

    residual = (diff - v).squaredNorm();
    history.push_back(objective_value(evolve(inst, u), spec));
    outer_done = outer + 1;
    if (residual <= config.residual_tol) {
      status = SolveStatus::kConverged;
      break;
    }
  }

  RelaxResult result;
  result.controls = u;
  result.report = make_relax_report(inst, spec, u, "relax:admm");
  result.report.iterations = outer_done;
  result.report.status = status;
  result.report.wall_seconds = seconds_since(start);
  result.report.final_residual = residual;
  result.report.objective_history = std::move(history);
  return result;
}

}  // namespace qcp
