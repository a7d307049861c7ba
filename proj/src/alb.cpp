#include "qcpulse/alb.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "qcpulse/dynamics.hpp"
#include "qcpulse/objectives.hpp"

namespace qcp {

namespace {

using Clock = std::chrono::steady_clock;

std::vector<int> active_path(const ControlSequence& u) {
  if (!is_binary(u) || !satisfies_sos1(u)) {
    throw std::invalid_argument("local branching needs a one-hot binary sequence");
  }
  std::vector<int> active(static_cast<size_t>(u.n_steps()), 0);
  for (int k = 0; k < u.n_steps(); ++k) {
    for (int j = 0; j < u.n_controllers(); ++j) {
      if (u.values(j, k) == 1.0) active[static_cast<size_t>(k)] = j;
    }
  }
  return active;
}

int path_changes(const std::vector<int>& active) {
  int changes = 0;
  for (size_t k = 0; k + 1 < active.size(); ++k) {
    if (active[k] != active[k + 1]) ++changes;
  }
  return changes;
}

double linear_path_cost(const Eigen::MatrixXd& grad, const std::vector<int>& active) {
  double cost = 0.0;
  for (size_t k = 0; k < active.size(); ++k) {
    cost += grad(active[k], static_cast<Eigen::Index>(k));
  }
  return cost;
}

}  // namespace

TrustRegionStep tr_subproblem_tv(const ControlSequence& u_hat, const Eigen::MatrixXd& grad,
                                 double alpha, int radius) {
  if (radius < 0) {
    throw std::invalid_argument("trust-region radius must be nonnegative");
  }
  const std::vector<int> base = active_path(u_hat);
  const int n = u_hat.n_controllers();
  const int t = u_hat.n_steps();
  if (grad.rows() != n || grad.cols() != t) {
    throw std::invalid_argument("gradient shape does not match the controls");
  }
  // Changing the active controller on one step flips two bits, so a flip
  // budget of `radius` allows at most radius/2 changed steps.
  const int budget = radius / 2;
  const double infinity = std::numeric_limits<double>::infinity();

  // dp[j][b]: cheapest prefix ending at step k with controller j active and b
  // changed steps spent; transitions pay 2*alpha per controller change.
  std::vector<std::vector<double>> dp(static_cast<size_t>(n),
                                      std::vector<double>(static_cast<size_t>(budget) + 1, infinity));
  std::vector<std::vector<std::vector<int>>> parent(
      static_cast<size_t>(t),
      std::vector<std::vector<int>>(static_cast<size_t>(n),
                                    std::vector<int>(static_cast<size_t>(budget) + 1, -1)));
  for (int j = 0; j < n; ++j) {
    const int spent = j != base[0] ? 1 : 0;
    if (spent <= budget) dp[static_cast<size_t>(j)][static_cast<size_t>(spent)] = grad(j, 0);
  }
  for (int k = 1; k < t; ++k) {
    std::vector<std::vector<double>> next(
        static_cast<size_t>(n), std::vector<double>(static_cast<size_t>(budget) + 1, infinity));
    for (int j = 0; j < n; ++j) {
      for (int b = 0; b <= budget; ++b) {
        const double value = dp[static_cast<size_t>(j)][static_cast<size_t>(b)];
        if (value == infinity) continue;
        for (int jn = 0; jn < n; ++jn) {
          const int bn = b + (jn != base[static_cast<size_t>(k)] ? 1 : 0);
          if (bn > budget) continue;
          const double candidate = value + grad(jn, k) + (jn != j ? 2.0 * alpha : 0.0);
          if (candidate < next[static_cast<size_t>(jn)][static_cast<size_t>(bn)]) {
            next[static_cast<size_t>(jn)][static_cast<size_t>(bn)] = candidate;
            parent[static_cast<size_t>(k)][static_cast<size_t>(jn)][static_cast<size_t>(bn)] = j;
          }
        }
      }
    }
    dp = std::move(next);
  }

  int best_j = 0;
  int best_b = 0;
  double best_value = infinity;
  for (int j = 0; j < n; ++j) {
    for (int b = 0; b <= budget; ++b) {
      if (dp[static_cast<size_t>(j)][static_cast<size_t>(b)] < best_value) {
        best_value = dp[static_cast<size_t>(j)][static_cast<size_t>(b)];
        best_j = j;
        best_b = b;
      }
    }
  }

  std::vector<int> chosen(static_cast<size_t>(t), 0);
  int j = best_j;
  int b = best_b;
  for (int k = t - 1; k >= 0; --k) {
    chosen[static_cast<size_t>(k)] = j;
    if (k > 0) {
      const int prev = parent[static_cast<size_t>(k)][static_cast<size_t>(j)][static_cast<size_t>(b)];
      b -= (j != base[static_cast<size_t>(k)] ? 1 : 0);
      j = prev;
    }
  }

  TrustRegionStep step;
  step.controls.dt = u_hat.dt;
  step.controls.values = Eigen::MatrixXd::Zero(n, t);
  for (int k = 0; k < t; ++k) {
    step.controls.values(chosen[static_cast<size_t>(k)], k) = 1.0;
  }
  // Re-evaluate both paths with the same summation so an unchanged path
  // predicts exactly zero; the accumulated dp value only picks the argmin.
  const double base_value = linear_path_cost(grad, base) + 2.0 * alpha * path_changes(base);
  const double chosen_value = linear_path_cost(grad, chosen) + 2.0 * alpha * path_changes(chosen);
  step.predicted_decrease = base_value - chosen_value;
  return step;
}

TrustRegionStep tr_subproblem_constrained(const ControlSequence& u_hat, const Eigen::MatrixXd& grad,
                                          int radius, const RoundingConstraint& constraint,
                                          double time_limit_seconds) {
  if (radius < 0) {
    throw std::invalid_argument("trust-region radius must be nonnegative");
  }
  if (!satisfies_constraint(u_hat, constraint)) {
    throw std::invalid_argument("the center point violates the switching constraint");
  }
  const std::vector<int> base = active_path(u_hat);
  if (grad.rows() != u_hat.n_controllers() || grad.cols() != u_hat.n_steps()) {
    throw std::invalid_argument("gradient shape does not match the controls");
  }
  const LinearPathResult sol =
      solve_linear_path(grad, base, radius / 2, constraint, time_limit_seconds);

  TrustRegionStep step;
  step.controls.dt = u_hat.dt;
  step.controls.values =
      Eigen::MatrixXd::Zero(u_hat.n_controllers(), u_hat.n_steps());
  for (int k = 0; k < u_hat.n_steps(); ++k) {
    step.controls.values(sol.active[static_cast<size_t>(k)], k) = 1.0;
  }
  step.predicted_decrease = linear_path_cost(grad, base) - linear_path_cost(grad, sol.active);
  return step;
}

std::pair<double, double> improvement_decreases(const QuantumInstance& inst,
                                                const ObjectiveSpec& spec,
                                                const ControlSequence& u_hat,
                                                const ControlSequence& u_bar,
                                                const Eigen::MatrixXd& grad,
                                                const ImproveMode& mode) {
  require_same_grid(u_hat, u_bar);
  const double linear_term = grad.cwiseProduct(u_hat.values - u_bar.values).sum();
  const double f_hat = objective_value(evolve(inst, u_hat), spec);
  const double f_bar = objective_value(evolve(inst, u_bar), spec);
  double predicted = linear_term;
  double actual = f_hat - f_bar;
  if (const auto* tv = std::get_if<TvMode>(&mode)) {
    const double tv_gap = tv->alpha * (tv_seminorm(u_hat) - tv_seminorm(u_bar));
    predicted += tv_gap;
    actual += tv_gap;
  }
  return {predicted, actual};
}

ImproveResult alb_improve(const QuantumInstance& inst, const ObjectiveSpec& spec,
                          const ControlSequence& u0, const ImproveMode& mode,
                          const TrustRegionConfig& config) {
  const auto start = Clock::now();
  if (config.r_bar < 1) {
    throw std::invalid_argument("the radius floor must be at least one");
  }
  if (const auto* constrained = std::get_if<ConstrainedMode>(&mode)) {
    if (!satisfies_constraint(u0, constrained->constraint)) {
      throw std::invalid_argument("starting point violates the switching constraint");
    }
  }
  active_path(u0);  // validates the one-hot binary shape

  const int t = u0.n_steps();
  const int r0 = config.r0 > 0 ? std::max(config.r0, config.r_bar)
                               : std::max((t + 4) / 5, config.r_bar);

  ControlSequence u = u0;
  SolveStatus status = SolveStatus::kMaxIterations;
  std::vector<ImproveStep> history;
  long long accepted_steps = 0;

  for (int outer = 0; outer < config.max_outer; ++outer) {
    const Eigen::MatrixXd grad = adjoint_gradient(inst, u, spec);
    int radius = r0;
    bool done = false;
    while (!done) {
      TrustRegionStep step;
      if (const auto* tv = std::get_if<TvMode>(&mode)) {
        step = tr_subproblem_tv(u, grad, tv->alpha, radius);
      } else {
        step = tr_subproblem_constrained(u, grad, radius,
                                         std::get<ConstrainedMode>(mode).constraint,
                                         config.subproblem_time_limit);
      }
      const auto [predicted, actual] = improvement_decreases(inst, spec, u, step.controls, grad, mode);
      history.push_back(ImproveStep{radius, predicted, actual, false});
      if (predicted <= 0.0) {
        // The linear model sees no descent inside the largest radius tried;
        // the incumbent is locally optimal for this model.
        status = SolveStatus::kConverged;
        done = true;
        break;
      }
      if (actual >= config.eta * predicted) {
        history.back().accepted = true;
        u = step.controls;
        ++accepted_steps;
        break;  // re-center and restart with the full radius
      }
      radius = radius > config.r_bar ? std::max(radius / 2, config.r_bar) : radius - 1;
      if (radius < 1) {
        status = SolveStatus::kStalled;
        done = true;
        break;
      }
    }
    if (done) break;
  }

  ImproveResult result;
  result.controls = u;
  result.report.stage = std::holds_alternative<TvMode>(mode) ? "improve:tv" : "improve:constrained";
  result.report.instance = inst.name;
  result.report.objective = objective_value(evolve(inst, u), spec);
  result.report.tv_value = tv_seminorm(u);
  result.report.sos1_penalty_value = sos1_penalty(u);
  result.report.iterations = accepted_steps;
  result.report.status = status;
  result.report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  result.report.improvement_history = std::move(history);
  return result;
}

}  // namespace qcp
