#include "qcpulse/rounding.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qcp {

namespace {

using Clock = std::chrono::steady_clock;

constexpr long long kTimeCheckStride = 4096;

// Switching-constraint bookkeeping along a one-hot path.  A change of the
// active controller at slot k (between steps k and k+1, slots 1-based) adds a
// switch to both controllers involved.  For one-hot sequences the window
// constraint "at most one switch per controller in any t_minup consecutive
// slots" is equivalent to consecutive change slots being at least t_minup
// apart, because the controller active between two changes is part of both.
struct SwitchRules {
  bool minup = false;
  int t_minup = 1;
  bool max_switch = false;
  int s_max = 0;

  explicit SwitchRules(const RoundingConstraint& constraint, int n_steps) {
    if (const auto* mt = std::get_if<MinUpTime>(&constraint)) {
      if (mt->t_minup < 1 || mt->t_minup > n_steps) {
        throw std::invalid_argument("min up time must lie in 1..T");
      }
      // t_minup = T leaves no complete window, so nothing is constrained.
      minup = mt->t_minup < n_steps;
      t_minup = mt->t_minup;
    } else if (const auto* ms = std::get_if<MaxSwitching>(&constraint)) {
      if (ms->s_max < 0) {
        throw std::invalid_argument("max switching count must be nonnegative");
      }
      max_switch = true;
      s_max = ms->s_max;
    }
  }

  bool allows(int from, int to, int slot, int last_change_slot,
              const std::vector<int>& counts) const {
    if (minup && last_change_slot != 0 && slot - last_change_slot < t_minup) return false;
    if (max_switch && (counts[static_cast<size_t>(from)] + 1 > s_max ||
                       counts[static_cast<size_t>(to)] + 1 > s_max)) {
      return false;
    }
    return true;
  }
};

ControlSequence path_to_controls(const std::vector<int>& active, int n, double dt) {
  ControlSequence u;
  u.dt = dt;
  u.values = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(active.size()));
  for (size_t k = 0; k < active.size(); ++k) {
    u.values(active[k], static_cast<Eigen::Index>(k)) = 1.0;
  }
  return u;
}

}  // namespace

int switch_count(const ControlSequence& u, int controller) {
  int count = 0;
  for (int k = 0; k + 1 < u.n_steps(); ++k) {
    if (u.values(controller, k) != u.values(controller, k + 1)) ++count;
  }
  return count;
}

bool satisfies_constraint(const ControlSequence& u, const RoundingConstraint& constraint) {
  const int n = u.n_controllers();
  const int t = u.n_steps();
  if (std::holds_alternative<Unconstrained>(constraint)) return true;
  if (const auto* mt = std::get_if<MinUpTime>(&constraint)) {
    // Window transcription: at most one change per controller in any
    // t_minup consecutive slots, windows starting at slots 1..T-t_minup.
    for (int j = 0; j < n; ++j) {
      for (int start = 0; start + mt->t_minup <= t - 1; ++start) {
        int changes = 0;
        for (int k = start; k < start + mt->t_minup; ++k) {
          if (u.values(j, k) != u.values(j, k + 1)) ++changes;
        }
        if (changes > 1) return false;
      }
    }
    return true;
  }
  const auto& ms = std::get<MaxSwitching>(constraint);
  for (int j = 0; j < n; ++j) {
    if (switch_count(u, j) > ms.s_max) return false;
  }
  return true;
}

ControlSequence sum_up_rounding(const ControlSequence& u_c) {
  const int n = u_c.n_controllers();
  const int t = u_c.n_steps();
  ControlSequence u_b;
  u_b.dt = u_c.dt;
  u_b.values = Eigen::MatrixXd::Zero(n, t);
  Eigen::VectorXd deviation = Eigen::VectorXd::Zero(n);  // accumulated (u_c - u_b), dt factored out
  for (int k = 0; k < t; ++k) {
    deviation += u_c.values.col(k);
    int best = 0;
    for (int j = 1; j < n; ++j) {
      if (deviation[j] > deviation[best]) best = j;  // ties keep the smaller index
    }
    u_b.values(best, k) = 1.0;
    deviation[best] -= 1.0;
  }
  return u_b;
}

double sos1_drift_epsilon(const ControlSequence& u_c) {
  double cum = 0.0;
  double worst = 0.0;
  for (int k = 0; k < u_c.n_steps(); ++k) {
    cum += u_c.values.col(k).sum() - 1.0;
    worst = std::max(worst, std::abs(cum));
  }
  return worst * u_c.dt;
}

double max_integral_deviation(const ControlSequence& u_c, const ControlSequence& u_b) {
  require_same_grid(u_c, u_b);
  Eigen::VectorXd cum = Eigen::VectorXd::Zero(u_c.n_controllers());
  double worst = 0.0;
  for (int k = 0; k < u_c.n_steps(); ++k) {
    cum += u_c.values.col(k) - u_b.values.col(k);
    worst = std::max(worst, cum.cwiseAbs().maxCoeff());
  }
  return worst * u_c.dt;
}

BoundCertificate bound_certificate(const ControlSequence& u_c, const ControlSequence& u_b) {
  const double n = static_cast<double>(u_c.n_controllers());
  double penalty = 0.0;
  for (int k = 0; k < u_c.n_steps(); ++k) {
    const double gap = u_c.values.col(k).sum() - 1.0;
    penalty += gap * gap;
  }
  BoundCertificate cert;
  cert.epsilon = sos1_drift_epsilon(u_c);
  cert.max_deviation = max_integral_deviation(u_c, u_b);
  cert.sur_deviation_bound = (n - 1.0) * u_c.dt + (2.0 * n - 1.0) / n * cert.epsilon;
  cert.epsilon_bound = std::sqrt(u_c.total_time() * penalty * u_c.dt);
  cert.sos1_penalty_value = penalty;
  return cert;
}

namespace {

// Depth-first search state shared by the min-max deviation search and the
// linear-cost search.  Per-level buffers avoid undo arithmetic so revisiting
// a level restores state bit-exactly.
struct CiaSearch {
  const Eigen::MatrixXd& u_c;
  int n = 0;
  int t = 0;
  SwitchRules rules;
  Clock::time_point deadline;
  bool timed_out = false;
  long long nodes = 0;

  std::vector<std::vector<double>> deviation;  // deviation[k] after k steps
  std::vector<std::vector<int>> counts;        // switch counts after k steps
  std::vector<int> last_change;                // change slot in effect at level k
  std::vector<int> path;
  std::vector<int> best_path;
  double best_objective = std::numeric_limits<double>::infinity();

  CiaSearch(const Eigen::MatrixXd& values, const RoundingConstraint& constraint,
            Clock::time_point deadline_in)
      : u_c(values),
        n(static_cast<int>(values.rows())),
        t(static_cast<int>(values.cols())),
        rules(constraint, static_cast<int>(values.cols())),
        deadline(deadline_in) {
    deviation.assign(static_cast<size_t>(t) + 1, std::vector<double>(static_cast<size_t>(n), 0.0));
    counts.assign(static_cast<size_t>(t) + 1, std::vector<int>(static_cast<size_t>(n), 0));
    last_change.assign(static_cast<size_t>(t) + 1, 0);
    path.assign(static_cast<size_t>(t), 0);
  }

  bool out_of_time() {
    if (timed_out) return true;
    if (++nodes % kTimeCheckStride == 0 && !best_path.empty() && Clock::now() > deadline) {
      timed_out = true;
    }
    return timed_out;
  }

  void dfs(int k, double objective_so_far) {
    if (k == t) {
      if (objective_so_far < best_objective) {
        best_objective = objective_so_far;
        best_path = path;
      }
      return;
    }
    const size_t level = static_cast<size_t>(k);
    // Candidate order follows the sum-up-rounding preference: largest
    // accumulated forward deviation first, so the first dive is the plain
    // rounding and every later branch starts from a good incumbent.
    std::vector<std::pair<double, int>> order;
    order.reserve(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
      order.emplace_back(deviation[level][static_cast<size_t>(j)] + u_c(j, k), j);
    }
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });

    for (const auto& [phat, j] : order) {
      (void)phat;
      const int prev = k > 0 ? path[level - 1] : -1;
      const bool changes = k > 0 && j != prev;
      if (changes && !rules.allows(prev, j, k, last_change[level], counts[level])) continue;
      if (out_of_time()) return;

      double local_max = 0.0;
      for (int jj = 0; jj < n; ++jj) {
        const double d = deviation[level][static_cast<size_t>(jj)] + u_c(jj, k) -
                         (jj == j ? 1.0 : 0.0);
        deviation[level + 1][static_cast<size_t>(jj)] = d;
        local_max = std::max(local_max, std::abs(d));
      }
      const double objective = std::max(objective_so_far, local_max);
      if (objective >= best_objective) continue;  // cannot strictly improve

      counts[level + 1] = counts[level];
      last_change[level + 1] = last_change[level];
      if (changes) {
        ++counts[level + 1][static_cast<size_t>(prev)];
        ++counts[level + 1][static_cast<size_t>(j)];
        last_change[level + 1] = k;
      }
      path[level] = j;
      dfs(k + 1, objective);
      if (timed_out) return;
    }
  }
};

}  // namespace

CiaResult cia_round(const ControlSequence& u_c, const RoundingConstraint& constraint,
                    double time_limit_seconds) {
  if (u_c.n_controllers() < 1 || u_c.n_steps() < 1) {
    throw std::invalid_argument("rounding needs a nonempty control sequence");
  }
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(time_limit_seconds));
  CiaSearch search(u_c.values, constraint, deadline);
  search.dfs(0, 0.0);

  CiaResult result;
  result.controls = path_to_controls(search.best_path, u_c.n_controllers(), u_c.dt);
  result.objective = search.best_objective * u_c.dt;
  result.nodes = search.nodes;
  result.status = search.timed_out ? SolveStatus::kTimeLimit : SolveStatus::kConverged;
  return result;
}

namespace {

struct LinearSearch {
  const Eigen::MatrixXd& cost;
  const std::vector<int>& base;
  int n = 0;
  int t = 0;
  int max_changes = 0;
  SwitchRules rules;
  Clock::time_point deadline;
  bool timed_out = false;
  long long nodes = 0;

  std::vector<double> suffix_min;   // best per-step cost from step k on
  std::vector<double> suffix_base;  // cost of following the base path from k on
  std::vector<std::vector<int>> counts;
  std::vector<int> last_change;
  std::vector<int> path;
  std::vector<int> best_path;
  double best_objective = std::numeric_limits<double>::infinity();

  LinearSearch(const Eigen::MatrixXd& cost_in, const std::vector<int>& base_in, int max_changes_in,
               const RoundingConstraint& constraint, Clock::time_point deadline_in)
      : cost(cost_in),
        base(base_in),
        n(static_cast<int>(cost_in.rows())),
        t(static_cast<int>(cost_in.cols())),
        max_changes(max_changes_in),
        rules(constraint, static_cast<int>(cost_in.cols())),
        deadline(deadline_in) {
    suffix_min.assign(static_cast<size_t>(t) + 1, 0.0);
    suffix_base.assign(static_cast<size_t>(t) + 1, 0.0);
    for (int k = t - 1; k >= 0; --k) {
      suffix_min[static_cast<size_t>(k)] =
          suffix_min[static_cast<size_t>(k) + 1] + cost.col(k).minCoeff();
      suffix_base[static_cast<size_t>(k)] =
          suffix_base[static_cast<size_t>(k) + 1] + cost(base[static_cast<size_t>(k)], k);
    }
    counts.assign(static_cast<size_t>(t) + 1, std::vector<int>(static_cast<size_t>(n), 0));
    last_change.assign(static_cast<size_t>(t) + 1, 0);
    path.assign(static_cast<size_t>(t), 0);
  }

  bool out_of_time() {
    if (timed_out) return true;
    if (++nodes % kTimeCheckStride == 0 && !best_path.empty() && Clock::now() > deadline) {
      timed_out = true;
    }
    return timed_out;
  }

  // With the change budget exhausted the only completion is the base path;
  // validate its switches and close the node with an exact value.
  void close_with_base(int k, double acc) {
    int prev = k > 0 ? path[static_cast<size_t>(k) - 1] : -1;
    std::vector<int> local_counts = counts[static_cast<size_t>(k)];
    int local_last = last_change[static_cast<size_t>(k)];
    for (int kk = k; kk < t; ++kk) {
      const int j = base[static_cast<size_t>(kk)];
      if (kk > 0 && j != prev) {
        if (!rules.allows(prev, j, kk, local_last, local_counts)) return;
        ++local_counts[static_cast<size_t>(prev)];
        ++local_counts[static_cast<size_t>(j)];
        local_last = kk;
      }
      prev = j;
    }
    const double value = acc + suffix_base[static_cast<size_t>(k)];
    if (value < best_objective) {
      best_objective = value;
      best_path.assign(path.begin(), path.begin() + k);
      best_path.insert(best_path.end(), base.begin() + k, base.end());
    }
  }

  void dfs(int k, double acc, int changes_used) {
    if (k == t) {
      if (acc < best_objective) {
        best_objective = acc;
        best_path = path;
      }
      return;
    }
    const size_t level = static_cast<size_t>(k);
    if (changes_used == max_changes) {
      close_with_base(k, acc);
      return;
    }
    if (acc + suffix_min[level] >= best_objective) return;

    std::vector<std::pair<double, int>> order;
    order.reserve(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) {
      order.emplace_back(cost(j, k), j);
    }
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      return a.second < b.second;
    });

    for (const auto& [step_cost, j] : order) {
      const int used = changes_used + (j != base[level] ? 1 : 0);
      if (used > max_changes) continue;
      const int prev = k > 0 ? path[level - 1] : -1;
      const bool switches = k > 0 && j != prev;
      if (switches && !rules.allows(prev, j, k, last_change[level], counts[level])) continue;
      if (acc + step_cost + suffix_min[level + 1] >= best_objective) continue;
      if (out_of_time()) return;

      counts[level + 1] = counts[level];
      last_change[level + 1] = last_change[level];
      if (switches) {
        ++counts[level + 1][static_cast<size_t>(prev)];
        ++counts[level + 1][static_cast<size_t>(j)];
        last_change[level + 1] = k;
      }
      path[level] = j;
      dfs(k + 1, acc + step_cost, used);
      if (timed_out) return;
    }
  }
};

}  // namespace

LinearPathResult solve_linear_path(const Eigen::MatrixXd& cost, const std::vector<int>& base_active,
                                   int max_changed_steps, const RoundingConstraint& constraint,
                                   double time_limit_seconds) {
  const int t = static_cast<int>(cost.cols());
  if (static_cast<int>(base_active.size()) != t) {
    throw std::invalid_argument("base path length must match the cost columns");
  }
  if (max_changed_steps < 0) {
    throw std::invalid_argument("change budget must be nonnegative");
  }
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(time_limit_seconds));
  LinearSearch search(cost, base_active, max_changed_steps, constraint, deadline);
  // Seed the incumbent with the base path so a timeout can always fall back
  // to a feasible solution.
  search.close_with_base(0, 0.0);
  search.dfs(0, 0.0, 0);
  if (search.best_path.empty() && t > 0) {
    throw std::runtime_error("no feasible path within the change budget");
  }

  LinearPathResult result;
  result.active = search.best_path;
  result.objective = search.best_objective;
  result.nodes = search.nodes;
  result.status = search.timed_out ? SolveStatus::kTimeLimit : SolveStatus::kConverged;
  return result;
}

}  // namespace qcp
