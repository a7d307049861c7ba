#include "qcpulse/bound_lbfgs.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace qcp {

namespace {

constexpr double kActiveTol = 1e-10;   // distance to a bound that counts as "at" it
constexpr double kCurvatureTol = 1e-10;

Eigen::VectorXd clamp(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                      const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

struct Pair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double inv_sy = 0.0;
};

// Standard two-loop recursion, applied to the gradient restricted to the
// free variables (the caller zeroes the active components).
Eigen::VectorXd two_loop_direction(const std::deque<Pair>& pairs, const Eigen::VectorXd& g) {
  Eigen::VectorXd q = g;
  std::vector<double> a(pairs.size());
  for (size_t i = pairs.size(); i-- > 0;) {
    a[i] = pairs[i].inv_sy * pairs[i].s.dot(q);
    q -= a[i] * pairs[i].y;
  }
  if (!pairs.empty()) {
    const Pair& last = pairs.back();
    const double yy = last.y.squaredNorm();
    if (yy > 0.0) {
      q *= last.y.dot(last.s) / yy;
    }
  }
  for (size_t i = 0; i < pairs.size(); ++i) {
    const double b = pairs[i].inv_sy * pairs[i].y.dot(q);
    q += (a[i] - b) * pairs[i].s;
  }
  return -q;
}

}  // namespace

BoundLbfgsResult bound_lbfgs_minimize(const BoxObjective& objective, const Eigen::VectorXd& x0,
                                      const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                      const BoundLbfgsConfig& config) {
  const Eigen::Index n = x0.size();
  if (lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("bound vectors must match the variable count");
  }
  if ((upper - lower).minCoeff() < 0.0) {
    throw std::invalid_argument("lower bound exceeds upper bound");
  }

  Eigen::VectorXd x = clamp(x0, lower, upper);
  Eigen::VectorXd g(n);
  double f = objective(x, &g);
  if (config.on_accept) config.on_accept(x, f);

  std::deque<Pair> pairs;
  BoundLbfgsResult result;
  result.status = SolveStatus::kMaxIterations;

  const auto projected_gradient = [&]() {
    Eigen::VectorXd pg = g;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (x[i] <= lower[i] + kActiveTol && g[i] > 0.0) pg[i] = 0.0;
      if (x[i] >= upper[i] - kActiveTol && g[i] < 0.0) pg[i] = 0.0;
    }
    return pg;
  };

  int iter = 0;
  for (; iter < config.max_iterations; ++iter) {
    const Eigen::VectorXd pg = projected_gradient();
    result.projected_gradient_norm = pg.lpNorm<Eigen::Infinity>();
    if (result.projected_gradient_norm <= config.projected_gradient_tol) {
      result.status = SolveStatus::kConverged;
      break;
    }

    // Variables pressed against a bound by the gradient stay fixed for this
    // iteration; the quasi-Newton model only steers the free ones.
    std::vector<bool> active(static_cast<size_t>(n), false);
    Eigen::VectorXd masked = g;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lower = x[i] <= lower[i] + kActiveTol && g[i] > 0.0;
      const bool at_upper = x[i] >= upper[i] - kActiveTol && g[i] < 0.0;
      if (at_lower || at_upper) {
        active[static_cast<size_t>(i)] = true;
        masked[i] = 0.0;
      }
    }

    Eigen::VectorXd direction = two_loop_direction(pairs, masked);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (active[static_cast<size_t>(i)]) direction[i] = 0.0;
    }
    if (masked.dot(direction) >= 0.0) {
      direction = -masked;  // quasi-Newton model lost descent, fall back
    }

    // Backtracking Armijo search along the projected path x(a) = P(x + a d).
    // A rejected quasi-Newton direction gets one retry with plain steepest
    // descent and a cleared memory before the solver gives up.
    bool accepted = false;
    Eigen::VectorXd x_next;
    double f_next = f;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      double alpha = 1.0;
      for (int trial = 0; trial < config.max_line_search_trials; ++trial) {
        Eigen::VectorXd candidate = clamp(x + alpha * direction, lower, upper);
        const Eigen::VectorXd delta = candidate - x;
        const double gd = g.dot(delta);
        if (delta.lpNorm<Eigen::Infinity>() == 0.0) break;
        if (gd < 0.0) {
          const double fc = objective(candidate, nullptr);
          if (fc <= f + config.armijo_c1 * gd) {
            x_next = std::move(candidate);
            f_next = fc;
            accepted = true;
            break;
          }
        }
        alpha *= config.backtrack_factor;
      }
      if (!accepted && attempt == 0) {
        pairs.clear();
        direction = -masked;
      }
    }
    if (!accepted) {
      result.status = SolveStatus::kStalled;
      break;
    }

    Eigen::VectorXd g_next(n);
    objective(x_next, &g_next);

    const Eigen::VectorXd s = x_next - x;
    const Eigen::VectorXd y = g_next - g;
    const double sy = s.dot(y);
    if (sy > kCurvatureTol * s.norm() * y.norm()) {
      pairs.push_back(Pair{s, y, 1.0 / sy});
      if (static_cast<int>(pairs.size()) > config.memory) pairs.pop_front();
    }

    x = std::move(x_next);
    f = f_next;
    g = std::move(g_next);
    if (config.on_accept) config.on_accept(x, f);
  }

  if (result.status != SolveStatus::kConverged) {
    result.projected_gradient_norm = projected_gradient().lpNorm<Eigen::Infinity>();
  }
  result.x = std::move(x);
  result.value = f;
  result.iterations = iter;
  return result;
}

}  // namespace qcp
