#include "qcpulse/verify.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <vector>

#include "qcpulse/alb.hpp"
#include "qcpulse/dynamics.hpp"
#include "qcpulse/instances.hpp"
#include "qcpulse/objectives.hpp"
#include "qcpulse/relax.hpp"
#include "qcpulse/rng.hpp"
#include "qcpulse/rounding.hpp"

namespace qcp {

namespace {

constexpr double kMatchTol = 1e-12;     // solver result vs exhaustive enumeration
constexpr double kUnitaryTol = 1e-10;   // propagator unitarity drift
constexpr double kGradientTol = 1e-5;   // adjoint vs finite differences, relative
constexpr double kGradientFloor = 1e-8; // absolute floor for tiny gradient entries
constexpr double kFdStep = 1e-6;

void add_check(VerifySuiteReport& report, const std::string& name, double value, double bound,
               double margin) {
  VerifyCheck check;
  check.name = name;
  check.value = value;
  check.bound = bound;
  check.margin = margin;
  check.pass = margin >= 0.0;
  report.checks.push_back(check);
}

void note_invariant(InvariantCounters& counters, bool held) {
  ++counters.checked;
  if (!held) ++counters.violated;
}

void finish(VerifySuiteReport& report) {
  report.all_pass = report.invariants.violated == 0;
  for (const VerifyCheck& check : report.checks) {
    report.all_pass = report.all_pass && check.pass;
  }
}

ControlSequence random_interior_controls(int n, int t, double dt, Rng& rng) {
  ControlSequence u;
  u.dt = dt;
  u.values = Eigen::MatrixXd(n, t);
  for (int k = 0; k < t; ++k) {
    for (int j = 0; j < n; ++j) u.values(j, k) = rng.uniform(0.05, 0.95);
  }
  return u;
}

Eigen::MatrixXd fd_gradient(const QuantumInstance& inst, const ControlSequence& u) {
  Eigen::MatrixXd grad(u.n_controllers(), u.n_steps());
  ControlSequence probe = u;
  for (int k = 0; k < u.n_steps(); ++k) {
    for (int j = 0; j < u.n_controllers(); ++j) {
      const double saved = probe.values(j, k);
      probe.values(j, k) = saved + kFdStep;
      const double up = objective_value(evolve(inst, probe), inst.objective);
      probe.values(j, k) = saved - kFdStep;
      const double down = objective_value(evolve(inst, probe), inst.objective);
      probe.values(j, k) = saved;
      grad(j, k) = (up - down) / (2.0 * kFdStep);
    }
  }
  return grad;
}

// Worst componentwise error as a fraction of the combined budget
// floor + tol * max(|a|, |b|), so values <= 1 are within tolerance.
double gradient_mismatch(const Eigen::MatrixXd& adjoint, const Eigen::MatrixXd& fd) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < adjoint.size(); ++i) {
    const double budget =
        kGradientFloor + kGradientTol * std::max(std::abs(adjoint(i)), std::abs(fd(i)));
    worst = std::max(worst, std::abs(adjoint(i) - fd(i)) / budget);
  }
  return worst;
}

std::vector<QuantumInstance> gradient_check_instances(std::uint64_t seed) {
  namespace fs = std::filesystem;
  std::vector<QuantumInstance> instances;
  instances.push_back(build_energy_instance(2, seed));
  instances.push_back(build_cnot_instance(5.0, 10));
  instances.push_back(build_not_instance(2.0, 10));
  const fs::path target =
      fs::temp_directory_path() / ("qcpulse-verify-target-" + std::to_string(seed) + ".txt");
  write_target_unitary(target.string(), random_unitary(4, seed + 1));
  instances.push_back(build_circuit_instance(2, {{1, 2}}, target.string(), 4.0, 10));
  fs::remove(target);
  instances.push_back(build_random_instance(1, 3, seed + 2, 1.0, 8));
  return instances;
}

ControlSequence path_controls(const std::vector<int>& active, int n, double dt) {
  ControlSequence u;
  u.dt = dt;
  u.values = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(active.size()));
  for (size_t k = 0; k < active.size(); ++k) {
    u.values(active[k], static_cast<Eigen::Index>(k)) = 1.0;
  }
  return u;
}

// Odometer over all N^T controller paths; returns false once exhausted.
bool next_path(std::vector<int>& path, int n) {
  for (size_t k = 0; k < path.size(); ++k) {
    if (++path[k] < n) return true;
    path[k] = 0;
  }
  return false;
}

double brute_force_cia(const ControlSequence& u_c, const RoundingConstraint& constraint) {
  std::vector<int> path(static_cast<size_t>(u_c.n_steps()), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    const ControlSequence u_b = path_controls(path, u_c.n_controllers(), u_c.dt);
    if (!satisfies_constraint(u_b, constraint)) continue;
    best = std::min(best, max_integral_deviation(u_c, u_b));
  } while (next_path(path, u_c.n_controllers()));
  return best;
}

double brute_force_linear(const Eigen::MatrixXd& cost, const std::vector<int>& base,
                          int max_changed, const RoundingConstraint& constraint, double dt) {
  std::vector<int> path(base.size(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    int changed = 0;
    for (size_t k = 0; k < path.size(); ++k) changed += path[k] != base[k] ? 1 : 0;
    if (changed > max_changed) continue;
    const ControlSequence u = path_controls(path, static_cast<int>(cost.rows()), dt);
    if (!satisfies_constraint(u, constraint)) continue;
    double value = 0.0;
    for (size_t k = 0; k < path.size(); ++k) value += cost(path[k], static_cast<Eigen::Index>(k));
    best = std::min(best, value);
  } while (next_path(path, static_cast<int>(cost.rows())));
  return best;
}

double brute_force_tv_decrease(const std::vector<int>& base, const Eigen::MatrixXd& grad,
                               double alpha, int radius) {
  const int n = static_cast<int>(grad.rows());
  auto model = [&](const std::vector<int>& path) {
    double value = 0.0;
    for (size_t k = 0; k < path.size(); ++k) value += grad(path[k], static_cast<Eigen::Index>(k));
    for (size_t k = 0; k + 1 < path.size(); ++k) {
      if (path[k] != path[k + 1]) value += 2.0 * alpha;
    }
    return value;
  };
  std::vector<int> path(base.size(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    int changed = 0;
    for (size_t k = 0; k < path.size(); ++k) changed += path[k] != base[k] ? 1 : 0;
    if (2 * changed > radius) continue;
    best = std::min(best, model(path));
  } while (next_path(path, n));
  return model(base) - best;
}

ControlSequence upsample_controls(const ControlSequence& u) {
  ControlSequence fine;
  fine.dt = u.dt / 2.0;
  fine.values = Eigen::MatrixXd(u.n_controllers(), 2 * u.n_steps());
  for (int k = 0; k < u.n_steps(); ++k) {
    fine.values.col(2 * k) = u.values.col(k);
    fine.values.col(2 * k + 1) = u.values.col(k);
  }
  return fine;
}

double objective_ceiling(const QuantumInstance& inst) {
  if (const auto* energy = std::get_if<EnergySpec>(&inst.objective)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(energy->hbar);
    return 1.0 - eig.eigenvalues().maxCoeff() / energy->e_min;
  }
  return 1.0;
}

}  // namespace

VerifySuiteReport verify_gradients(int points_per_family, std::uint64_t seed) {
  VerifySuiteReport report;
  report.suite = "gradients";
  Rng rng(seed);
  for (const QuantumInstance& inst : gradient_check_instances(seed)) {
    const int t = 10;
    const double dt = 0.2;
    double worst = 0.0;
    for (int p = 0; p < points_per_family; ++p) {
      const ControlSequence u = random_interior_controls(inst.n_controllers(), t, dt, rng);
      const Eigen::MatrixXd adjoint = adjoint_gradient(inst, u, inst.objective);
      const Eigen::MatrixXd fd = fd_gradient(inst, u);
      worst = std::max(worst, gradient_mismatch(adjoint, fd));
      const EvolutionTrace trace = evolve(inst, u);
      for (const Eigen::MatrixXcd& step : trace.propagators) {
        note_invariant(report.invariants, unitarity_error(step) <= kUnitaryTol);
      }
    }
    add_check(report, "grad-fd:" + inst.name, worst, 1.0, 1.0 - worst);
  }
  finish(report);
  return report;
}

VerifySuiteReport verify_rounding_bounds(int n_trials, std::uint64_t seed) {
  VerifySuiteReport report;
  report.suite = "rounding-bounds";
  Rng rng(seed);
  double worst_dev_gap = -std::numeric_limits<double>::infinity();
  double worst_floor_gap = -std::numeric_limits<double>::infinity();
  double worst_eps_gap = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < n_trials; ++trial) {
    const int n = rng.uniform_int(2, 4);
    const int t = rng.uniform_int(3, 12);
    const double dt = rng.uniform(0.05, 0.5);
    ControlSequence u_c;
    u_c.dt = dt;
    u_c.values = Eigen::MatrixXd(n, t);
    for (int k = 0; k < t; ++k) {
      for (int j = 0; j < n; ++j) u_c.values(j, k) = rng.uniform();
    }
    const ControlSequence u_b = sum_up_rounding(u_c);
    note_invariant(report.invariants, is_binary(u_b) && satisfies_sos1(u_b));
    const BoundCertificate cert = bound_certificate(u_c, u_b);
    worst_dev_gap = std::max(worst_dev_gap, cert.max_deviation - cert.sur_deviation_bound);
    worst_floor_gap = std::max(worst_floor_gap, cert.epsilon / n - cert.max_deviation);
    worst_eps_gap = std::max(worst_eps_gap, cert.epsilon - cert.epsilon_bound);
  }
  add_check(report, "sur-deviation-ceiling", worst_dev_gap, 0.0, -worst_dev_gap);
  add_check(report, "deviation-floor", worst_floor_gap, 0.0, -worst_floor_gap);
  add_check(report, "drift-ceiling", worst_eps_gap, 0.0, -worst_eps_gap);
  finish(report);
  return report;
}

VerifySuiteReport verify_oracle_equivalence(std::uint64_t seed) {
  VerifySuiteReport report;
  report.suite = "oracle-equivalence";
  Rng rng(seed);

  struct SearchCase {
    int n;
    int t;
    RoundingConstraint constraint;
  };
  const std::vector<SearchCase> cases = {
      {2, 5, Unconstrained{}}, {2, 6, MinUpTime{2}},   {3, 5, MinUpTime{3}},
      {2, 6, MaxSwitching{1}}, {3, 5, MaxSwitching{2}},
  };
  double worst_cia = 0.0;
  double worst_linear = 0.0;
  double worst_tv = 0.0;
  for (const SearchCase& sc : cases) {
    for (int repeat = 0; repeat < 3; ++repeat) {
      ControlSequence u_c;
      u_c.dt = rng.uniform(0.1, 0.4);
      u_c.values = Eigen::MatrixXd(sc.n, sc.t);
      for (int k = 0; k < sc.t; ++k) {
        for (int j = 0; j < sc.n; ++j) u_c.values(j, k) = rng.uniform();
      }
      const CiaResult cia = cia_round(u_c, sc.constraint);
      note_invariant(report.invariants, is_binary(cia.controls) && satisfies_sos1(cia.controls));
      note_invariant(report.invariants, satisfies_constraint(cia.controls, sc.constraint));
      worst_cia = std::max(worst_cia,
                           std::abs(cia.objective - brute_force_cia(u_c, sc.constraint)));

      Eigen::MatrixXd cost(sc.n, sc.t);
      for (int k = 0; k < sc.t; ++k) {
        for (int j = 0; j < sc.n; ++j) cost(j, k) = rng.normal();
      }
      const std::vector<int> base(static_cast<size_t>(sc.t), 0);
      const int budget = rng.uniform_int(0, sc.t);
      const LinearPathResult lin = solve_linear_path(cost, base, budget, sc.constraint);
      const ControlSequence lin_controls = path_controls(lin.active, sc.n, u_c.dt);
      int changed = 0;
      for (int k = 0; k < sc.t; ++k) changed += lin.active[static_cast<size_t>(k)] != 0 ? 1 : 0;
      note_invariant(report.invariants, changed <= budget);
      note_invariant(report.invariants, satisfies_constraint(lin_controls, sc.constraint));
      worst_linear = std::max(
          worst_linear,
          std::abs(lin.objective - brute_force_linear(cost, base, budget, sc.constraint, u_c.dt)));
    }
  }

  for (int repeat = 0; repeat < 10; ++repeat) {
    const int n = rng.uniform_int(2, 3);
    const int t = rng.uniform_int(4, 6);
    std::vector<int> base(static_cast<size_t>(t));
    for (int k = 0; k < t; ++k) base[static_cast<size_t>(k)] = rng.uniform_int(0, n - 1);
    Eigen::MatrixXd grad(n, t);
    for (int k = 0; k < t; ++k) {
      for (int j = 0; j < n; ++j) grad(j, k) = rng.normal();
    }
    const double alpha = repeat % 2 == 0 ? 0.0 : 0.3;
    const int radius = rng.uniform_int(0, 2 * t);
    const ControlSequence u_hat = path_controls(base, n, 0.1);
    const TrustRegionStep step = tr_subproblem_tv(u_hat, grad, alpha, radius);
    note_invariant(report.invariants, is_binary(step.controls) && satisfies_sos1(step.controls));
    int flips = 0;
    for (int k = 0; k < t; ++k) {
      for (int j = 0; j < n; ++j) {
        flips += step.controls.values(j, k) != u_hat.values(j, k) ? 1 : 0;
      }
    }
    note_invariant(report.invariants, flips <= radius);
    worst_tv = std::max(worst_tv, std::abs(step.predicted_decrease -
                                           brute_force_tv_decrease(base, grad, alpha, radius)));
  }

  add_check(report, "cia-vs-enumeration", worst_cia, kMatchTol, kMatchTol - worst_cia);
  add_check(report, "linear-path-vs-enumeration", worst_linear, kMatchTol, kMatchTol - worst_linear);
  add_check(report, "tv-subproblem-vs-enumeration", worst_tv, kMatchTol, kMatchTol - worst_tv);
  finish(report);
  return report;
}

VerifySuiteReport verify_tables() {
  VerifySuiteReport report;
  report.suite = "tables";

  // Relaxation quality, rounding gap, and local-branching improvement on the
  // two-qubit energy instance.
  const QuantumInstance energy = build_energy_instance(2, 0);
  PenaltyConfig substitution;
  substitution.alpha = 0.0;
  substitution.rho = 0.0;
  substitution.sos1_mode = Sos1Mode::kSubstitutedTwoControl;
  const ControlSequence x0 = make_constant_controls(2, 40, 2.0 / 40, 0.5);
  const RelaxResult relaxed = pgrape_solve(energy, energy.objective, substitution, x0);
  add_check(report, "energy-q2-relaxed-objective", relaxed.report.objective, 1e-6,
            1e-6 - relaxed.report.objective);

  const ControlSequence sur = sum_up_rounding(relaxed.controls);
  note_invariant(report.invariants, is_binary(sur) && satisfies_sos1(sur));
  const double f_sur = objective_value(evolve(energy, sur), energy.objective);
  add_check(report, "energy-q2-sur-objective", f_sur, 5e-3, 5e-3 - f_sur);

  const RoundingConstraint max_switch = MaxSwitching{energy.defaults.s_max};
  const CiaResult cia = cia_round(relaxed.controls, max_switch);
  note_invariant(report.invariants, satisfies_constraint(cia.controls, max_switch));
  const double f_cia = objective_value(evolve(energy, cia.controls), energy.objective);
  const ImproveResult improved = alb_improve(energy, energy.objective, cia.controls,
                                             ConstrainedMode{max_switch}, TrustRegionConfig{});
  note_invariant(report.invariants, satisfies_constraint(improved.controls, max_switch));
  for (const ImproveStep& step : improved.report.improvement_history) {
    note_invariant(report.invariants, !step.accepted || step.actual_decrease >= 0.0);
  }
  add_check(report, "energy-q2-alb-decrease", improved.report.objective - f_cia, 0.0,
            f_cia - improved.report.objective);

  // Drift decay in the step count: the accumulated one-hot drift of the
  // penalized relaxation shrinks as the grid refines, warm starting each grid
  // from the previous solution.
  PenaltyConfig penalized;
  penalized.alpha = 0.0;
  penalized.rho = energy.defaults.rho;
  penalized.sos1_mode = Sos1Mode::kPenalized;
  report.series_columns = {"n_steps", "drift_epsilon", "rho", "sos1_penalty"};
  ControlSequence chain = make_constant_controls(2, 20, 2.0 / 20, 0.5);
  double previous_eps = std::numeric_limits<double>::infinity();
  double worst_eps_rise = -std::numeric_limits<double>::infinity();
  for (const int t : {20, 40, 80, 160}) {
    if (chain.n_steps() != t) chain = upsample_controls(chain);
    const RelaxResult stage = pgrape_solve(energy, energy.objective, penalized, chain);
    chain = stage.controls;
    const double eps = sos1_drift_epsilon(stage.controls);
    report.series_rows.push_back({static_cast<double>(t), eps, 0.0, 0.0});
    worst_eps_rise = std::max(worst_eps_rise, eps - previous_eps);
    previous_eps = eps;
  }
  add_check(report, "drift-decay-in-steps", worst_eps_rise, 0.0, -worst_eps_rise);

  // Penalty decay in rho: the one-hot gap obeys l <= 2 C_F / rho and shrinks
  // as the penalty weight grows.
  const double ceiling = objective_ceiling(energy);
  ControlSequence rho_chain = make_constant_controls(2, 40, 2.0 / 40, 0.5);
  double previous_l = std::numeric_limits<double>::infinity();
  double worst_bound_gap = -std::numeric_limits<double>::infinity();
  double worst_l_rise = -std::numeric_limits<double>::infinity();
  for (const double rho : {0.1, 1.0, 10.0}) {
    PenaltyConfig config = penalized;
    config.rho = rho;
    const RelaxResult stage = pgrape_solve(energy, energy.objective, config, rho_chain);
    rho_chain = stage.controls;
    const double l = sos1_penalty(stage.controls);
    report.series_rows.push_back({0.0, 0.0, rho, l});
    worst_bound_gap = std::max(worst_bound_gap, l - 2.0 * ceiling / rho);
    worst_l_rise = std::max(worst_l_rise, l - previous_l);
    previous_l = l;
  }
  add_check(report, "sos1-penalty-ceiling", worst_bound_gap, 0.0, -worst_bound_gap);
  add_check(report, "sos1-penalty-decay-in-rho", worst_l_rise, 0.0, -worst_l_rise);

  finish(report);
  return report;
}

nlohmann::ordered_json verify_report_to_json(const VerifySuiteReport& report) {
  nlohmann::ordered_json out;
  out["suite"] = report.suite;
  out["all_pass"] = report.all_pass;
  out["checks"] = nlohmann::ordered_json::array();
  for (const VerifyCheck& check : report.checks) {
    nlohmann::ordered_json entry;
    entry["name"] = check.name;
    entry["value"] = check.value;
    entry["bound"] = check.bound;
    entry["margin"] = check.margin;
    entry["pass"] = check.pass;
    out["checks"].push_back(entry);
  }
  out["invariants"] = {{"checked", report.invariants.checked},
                       {"violated", report.invariants.violated}};
  if (!report.series_rows.empty()) {
    out["series"] = nlohmann::ordered_json::object();
    out["series"]["columns"] = report.series_columns;
    out["series"]["rows"] = report.series_rows;
  }
  return out;
}

}  // namespace qcp
