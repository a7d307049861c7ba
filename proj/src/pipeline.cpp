#include "qcpulse/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qcpulse/dynamics.hpp"
#include "qcpulse/objectives.hpp"

namespace qcp {

namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void bad_key(const std::string& section, const std::string& key) {
  throw std::runtime_error("unknown key '" + key + "' in [" + section + "]");
}

[[noreturn]] void bad_value(const std::string& section, const std::string& key,
                            const std::string& value) {
  throw std::runtime_error("bad value '" + value + "' for '" + key + "' in [" + section + "]");
}

int to_int(const std::string& section, const std::string& key, const std::string& value) {
  try {
    size_t consumed = 0;
    const int parsed = std::stoi(value, &consumed);
    if (consumed != value.size()) bad_value(section, key, value);
    return parsed;
  } catch (const std::logic_error&) {
    bad_value(section, key, value);
  }
}

std::uint64_t to_u64(const std::string& section, const std::string& key, const std::string& value) {
  try {
    size_t consumed = 0;
    const unsigned long long parsed = std::stoull(value, &consumed);
    if (consumed != value.size()) bad_value(section, key, value);
    return parsed;
  } catch (const std::logic_error&) {
    bad_value(section, key, value);
  }
}

double to_double(const std::string& section, const std::string& key, const std::string& value) {
  try {
    size_t consumed = 0;
    const double parsed = std::stod(value, &consumed);
    if (consumed != value.size()) bad_value(section, key, value);
    return parsed;
  } catch (const std::logic_error&) {
    bad_value(section, key, value);
  }
}

bool to_bool(const std::string& section, const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  bad_value(section, key, value);
}

std::vector<CircuitEdge> parse_edges(const std::string& value) {
  std::vector<CircuitEdge> edges;
  std::istringstream stream(value);
  std::string token;
  while (std::getline(stream, token, ',')) {
    const size_t dash = token.find('-');
    if (dash == std::string::npos) {
      throw std::runtime_error("edges must look like '1-2,2-3', got '" + token + "'");
    }
    CircuitEdge edge;
    edge.a = to_int("instance", "edges", token.substr(0, dash));
    edge.b = to_int("instance", "edges", token.substr(dash + 1));
    edges.push_back(edge);
  }
  return edges;
}

Sos1Mode parse_sos1_mode(const std::string& value) {
  if (value == "penalized") return Sos1Mode::kPenalized;
  if (value == "substitution") return Sos1Mode::kSubstitutedTwoControl;
  if (value == "off") return Sos1Mode::kOff;
  bad_value("relax", "sos1", value);
}

void parse_instance_section(const std::map<std::string, std::string>& kv, InstanceConfig& cfg) {
  for (const auto& [key, value] : kv) {
    if (key == "family") {
      cfg.family = value;
    } else if (key == "q") {
      cfg.q = to_int("instance", key, value);
    } else if (key == "seed") {
      cfg.seed = to_u64("instance", key, value);
    } else if (key == "t_f") {
      cfg.t_f = to_double("instance", key, value);
    } else if (key == "n_steps") {
      cfg.n_steps = to_int("instance", key, value);
    } else if (key == "alpha") {
      cfg.alpha = to_double("instance", key, value);
    } else if (key == "t_minup") {
      cfg.t_minup = to_int("instance", key, value);
    } else if (key == "s_max") {
      cfg.s_max = to_int("instance", key, value);
    } else if (key == "rho") {
      cfg.rho = to_double("instance", key, value);
    } else if (key == "target") {
      cfg.target_path = value;
    } else if (key == "edges") {
      cfg.edges = parse_edges(value);
    } else if (key == "n_controllers") {
      cfg.n_controllers = to_int("instance", key, value);
    } else {
      bad_key("instance", key);
    }
  }
  static const std::set<std::string> families = {"energy", "cnot", "not", "circuit", "synthetic"};
  if (families.count(cfg.family) == 0) {
    bad_value("instance", "family", cfg.family);
  }
}

void parse_relax_section(const std::map<std::string, std::string>& kv, RelaxStageConfig& cfg) {
  for (const auto& [key, value] : kv) {
    if (key == "method") {
      if (value != "pgrape" && value != "admm") bad_value("relax", key, value);
      cfg.method = value;
    } else if (key == "sos1") {
      cfg.sos1_mode = parse_sos1_mode(value);
    } else if (key == "x0") {
      cfg.x0_value = to_double("relax", key, value);
    } else if (key == "warm_start") {
      cfg.warm_start = to_bool("relax", key, value);
    } else if (key == "max_iterations") {
      cfg.qn.max_iterations = to_int("relax", key, value);
    } else if (key == "tol") {
      cfg.qn.projected_gradient_tol = to_double("relax", key, value);
    } else if (key == "memory") {
      cfg.qn.memory = to_int("relax", key, value);
    } else if (key == "admm_beta") {
      cfg.admm_beta = to_double("relax", key, value);
    } else if (key == "admm_residual_tol") {
      cfg.admm_residual_tol = to_double("relax", key, value);
    } else if (key == "admm_max_outer") {
      cfg.admm_max_outer = to_int("relax", key, value);
    } else {
      bad_key("relax", key);
    }
  }
}

void parse_round_section(const std::map<std::string, std::string>& kv, RoundStageConfig& cfg) {
  for (const auto& [key, value] : kv) {
    if (key == "method") {
      if (value != "sur" && value != "mt" && value != "ms") bad_value("round", key, value);
      cfg.method = value;
    } else if (key == "time_limit") {
      cfg.time_limit = to_double("round", key, value);
    } else {
      bad_key("round", key);
    }
  }
}

void parse_improve_section(const std::map<std::string, std::string>& kv, ImproveStageConfig& cfg) {
  for (const auto& [key, value] : kv) {
    if (key == "enabled") {
      cfg.enabled = to_bool("improve", key, value);
    } else if (key == "mode") {
      if (value != "tv" && value != "constrained") bad_value("improve", key, value);
      cfg.mode = value;
    } else if (key == "r0") {
      cfg.tr.r0 = to_int("improve", key, value);
    } else if (key == "r_bar") {
      cfg.tr.r_bar = to_int("improve", key, value);
    } else if (key == "eta") {
      cfg.tr.eta = to_double("improve", key, value);
    } else if (key == "max_outer") {
      cfg.tr.max_outer = to_int("improve", key, value);
    } else if (key == "subproblem_time_limit") {
      cfg.tr.subproblem_time_limit = to_double("improve", key, value);
    } else {
      bad_key("improve", key);
    }
  }
}

struct FamilyGrid {
  double t_f = 0.0;
  int n_steps = 0;
};

FamilyGrid family_grid(const InstanceConfig& cfg) {
  FamilyGrid grid;
  if (cfg.family == "cnot") {
    grid = {10.0, 200};
  } else if (cfg.family == "not") {
    grid = {6.0, 60};
  } else if (cfg.family == "circuit") {
    grid = cfg.q <= 2 ? FamilyGrid{4.0, 80} : FamilyGrid{20.0, 200};
  } else if (cfg.family == "synthetic") {
    grid = {1.0, 20};
  } else {
    grid = {2.0, 40};  // energy
  }
  if (cfg.t_f > 0.0) grid.t_f = cfg.t_f;
  if (cfg.n_steps > 0) grid.n_steps = cfg.n_steps;
  return grid;
}

SolveReport make_round_report(const QuantumInstance& inst, const std::string& stage,
                              const ControlSequence& relaxed, const ControlSequence& rounded,
                              long long nodes, SolveStatus status, double wall_seconds) {
  SolveReport report;
  report.stage = stage;
  report.instance = inst.name;
  report.objective = objective_value(evolve(inst, rounded), inst.objective);
  report.tv_value = tv_seminorm(rounded);
  report.sos1_penalty_value = sos1_penalty(rounded);
  report.iterations = nodes;
  report.status = status;
  report.wall_seconds = wall_seconds;
  report.certificate = bound_certificate(relaxed, rounded);
  return report;
}

}  // namespace

RunConfig parse_run_config(const std::string& path) {
  const ConfigMap raw = parse_config_file(path);
  static const std::set<std::string> sections = {"instance", "relax", "round", "improve"};
  for (const auto& [section, kv] : raw) {
    (void)kv;
    if (sections.count(section) == 0) {
      throw std::runtime_error("unknown section [" + section + "] in '" + path + "'");
    }
  }
  RunConfig cfg;
  if (auto it = raw.find("instance"); it != raw.end()) parse_instance_section(it->second, cfg.instance);
  if (auto it = raw.find("relax"); it != raw.end()) parse_relax_section(it->second, cfg.relax);
  if (auto it = raw.find("round"); it != raw.end()) parse_round_section(it->second, cfg.round);
  if (auto it = raw.find("improve"); it != raw.end()) parse_improve_section(it->second, cfg.improve);
  return cfg;
}

QuantumInstance make_instance(const InstanceConfig& cfg) {
  const FamilyGrid grid = family_grid(cfg);
  QuantumInstance inst;
  if (cfg.family == "energy") {
    inst = build_energy_instance(cfg.q, cfg.seed);
  } else if (cfg.family == "cnot") {
    inst = build_cnot_instance(grid.t_f, grid.n_steps);
  } else if (cfg.family == "not") {
    inst = build_not_instance(grid.t_f, grid.n_steps);
  } else if (cfg.family == "circuit") {
    if (cfg.target_path.empty()) {
      throw std::runtime_error("[instance] family=circuit needs a 'target' file");
    }
    inst = build_circuit_instance(cfg.q, cfg.edges, cfg.target_path, grid.t_f, grid.n_steps);
  } else if (cfg.family == "synthetic") {
    inst = build_random_instance(cfg.q, cfg.n_controllers, cfg.seed, grid.t_f, grid.n_steps);
  } else {
    throw std::runtime_error("unknown instance family '" + cfg.family + "'");
  }
  inst.defaults.t_f = grid.t_f;
  inst.defaults.n_steps = grid.n_steps;
  if (cfg.alpha) inst.defaults.alpha = *cfg.alpha;
  if (cfg.t_minup) inst.defaults.t_minup = *cfg.t_minup;
  if (cfg.s_max) inst.defaults.s_max = *cfg.s_max;
  if (cfg.rho) inst.defaults.rho = *cfg.rho;
  return inst;
}

PenaltyConfig resolve_penalty(const RunConfig& cfg, const QuantumInstance& inst) {
  PenaltyConfig penalty;
  penalty.rho = inst.defaults.rho;
  penalty.alpha = inst.defaults.alpha;
  if (cfg.relax.sos1_mode) {
    penalty.sos1_mode = *cfg.relax.sos1_mode;
  } else if (cfg.instance.family == "energy" || cfg.instance.family == "not") {
    penalty.sos1_mode = Sos1Mode::kSubstitutedTwoControl;
  } else if (cfg.instance.family == "cnot") {
    penalty.sos1_mode = Sos1Mode::kOff;
  } else {
    penalty.sos1_mode = Sos1Mode::kPenalized;
  }
  return penalty;
}

RoundingConstraint resolve_constraint(const RunConfig& cfg, const QuantumInstance& inst) {
  if (cfg.round.method == "mt") return MinUpTime{inst.defaults.t_minup};
  if (cfg.round.method == "ms") return MaxSwitching{inst.defaults.s_max};
  return Unconstrained{};
}

RelaxResult run_relax_stage(const RunConfig& cfg, const QuantumInstance& inst,
                            const std::optional<ControlSequence>& warm_start_controls) {
  const PenaltyConfig penalty = resolve_penalty(cfg, inst);
  ControlSequence x0;
  if (warm_start_controls) {
    x0 = *warm_start_controls;
    if (x0.n_controllers() != inst.n_controllers() || x0.n_steps() != inst.defaults.n_steps) {
      throw std::runtime_error("warm-start controls do not match the instance grid");
    }
  } else {
    x0 = make_constant_controls(inst.n_controllers(), inst.defaults.n_steps,
                                inst.defaults.t_f / inst.defaults.n_steps, cfg.relax.x0_value);
  }
  if (cfg.relax.method == "admm") {
    AdmmConfig admm;
    admm.beta = cfg.relax.admm_beta;
    admm.residual_tol = cfg.relax.admm_residual_tol;
    admm.max_outer = cfg.relax.admm_max_outer;
    admm.inner = cfg.relax.qn;
    return admm_solve(inst, inst.objective, penalty, x0, admm);
  }
  return pgrape_solve(inst, inst.objective, penalty, x0, cfg.relax.qn);
}

RoundStageResult run_round_stage(const RunConfig& cfg, const QuantumInstance& inst,
                                 const ControlSequence& relaxed) {
  const auto start = Clock::now();
  RoundStageResult result;
  if (cfg.round.method == "sur") {
    result.controls = sum_up_rounding(relaxed);
    const double wall = std::chrono::duration<double>(Clock::now() - start).count();
    result.report =
        make_round_report(inst, "round:sur", relaxed, result.controls, 0, SolveStatus::kConverged, wall);
    return result;
  }
  const RoundingConstraint constraint = resolve_constraint(cfg, inst);
  const CiaResult cia = cia_round(relaxed, constraint, cfg.round.time_limit);
  result.controls = cia.controls;
  const double wall = std::chrono::duration<double>(Clock::now() - start).count();
  result.report = make_round_report(inst, "round:" + cfg.round.method, relaxed, result.controls,
                                    cia.nodes, cia.status, wall);
  return result;
}

ImproveResult run_improve_stage(const RunConfig& cfg, const QuantumInstance& inst,
                                const ControlSequence& rounded) {
  ImproveMode mode;
  if (cfg.improve.mode == "constrained") {
    mode = ConstrainedMode{resolve_constraint(cfg, inst)};
  } else {
    mode = TvMode{inst.defaults.alpha};
  }
  return alb_improve(inst, inst.objective, rounded, mode, cfg.improve.tr);
}

PipelineResult run_pipeline(const RunConfig& cfg, const std::string& out_dir, bool force) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string relax_path = out_dir + "/relax_controls.csv";
  const std::string round_path = out_dir + "/round_controls.csv";
  const std::string improve_path = out_dir + "/improve_controls.csv";
  const std::string summary_path = out_dir + "/summary.json";
  const std::string failure_path = out_dir + "/failure.json";
  ensure_writable(relax_path, force);
  ensure_writable(round_path, force);
  if (cfg.improve.enabled) ensure_writable(improve_path, force);
  ensure_writable(summary_path, force);
  fs::remove(failure_path);

  PipelineResult result;
  std::string stage = "relax";
  try {
    const QuantumInstance inst = make_instance(cfg.instance);

    std::optional<ControlSequence> warm;
    if (cfg.relax.warm_start) {
      warm = read_controls_csv(relax_path);
    }
    const RelaxResult relaxed = run_relax_stage(cfg, inst, warm);
    write_controls_csv(relax_path, relaxed.controls);
    result.reports.push_back(relaxed.report);
    result.final_controls = relaxed.controls;

    stage = "round";
    const RoundStageResult rounded = run_round_stage(cfg, inst, relaxed.controls);
    write_controls_csv(round_path, rounded.controls);
    result.reports.push_back(rounded.report);
    result.final_controls = rounded.controls;

    if (cfg.improve.enabled) {
      stage = "improve";
      const ImproveResult improved = run_improve_stage(cfg, inst, rounded.controls);
      write_controls_csv(improve_path, improved.controls);
      result.reports.push_back(improved.report);
      result.final_controls = improved.controls;
    }

    nlohmann::ordered_json summary;
    summary["instance"] = inst.name;
    summary["final_objective"] = result.reports.back().objective;
    summary["stages"] = nlohmann::ordered_json::array();
    for (const SolveReport& report : result.reports) {
      summary["stages"].push_back(report_to_json(report));
    }
    write_text_file(summary_path, summary.dump(2) + "\n");
  } catch (const std::exception& error) {
    nlohmann::ordered_json failure;
    failure["stage"] = stage;
    failure["error"] = error.what();
    write_text_file(failure_path, failure.dump(2) + "\n");
    throw;
  }
  return result;
}

}  // namespace qcp
