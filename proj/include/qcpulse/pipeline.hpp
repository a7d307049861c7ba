#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcpulse/alb.hpp"
#include "qcpulse/instances.hpp"
#include "qcpulse/io.hpp"
#include "qcpulse/model.hpp"
#include "qcpulse/relax.hpp"
#include "qcpulse/report.hpp"
#include "qcpulse/rounding.hpp"

namespace qcp {

struct InstanceConfig {
  std::string family = "energy";  // energy | cnot | not | circuit | synthetic
  int q = 2;
  std::uint64_t seed = 0;
  double t_f = 0.0;    // 0 means family default
  int n_steps = 0;     // 0 means family default
  std::optional<double> alpha;
  std::optional<int> t_minup;
  std::optional<int> s_max;
  std::optional<double> rho;
  std::string target_path;          // circuit only
  std::vector<CircuitEdge> edges;   // circuit only
  int n_controllers = 3;            // synthetic only
};

struct RelaxStageConfig {
  std::string method = "pgrape";  // pgrape | admm
  std::optional<Sos1Mode> sos1_mode;  // family default when unset
  double x0_value = 0.5;
  bool warm_start = false;  // seed the solver from an input controls file
  BoundLbfgsConfig qn;
  double admm_beta = 0.5;
  double admm_residual_tol = 1e-6;
  int admm_max_outer = 100;
};

struct RoundStageConfig {
  std::string method = "sur";  // sur | mt | ms
  double time_limit = 60.0;
};

struct ImproveStageConfig {
  bool enabled = true;
  std::string mode = "tv";  // tv | constrained
  TrustRegionConfig tr;
};

struct RunConfig {
  InstanceConfig instance;
  RelaxStageConfig relax;
  RoundStageConfig round;
  ImproveStageConfig improve;
};

// Parses and validates the sectioned key=value config; unknown sections or
// keys are hard errors naming the offender.
RunConfig parse_run_config(const std::string& path);

QuantumInstance make_instance(const InstanceConfig& cfg);

// Resolved per-instance penalty weights (TV weight alpha and SOS1 weight rho)
// plus the SOS1 handling mode for the relaxation.
PenaltyConfig resolve_penalty(const RunConfig& cfg, const QuantumInstance& inst);

RoundingConstraint resolve_constraint(const RunConfig& cfg, const QuantumInstance& inst);

RelaxResult run_relax_stage(const RunConfig& cfg, const QuantumInstance& inst,
                            const std::optional<ControlSequence>& warm_start_controls);

struct RoundStageResult {
  ControlSequence controls;
  SolveReport report;
};

RoundStageResult run_round_stage(const RunConfig& cfg, const QuantumInstance& inst,
                                 const ControlSequence& relaxed);

ImproveResult run_improve_stage(const RunConfig& cfg, const QuantumInstance& inst,
                                const ControlSequence& rounded);

struct PipelineResult {
  std::vector<SolveReport> reports;
  ControlSequence final_controls;
};

// relax -> round -> improve, writing per-stage controls CSVs, a summary JSON
// with every report, and plot-ready CSV series into out_dir.
PipelineResult run_pipeline(const RunConfig& cfg, const std::string& out_dir, bool force);

}  // namespace qcp
