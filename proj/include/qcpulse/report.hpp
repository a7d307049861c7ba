#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcpulse/rounding.hpp"
#include "qcpulse/status.hpp"

namespace qcp {

// One record of the improvement loop: radius tried, model decrease, achieved
// decrease, and whether the step was accepted.
struct ImproveStep {
  int radius = 0;
  double predicted_decrease = 0.0;
  double actual_decrease = 0.0;
  bool accepted = false;
};

struct SolveReport {
  std::string stage;
  std::string instance;
  double objective = 0.0;
  double tv_value = 0.0;
  double sos1_penalty_value = 0.0;
  long long iterations = 0;
  double wall_seconds = 0.0;
  SolveStatus status = SolveStatus::kConverged;
  std::optional<BoundCertificate> certificate;
  std::optional<double> final_residual;
  std::vector<double> objective_history;      // outer-iteration values (ADMM)
  std::vector<ImproveStep> improvement_history;
};

// Stable key order, so repeated runs diff cleanly.
nlohmann::ordered_json report_to_json(const SolveReport& report);

}  // namespace qcp
