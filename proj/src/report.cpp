#include "qcpulse/report.hpp"

namespace qcp {

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kMaxIterations:
      return "max-iter";
    case SolveStatus::kTimeLimit:
      return "time-limit";
    case SolveStatus::kStalled:
      return "stalled";
  }
  return "unknown";
}

nlohmann::ordered_json report_to_json(const SolveReport& report) {
  nlohmann::ordered_json j;
  j["stage"] = report.stage;
  j["instance"] = report.instance;
  j["objective"] = report.objective;
  j["tv"] = report.tv_value;
  j["sos1_penalty"] = report.sos1_penalty_value;
  j["iterations"] = report.iterations;
  j["wall_seconds"] = report.wall_seconds;
  j["status"] = to_string(report.status);
  if (report.certificate.has_value()) {
    const BoundCertificate& c = *report.certificate;
    nlohmann::ordered_json cert;
    cert["epsilon"] = c.epsilon;
    cert["max_deviation"] = c.max_deviation;
    cert["sur_deviation_bound"] = c.sur_deviation_bound;
    cert["epsilon_bound"] = c.epsilon_bound;
    cert["sos1_penalty"] = c.sos1_penalty_value;
    j["certificate"] = cert;
  }
  if (report.final_residual.has_value()) {
    j["final_residual"] = *report.final_residual;
  }
  if (!report.objective_history.empty()) {
    j["objective_history"] = report.objective_history;
  }
  if (!report.improvement_history.empty()) {
    nlohmann::ordered_json history = nlohmann::ordered_json::array();
    for (const ImproveStep& step : report.improvement_history) {
      nlohmann::ordered_json s;
      s["radius"] = step.radius;
      s["predicted_decrease"] = step.predicted_decrease;
      s["actual_decrease"] = step.actual_decrease;
      s["accepted"] = step.accepted;
      history.push_back(s);
    }
    j["improvement_history"] = history;
  }
  return j;
}

}  // namespace qcp
