#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace qcp {

struct VerifyCheck {
  std::string name;
  double value = 0.0;  // measured quantity
  double bound = 0.0;  // limit it is held against
  double margin = 0.0; // signed slack, >= 0 means pass
  bool pass = false;
};

// Every suite also counts the structural invariants it exercised along the
// way (unitary traces, one-hot binary outputs, constraint feasibility,
// monotone improvement), so a summary can certify zero violations.
struct InvariantCounters {
  long long checked = 0;
  long long violated = 0;
};

struct VerifySuiteReport {
  std::string suite;
  std::vector<VerifyCheck> checks;
  InvariantCounters invariants;
  bool all_pass = false;
  // Optional plot series (column-major rows) with header names, e.g. the
  // epsilon-vs-steps and penalty-vs-rho sweeps.
  std::vector<std::string> series_columns;
  std::vector<std::vector<double>> series_rows;
};

// Adjoint gradient against central finite differences on one instance of
// each family, at random interior points.
VerifySuiteReport verify_gradients(int points_per_family = 20, std::uint64_t seed = 11);

// Sum-up-rounding deviation and drift inequalities on randomized sequences.
VerifySuiteReport verify_rounding_bounds(int n_trials = 1000, std::uint64_t seed = 12);

// Branch-and-bound and trust-region subproblem solvers against exhaustive
// enumeration on instances small enough to enumerate.
VerifySuiteReport verify_oracle_equivalence(std::uint64_t seed = 13);

// Desk-scale reproduction targets: relaxation quality, rounding gap, local
// branching improvement, drift decay in the step count, penalty decay in rho.
VerifySuiteReport verify_tables();

nlohmann::ordered_json verify_report_to_json(const VerifySuiteReport& report);

}  // namespace qcp
