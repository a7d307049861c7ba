#pragma once

#include <string>

namespace qcp {

enum class SolveStatus {
  kConverged,
  kMaxIterations,
  kTimeLimit,
  kStalled,
};

std::string to_string(SolveStatus status);

}  // namespace qcp
