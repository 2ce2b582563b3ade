#pragma once

#include <string>
#include <vector>

namespace collapse::acceptance {

struct CriterionResult {
  int id;
  std::string name;
  bool passed;
  std::string detail;
  double seconds;
};

/// Runs the numbered acceptance criteria 1-9; each entry carries its own
/// runtime check where one applies.
std::vector<CriterionResult> run_all();

/// `[PASS] 3 lorentz invariance (0.001 s): ...`
std::string format_line(const CriterionResult& r);

}  // namespace collapse::acceptance
