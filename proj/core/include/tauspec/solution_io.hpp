#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "tauspec/basis.hpp"
#include "tauspec/solver.hpp"

namespace tauspec {

inline constexpr std::string_view kSolutionFormat = "tauspec-solution/1";

/// Max |y_v - exact_v| per variable on a uniform grid.
struct ExactErrorSummary {
  std::size_t grid_points = 0;
  std::vector<double> max_abs;
};

/// Solution file: basis descriptor, per-variable coefficients, Newton log and
/// residual summary. Timing is never written, so equal solves give equal files.
std::string solution_to_json(const TauSolution& solution, std::string_view problem_name = {},
                             const ExactErrorSummary* exact_error = nullptr);

struct StoredSolution {
  std::string problem;
  std::vector<std::string> variables;
  std::vector<Series> series;
  bool converged = true;
};

/// Throws ValidationError on a malformed or foreign file.
StoredSolution read_solution(std::string_view text);

}  // namespace tauspec
