#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tauspec/basis.hpp"
#include "tauspec/opalg.hpp"
#include "tauspec/problem.hpp"

namespace tauspec {

/// Which equation produced a row of the tau matrix.
struct RowInfo {
  enum class Kind { Condition, Equation };
  Kind kind;
  std::size_t index;  ///< condition index or equation index
  std::size_t local;  ///< row within the equation block (0 for conditions)
};

/// Square block system: all condition rows first, then for every equation
/// its first n - nu_e operator rows.
struct TauSystem {
  ProblemSpec spec;  ///< the linear problem the system was assembled from
  std::size_t n = 0;
  Matrix matrix;
  Vector rhs;
  std::vector<RowInfo> rows;
  std::vector<std::size_t> conditions_per_equation;
  std::vector<std::string> warnings;

  std::size_t condition_count() const noexcept { return spec.conditions.size(); }
  std::size_t variable_count() const noexcept { return spec.variables.size(); }
};

struct ResidualReport {
  std::vector<double> grid;
  /// max over the grid of |LHS(y_n) - f| per equation
  std::vector<double> equation_defects;
  /// |c_i(y_n) - s_i| per condition
  std::vector<double> condition_defects;

  double max_equation_defect() const noexcept;
  double max_condition_defect() const noexcept;
};

struct LinearDiagnostics {
  double min_pivot = 0.0;  ///< smallest |U_jj| of the LU factorization
  double scale = 0.0;      ///< largest |T_ij|
  bool refined = false;
};

struct TauSolution {
  std::vector<std::string> variables;
  std::vector<Series> series;
  std::vector<NewtonState> newton_log;
  ResidualReport residual;
  LinearDiagnostics diagnostics;
  bool converged = true;
  int assemblies = 0;
  std::vector<std::string> warnings;

  std::size_t iterations() const noexcept { return newton_log.size(); }
};

/// Tau matrix of a linear problem at size n per variable.
/// Throws DomainError when the problem still has product terms or when an
/// equation has more attributed conditions than rows.
TauSystem assemble(const ProblemSpec& linear_spec, std::size_t n);

struct LinearSolveOptions {
  bool refine = false;        ///< one step of iterative refinement
  std::size_t grid_points = 257;
  int iteration = 0;          ///< Newton iteration, carried into singularity errors
};

/// Dense LU with partial pivoting. A pivot below 1e3 * eps * max|T_ij|
/// raises SingularSystemError naming the offending block.
TauSolution solve_linear(const TauSystem& system, const LinearSolveOptions& options = {});

/// Linear problems: one assembly and solve. Nonlinear problems: augmentation
/// (when flagged), initial iterate, then Newton until
///   max_v |a_k - a_{k-1}|_inf <= tol * max(1, |a_k|_inf)
/// or max_iter; in the latter case the best iterate is returned with
/// converged = false.
TauSolution solve(const ProblemSpec& spec);

/// LHS(y) - f for every equation, computed exactly on coefficient vectors.
std::vector<Series> equation_defects(const ProblemSpec& spec, std::span<const Series> solution);

/// Residual evaluated on `grid_points` Chebyshev points of [a, b].
ResidualReport residual_report(const ProblemSpec& spec, std::span<const Series> solution,
                               std::size_t grid_points = 257);

/// Chebyshev extreme points of [a, b], endpoints included.
std::vector<double> chebyshev_grid(const BasisSpec& basis, std::size_t count);
std::vector<double> uniform_grid(const BasisSpec& basis, std::size_t count);

/// max_j |y_v(x_j) - exact_v[j]| for each variable that has exact values.
std::vector<double> error_vs_exact(const TauSolution& solution, std::span<const double> grid,
                                   const std::vector<std::vector<double>>& exact);

using ExactSolution = std::vector<std::function<double(double)>>;

struct ConvergenceRow {
  std::size_t n = 0;
  std::optional<double> error;  ///< absent without an exact solution
  double residual = 0.0;
  int iterations = 0;
  double seconds = 0.0;
  bool converged = false;
  std::string failure;          ///< non-empty when the solve threw
};

struct ConvergenceOptions {
  std::size_t error_grid = 1001;  ///< uniform points for the error norm
  bool parallel = false;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;  ///< ordered as the requested n
  std::vector<std::string> warnings;
};

ConvergenceTable convergence_study(const ProblemSpec& spec, std::span<const std::size_t> ns,
                                   const ExactSolution* exact = nullptr,
                                   const ConvergenceOptions& options = {});

}  // namespace tauspec
