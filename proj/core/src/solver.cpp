#include "tauspec/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <string>

#include "tauspec/error.hpp"

namespace tauspec {

namespace {

using Index = Eigen::Index;

Index as_index(std::size_t n) { return static_cast<Index>(n); }

/// n x n block of a single linear term (leading block of the infinite operator).
OperatorMatrix term_block(const BasisSpec& basis, const LinearTermSpec& term, std::size_t n) {
  switch (term.kind) {
    case TermKind::Diff: {
      std::vector<std::vector<double>> p(static_cast<std::size_t>(term.order) + 1, std::vector<double>{0.0});
      p.back() = term.coeff ? term.coeff->coeffs() : std::vector<double>{1.0};
      return diff_operator(basis, p, n);
    }
    case TermKind::Int: {
      std::vector<std::vector<double>> p(static_cast<std::size_t>(term.order) + 1, std::vector<double>{0.0});
      p.back() = term.coeff ? term.coeff->coeffs() : std::vector<double>{1.0};
      return int_operator(basis, p, n);
    }
    case TermKind::Volterra:
      return volterra_operator(*term.kernel, term.lower, n, term.order);
    case TermKind::Fredholm:
      return fredholm_operator(*term.kernel, n, term.order);
  }
  throw DomainError("unknown term kind");
}

std::string describe_row(const TauSystem& system, std::size_t row) {
  const RowInfo& info = system.rows.at(row);
  if (info.kind == RowInfo::Kind::Condition) return "condition " + std::to_string(info.index);
  return "equation " + std::to_string(info.index) + " (operator row " + std::to_string(info.local) + ")";
}

struct Coefficients {
  std::vector<Series> series;
  LinearDiagnostics diagnostics;
};

Coefficients solve_coefficients(const TauSystem& system, const LinearSolveOptions& options) {
  const Matrix& t = system.matrix;
  const std::size_t n = system.n;
  Eigen::PartialPivLU<Matrix> lu(t);

  LinearDiagnostics diag;
  diag.scale = t.cwiseAbs().maxCoeff();
  const Vector pivots = lu.matrixLU().diagonal().cwiseAbs();
  Index worst = 0;
  diag.min_pivot = pivots.minCoeff(&worst);
  const double threshold = 1e3 * std::numeric_limits<double>::epsilon() * diag.scale;
  if (!(diag.min_pivot >= threshold)) {
    // Row `worst` of P*T is row i of T with P.indices()(i) == worst.
    const auto& perm = lu.permutationP().indices();
    std::size_t original = static_cast<std::size_t>(worst);
    for (Index i = 0; i < perm.size(); ++i) {
      if (perm(i) == worst) original = static_cast<std::size_t>(i);
    }
    const std::string block = describe_row(system, original);
    const std::string variable = system.spec.variables.at(static_cast<std::size_t>(worst) / n);
    throw SingularSystemError("tau matrix is numerically singular at " + block + ", unknowns of '" +
                                  variable + "' (pivot " + std::to_string(diag.min_pivot) + ")",
                              block, options.iteration);
  }

  Vector x = lu.solve(system.rhs);
  if (options.refine) {
    const Vector r = system.rhs - t * x;
    x += lu.solve(r);
    diag.refined = true;
  }

  Coefficients out;
  out.diagnostics = diag;
  for (std::size_t v = 0; v < system.variable_count(); ++v) {
    const auto block = x.segment(as_index(v * n), as_index(n));
    out.series.emplace_back(system.spec.basis, std::vector<double>(block.data(), block.data() + block.size()));
  }
  return out;
}

double max_norm(std::span<const Series> s) {
  double m = 0.0;
  for (const Series& x : s) m = std::max(m, x.max_abs());
  return m;
}

double max_difference(std::span<const Series> a, std::span<const Series> b) {
  double m = 0.0;
  for (std::size_t v = 0; v < a.size(); ++v) m = std::max(m, (a[v] - b[v]).max_abs());
  return m;
}

void append_unique(std::vector<std::string>& into, const std::vector<std::string>& from) {
  for (const auto& w : from) {
    if (std::find(into.begin(), into.end(), w) == into.end()) into.push_back(w);
  }
}

}  // namespace

double ResidualReport::max_equation_defect() const noexcept {
  double m = 0.0;
  for (double d : equation_defects) m = std::max(m, d);
  return m;
}

double ResidualReport::max_condition_defect() const noexcept {
  double m = 0.0;
  for (double d : condition_defects) m = std::max(m, d);
  return m;
}

// ---------------------------------------------------------------------------
// Assembly

TauSystem assemble(const ProblemSpec& linear_spec, std::size_t n) {
  if (!linear_spec.is_linear()) throw DomainError("assemble needs a linear problem; linearize first");
  if (n < 1) throw DomainError("n must be positive");
  const std::size_t m = linear_spec.variables.size();
  const std::size_t nu = linear_spec.conditions.size();
  const BasisSpec& basis = linear_spec.basis;

  TauSystem sys{linear_spec, n, Matrix::Zero(as_index(m * n), as_index(m * n)), Vector::Zero(as_index(m * n)),
                {}, std::vector<std::size_t>(m, 0), {}};

  for (std::size_t c = 0; c < nu; ++c) {
    const std::size_t e = linear_spec.condition_equation(c);
    if (e >= m) throw DomainError("condition " + std::to_string(c) + " attributed to a missing equation");
    ++sys.conditions_per_equation[e];
  }
  for (std::size_t e = 0; e < m; ++e) {
    if (sys.conditions_per_equation[e] > n) {
      throw DomainError("equation " + std::to_string(e) + " has more conditions than the " + std::to_string(n) +
                        " rows available");
    }
  }

  Index row = 0;
  for (std::size_t c = 0; c < nu; ++c, ++row) {
    const ConditionSpec& cond = linear_spec.conditions[c];
    for (const ConditionTerm& term : cond.terms) {
      const OperatorMatrix r = condition_row(basis, term.derivative, term.point, n);
      sys.matrix.block(row, as_index(term.variable * n), 1, as_index(n)) += term.weight * r.entries;
    }
    sys.rhs(row) = cond.value;
    sys.rows.push_back({RowInfo::Kind::Condition, c, 0});
  }

  for (std::size_t e = 0; e < m; ++e) {
    const EquationSpec& eq = linear_spec.equations[e];
    const std::size_t kept = n - sys.conditions_per_equation[e];
    std::vector<Matrix> blocks(m, Matrix::Zero(as_index(n), as_index(n)));
    for (const LinearTermSpec& term : eq.linear) {
      const OperatorMatrix op = term_block(basis, term, n);
      if (op.truncated) {
        sys.warnings.push_back("equation " + std::to_string(e) + ": kernel wider than n; image truncated");
      }
      blocks[term.variable] += op.entries;
    }
    for (std::size_t v = 0; v < m; ++v) {
      sys.matrix.block(row, as_index(v * n), as_index(kept), as_index(n)) = blocks[v].topRows(as_index(kept));
    }
    for (std::size_t k = 0; k < kept; ++k) {
      sys.rhs(row + as_index(k)) = eq.rhs[k];
      sys.rows.push_back({RowInfo::Kind::Equation, e, k});
    }
    row += as_index(kept);
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Residuals

std::vector<Series> equation_defects(const ProblemSpec& spec, std::span<const Series> solution) {
  if (solution.size() != spec.variables.size()) throw DomainError("solution/variable count mismatch");
  std::vector<Series> out;
  for (const EquationSpec& eq : spec.equations) {
    Series acc = -1.0 * eq.rhs;
    for (const LinearTermSpec& term : eq.linear) {
      const Series& y = solution[term.variable];
      switch (term.kind) {
        case TermKind::Diff:
        case TermKind::Int: {
          const Series image = apply_order(y, term.signed_order());
          acc += term.coeff ? product(*term.coeff, image) : image;
          break;
        }
        case TermKind::Volterra:
          acc += apply_volterra(*term.kernel, term.lower, apply_order(y, term.order));
          break;
        case TermKind::Fredholm:
          acc += apply_fredholm(*term.kernel, apply_order(y, term.order));
          break;
      }
    }
    for (const ProductTermSpec& prod : eq.products) {
      Series value(spec.basis, std::vector<double>{prod.weight});
      for (const Factor& f : prod.factors) value = product(value, factor_value(f, solution));
      if (prod.integral == IntegralKind::Volterra) value = apply_volterra(*prod.kernel, prod.lower, value);
      if (prod.integral == IntegralKind::Fredholm) value = apply_fredholm(*prod.kernel, value);
      acc += value;
    }
    out.push_back(std::move(acc));
  }
  return out;
}

std::vector<double> chebyshev_grid(const BasisSpec& basis, std::size_t count) {
  std::vector<double> x(count);
  const double mid = 0.5 * (basis.a() + basis.b());
  const double half = 0.5 * (basis.b() - basis.a());
  if (count == 1) {
    x[0] = mid;
    return x;
  }
  for (std::size_t k = 0; k < count; ++k) {
    // Ascending order, exact endpoints.
    const double c = -std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(count - 1));
    x[k] = mid + half * c;
  }
  x.front() = basis.a();
  x.back() = basis.b();
  return x;
}

std::vector<double> uniform_grid(const BasisSpec& basis, std::size_t count) {
  std::vector<double> x(count);
  if (count == 1) {
    x[0] = basis.a();
    return x;
  }
  const double h = (basis.b() - basis.a()) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) x[k] = basis.a() + h * static_cast<double>(k);
  x.back() = basis.b();
  return x;
}

ResidualReport residual_report(const ProblemSpec& spec, std::span<const Series> solution,
                               std::size_t grid_points) {
  ResidualReport report;
  report.grid = chebyshev_grid(spec.basis, grid_points);
  for (const Series& defect : equation_defects(spec, solution)) {
    double worst = 0.0;
    for (double v : orth_eval(defect, report.grid)) worst = std::max(worst, std::abs(v));
    report.equation_defects.push_back(worst);
  }
  for (const ConditionSpec& cond : spec.conditions) {
    double value = 0.0;
    for (const ConditionTerm& term : cond.terms) {
      const Series& y = solution[term.variable];
      const OperatorMatrix r = condition_row(spec.basis, term.derivative, term.point, y.size());
      const Vector a = Eigen::Map<const Vector>(y.coeffs().data(), as_index(y.size()));
      value += term.weight * (r.entries * a)(0);
    }
    report.condition_defects.push_back(std::abs(value - cond.value));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Solves

TauSolution solve_linear(const TauSystem& system, const LinearSolveOptions& options) {
  Coefficients c = solve_coefficients(system, options);
  TauSolution sol;
  sol.variables = system.spec.variables;
  sol.series = std::move(c.series);
  sol.diagnostics = c.diagnostics;
  sol.assemblies = 1;
  sol.residual = residual_report(system.spec, sol.series, options.grid_points);
  sol.warnings = system.spec.warnings;
  append_unique(sol.warnings, system.warnings);

  for (std::size_t i = 0; i < sol.residual.condition_defects.size(); ++i) {
    const double s = system.spec.conditions[i].value;
    if (sol.residual.condition_defects[i] > 1e-12 * std::max(1.0, std::abs(s))) {
      sol.warnings.push_back("condition " + std::to_string(i) + " defect " +
                             std::to_string(sol.residual.condition_defects[i]) + " above 1e-12");
    }
  }
  NewtonState state;
  state.iteration = 1;
  state.iterate = sol.series;
  state.update_norm = max_norm(sol.series);
  state.residual_norm = sol.residual.max_equation_defect();
  sol.newton_log.push_back(std::move(state));
  return sol;
}

TauSolution solve(const ProblemSpec& spec) {
  const ProblemSpec work = spec.has_augmentation() ? augment_variables(spec) : spec;
  const std::size_t n = work.settings.n;
  LinearSolveOptions options;
  options.refine = work.settings.refine;
  options.grid_points = work.settings.residual_grid;

  if (work.is_linear()) return solve_linear(assemble(work, n), options);

  TauSolution sol;
  sol.variables = work.variables;
  sol.warnings = work.warnings;
  std::vector<Series> iterate = initial_iterate(work, &sol.warnings);
  double previous_residual = residual_report(work, iterate, options.grid_points).max_equation_defect();

  bool converged = false;
  for (int k = 1; k <= work.settings.max_iter; ++k) {
    const ProblemSpec linear = linearize(work, iterate);
    const TauSystem system = assemble(linear, n);
    append_unique(sol.warnings, system.warnings);
    append_unique(sol.warnings, linear.warnings);
    options.iteration = k;
    Coefficients step = solve_coefficients(system, options);
    ++sol.assemblies;
    sol.diagnostics = step.diagnostics;

    std::vector<Series> candidate = std::move(step.series);
    double residual = residual_report(work, candidate, options.grid_points).max_equation_defect();
    if (work.settings.damping && residual > previous_residual) {
      const std::vector<Series> full = candidate;
      double lambda = 1.0;
      for (int h = 0; h < 6 && residual > previous_residual; ++h) {
        lambda *= 0.5;
        for (std::size_t v = 0; v < candidate.size(); ++v) {
          candidate[v] = iterate[v] + lambda * (full[v] - iterate[v]);
        }
        residual = residual_report(work, candidate, options.grid_points).max_equation_defect();
      }
    }

    NewtonState state;
    state.iteration = k;
    state.update_norm = max_difference(candidate, iterate);
    state.residual_norm = residual;
    state.iterate = candidate;
    const double scale = max_norm(candidate);
    iterate = std::move(candidate);
    previous_residual = residual;
    const bool done = state.update_norm <= work.settings.newton_tol * std::max(1.0, scale);
    sol.newton_log.push_back(std::move(state));
    if (done) {
      converged = true;
      break;
    }
  }

  if (converged) {
    sol.series = iterate;
  } else {
    const auto best = std::min_element(sol.newton_log.begin(), sol.newton_log.end(),
                                       [](const NewtonState& a, const NewtonState& b) {
                                         return a.residual_norm < b.residual_norm;
                                       });
    sol.series = best->iterate;
    sol.warnings.push_back("Newton iteration did not converge in " + std::to_string(work.settings.max_iter) +
                           " iterations; returning iterate " + std::to_string(best->iteration));
  }
  sol.converged = converged;
  sol.residual = residual_report(work, sol.series, options.grid_points);
  return sol;
}

// ---------------------------------------------------------------------------
// Errors and sweeps

std::vector<double> error_vs_exact(const TauSolution& solution, std::span<const double> grid,
                                   const std::vector<std::vector<double>>& exact) {
  if (exact.size() > solution.series.size()) {
    throw DomainError("exact values given for " + std::to_string(exact.size()) + " variables, solution has " +
                      std::to_string(solution.series.size()));
  }
  std::vector<double> errors;
  for (std::size_t v = 0; v < exact.size(); ++v) {
    if (exact[v].size() != grid.size()) throw DomainError("exact values and grid differ in length");
    const auto values = orth_eval(solution.series[v], grid);
    double worst = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) worst = std::max(worst, std::abs(values[j] - exact[v][j]));
    errors.push_back(worst);
  }
  return errors;
}

namespace {

ConvergenceRow run_row(const ProblemSpec& templ, std::size_t n, const ExactSolution* exact,
                       const ConvergenceOptions& options) {
  ConvergenceRow row;
  row.n = n;
  const auto start = std::chrono::steady_clock::now();
  try {
    ProblemSpec spec = templ;
    spec.settings.n = n;
    validate_problem(spec);
    const TauSolution sol = solve(spec);
    row.residual = sol.residual.max_equation_defect();
    row.iterations = static_cast<int>(sol.iterations());
    row.converged = sol.converged;
    if (exact) {
      const auto grid = uniform_grid(spec.basis, options.error_grid);
      std::vector<std::vector<double>> values;
      for (const auto& f : *exact) {
        std::vector<double> col(grid.size());
        std::transform(grid.begin(), grid.end(), col.begin(), f);
        values.push_back(std::move(col));
      }
      const auto errors = error_vs_exact(sol, grid, values);
      row.error = errors.empty() ? 0.0 : *std::max_element(errors.begin(), errors.end());
    }
  } catch (const std::exception& e) {
    row.failure = e.what();
    row.converged = false;
  }
  row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

}  // namespace

ConvergenceTable convergence_study(const ProblemSpec& spec, std::span<const std::size_t> ns,
                                   const ExactSolution* exact, const ConvergenceOptions& options) {
  ConvergenceTable table;
  if (options.parallel) {
    std::vector<std::future<ConvergenceRow>> jobs;
    for (std::size_t n : ns) {
      jobs.push_back(std::async(std::launch::async, run_row, std::cref(spec), n, exact, std::cref(options)));
    }
    for (auto& job : jobs) table.rows.push_back(job.get());
  } else {
    for (std::size_t n : ns) table.rows.push_back(run_row(spec, n, exact, options));
  }

  // Soft check: residuals should not grow with n until they reach the floor.
  constexpr double floor = 1e-12;
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    const ConvergenceRow& prev = table.rows[i - 1];
    const ConvergenceRow& cur = table.rows[i];
    if (!prev.failure.empty() || !cur.failure.empty() || cur.n <= prev.n) continue;
    if (cur.residual > std::max(prev.residual, floor)) {
      table.warnings.push_back("residual grew from n=" + std::to_string(prev.n) + " to n=" + std::to_string(cur.n));
    }
  }
  return table;
}

}  // namespace tauspec
