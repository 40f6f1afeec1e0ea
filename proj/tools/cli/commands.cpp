#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include <tauspec/error.hpp>
#include <tauspec/solution_io.hpp>
#include <tauspec/solver.hpp>

#include "builtins.hpp"

namespace tauspec::cli {

using json = nlohmann::json;

namespace {

constexpr std::size_t kErrorGrid = 1001;
constexpr std::size_t kPlotGrid = 501;

std::string machine(double v) { return fmt::format("{:.17g}", v); }
std::string human(double v) { return fmt::format("{:.2e}", v); }

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("", "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const RunConfig& config, std::ostream& out, const std::string& text) {
  if (!config.out_path) {
    out << text;
    return;
  }
  std::ofstream file(*config.out_path, std::ios::binary);
  if (!file) throw ValidationError("--out", "cannot write '" + *config.out_path + "'");
  file << text;
  if (!file) throw ValidationError("--out", "write to '" + *config.out_path + "' failed");
}

struct LoadedProblem {
  ProblemSpec spec;
  std::string name;
  ExactSolution exact;
};

bool looks_like_path(std::string_view input) {
  return input.find('/') != std::string_view::npos ||
         (input.size() > 5 && input.substr(input.size() - 5) == ".json");
}

LoadedProblem load_problem(const RunConfig& config, bool single_n) {
  if (config.input.empty()) throw ValidationError("", "no problem given (file path or built-in name)");
  ParseOverrides overrides;
  overrides.family = config.family;
  overrides.newton_tol = config.tol;
  overrides.max_iter = config.max_iter;
  overrides.initial = config.initial;
  if (single_n && !config.ns.empty()) {
    if (config.ns.size() != 1) throw ValidationError("--n", "expected a single value");
    overrides.n = config.ns.front();
  }
  if (config.command == Command::Solve && config.grid) overrides.residual_grid = config.grid;

  if (!looks_like_path(config.input)) {
    if (auto builtin = find_builtin(config.input)) {
      return {parse_problem(builtin->document, overrides), builtin->name, builtin->exact};
    }
    if (!std::filesystem::exists(config.input)) {
      std::string known;
      for (const auto& name : builtin_names()) known += (known.empty() ? "" : ", ") + name;
      throw ValidationError("", "'" + config.input + "' is neither a file nor a built-in problem (" + known + ")");
    }
  }
  const std::string text = read_file(config.input);
  return {parse_problem(text, overrides), std::filesystem::path(config.input).stem().string(), {}};
}

std::vector<std::vector<double>> exact_values(const ExactSolution& exact, std::span<const double> grid) {
  std::vector<std::vector<double>> values;
  for (const auto& f : exact) {
    std::vector<double> col(grid.size());
    std::transform(grid.begin(), grid.end(), col.begin(), f);
    values.push_back(std::move(col));
  }
  return values;
}

void print_warnings(const RunConfig& config, std::ostream& err, const std::vector<std::string>& warnings) {
  if (config.verbosity <= 0) return;
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const SingularSystemError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSingular;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

// ---------------------------------------------------------------------------
// solve

std::string solve_csv(const TauSolution& sol, const ExactErrorSummary* ee) {
  std::string s = "section,name,index,value\n";
  s += fmt::format("status,converged,0,{}\n", sol.converged ? 1 : 0);
  for (std::size_t v = 0; v < sol.series.size(); ++v) {
    const auto& c = sol.series[v].coeffs();
    for (std::size_t i = 0; i < c.size(); ++i) {
      s += fmt::format("coeffs,{},{},{}\n", csv_field(sol.variables[v]), i, machine(c[i]));
    }
  }
  for (const NewtonState& st : sol.newton_log) {
    s += fmt::format("newton,update_norm,{},{}\n", st.iteration, machine(st.update_norm));
    s += fmt::format("newton,residual_norm,{},{}\n", st.iteration, machine(st.residual_norm));
  }
  s += fmt::format("residual,grid_points,0,{}\n", sol.residual.grid.size());
  for (std::size_t e = 0; e < sol.residual.equation_defects.size(); ++e) {
    s += fmt::format("residual,equation,{},{}\n", e, machine(sol.residual.equation_defects[e]));
  }
  for (std::size_t c = 0; c < sol.residual.condition_defects.size(); ++c) {
    s += fmt::format("residual,condition,{},{}\n", c, machine(sol.residual.condition_defects[c]));
  }
  if (ee) {
    s += fmt::format("exact_error,grid_points,0,{}\n", ee->grid_points);
    for (std::size_t v = 0; v < ee->max_abs.size(); ++v) {
      s += fmt::format("exact_error,{},{},{}\n", csv_field(sol.variables[v]), v, machine(ee->max_abs[v]));
    }
  }
  return s;
}

std::string solve_table(const LoadedProblem& p, const TauSolution& sol, const ExactErrorSummary* ee) {
  const BasisSpec& basis = p.spec.basis;
  std::string s;
  s += fmt::format("problem    {}\n", p.name);
  s += fmt::format("basis      {} on [{}, {}], n = {}\n", family_name(basis.family()), basis.a(), basis.b(),
                   p.spec.settings.n);
  if (p.spec.is_linear()) {
    s += fmt::format("status     {} (linear, one solve)\n", sol.converged ? "solved" : "not solved");
  } else {
    s += fmt::format("status     {} after {} Newton iterations\n", sol.converged ? "converged" : "NOT converged",
                     sol.iterations());
    s += "\n  iter   |update|   residual\n";
    for (const NewtonState& st : sol.newton_log) {
      s += fmt::format("  {:>4}   {}   {}\n", st.iteration, human(st.update_norm), human(st.residual_norm));
    }
  }
  s += fmt::format("\nresidual   equations {}   conditions {}   ({} points)\n",
                   human(sol.residual.max_equation_defect()), human(sol.residual.max_condition_defect()),
                   sol.residual.grid.size());
  if (ee) {
    for (std::size_t v = 0; v < ee->max_abs.size(); ++v) {
      s += fmt::format("max error  {:<6} {}   ({} points)\n", sol.variables[v], human(ee->max_abs[v]),
                       ee->grid_points);
    }
  }
  s += "\n     i";
  for (const auto& name : sol.variables) s += fmt::format("  {:>10}", name);
  s += "\n";
  std::size_t rows = 0;
  for (const Series& y : sol.series) rows = std::max(rows, y.size());
  for (std::size_t i = 0; i < rows; ++i) {
    s += fmt::format("  {:>4}", i);
    for (const Series& y : sol.series) s += fmt::format("  {:>10}", human(y[i]));
    s += "\n";
  }
  return s;
}

// ---------------------------------------------------------------------------
// plotdata helpers

struct Curves {
  bool residual = false;
  std::vector<double> x;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

Curves plot_curves(const LoadedProblem& p, const TauSolution& sol, std::size_t points) {
  Curves c;
  c.x = uniform_grid(p.spec.basis, points);
  if (!p.exact.empty()) {
    const auto exact = exact_values(p.exact, c.x);
    for (std::size_t v = 0; v < exact.size(); ++v) {
      const auto y = orth_eval(sol.series[v], c.x);
      std::vector<double> col(c.x.size());
      for (std::size_t j = 0; j < col.size(); ++j) col[j] = std::abs(y[j] - exact[v][j]);
      c.names.push_back("abs_error_" + sol.variables[v]);
      c.columns.push_back(std::move(col));
    }
    return c;
  }
  c.residual = true;
  const ProblemSpec work = p.spec.has_augmentation() ? augment_variables(p.spec) : p.spec;
  const auto defects = equation_defects(work, sol.series);
  for (std::size_t e = 0; e < defects.size(); ++e) {
    auto col = orth_eval(defects[e], c.x);
    for (double& v : col) v = std::abs(v);
    c.names.push_back("abs_residual_eq" + std::to_string(e));
    c.columns.push_back(std::move(col));
  }
  return c;
}

}  // namespace

OutputFormat parse_format(std::string_view name) {
  if (name == "table") return OutputFormat::Table;
  if (name == "csv") return OutputFormat::Csv;
  if (name == "json") return OutputFormat::Json;
  throw ValidationError("--format", "expected table, csv or json, got '" + std::string(name) + "'");
}

InitialPolicy parse_initial(std::string_view name) {
  if (name == "conditions") return InitialPolicy::Conditions;
  if (name == "zero") return InitialPolicy::Zero;
  throw ValidationError("--initial", "expected conditions or zero, got '" + std::string(name) + "'");
}

std::vector<std::size_t> parse_n_list(std::string_view text) {
  std::vector<std::size_t> ns;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw ValidationError("--n", "'" + std::string(item) + "' is not a positive integer");
    }
    ns.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
    if (text.empty()) throw ValidationError("--n", "trailing comma");
  }
  if (ns.empty()) throw ValidationError("--n", "empty list");
  return ns;
}

void validate_config(const RunConfig& config) {
  for (std::size_t n : config.ns) {
    if (n < 1 || n > 4096) throw ValidationError("--n", "n = " + std::to_string(n) + " outside [1, 4096]");
  }
  if (config.tol && !(*config.tol > 0.0 && *config.tol < 1.0)) {
    throw ValidationError("--tol", "tolerance must lie in (0, 1)");
  }
  if (config.max_iter && (*config.max_iter < 1 || *config.max_iter > 1000)) {
    throw ValidationError("--max-iter", "max_iter must lie in [1, 1000]");
  }
  if (config.grid && (*config.grid < 1 || *config.grid > 1'000'000)) {
    throw ValidationError("--grid", "grid must lie in [1, 1000000]");
  }
}

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate_config(config);
    const LoadedProblem p = load_problem(config, true);
    const TauSolution sol = solve(p.spec);

    std::optional<ExactErrorSummary> ee;
    if (!p.exact.empty()) {
      const auto grid = uniform_grid(p.spec.basis, kErrorGrid);
      ee = ExactErrorSummary{kErrorGrid, error_vs_exact(sol, grid, exact_values(p.exact, grid))};
    }
    const ExactErrorSummary* eep = ee ? &*ee : nullptr;
    switch (config.format.value_or(OutputFormat::Table)) {
      case OutputFormat::Json:
        emit(config, out, solution_to_json(sol, p.name, eep));
        break;
      case OutputFormat::Csv:
        emit(config, out, solve_csv(sol, eep));
        break;
      case OutputFormat::Table:
        emit(config, out, solve_table(p, sol, eep));
        break;
    }
    print_warnings(config, err, sol.warnings);
    if (!sol.converged) {
      err << "error: Newton iteration did not converge within " << p.spec.settings.max_iter << " iterations\n";
      return kExitNotConverged;
    }
    return kExitOk;
  });
}

int cmd_convergence(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate_config(config);
    if (config.ns.empty()) throw ValidationError("--n", "convergence needs a list of n values");
    const LoadedProblem p = load_problem(config, false);
    ConvergenceOptions options;
    options.error_grid = config.grid.value_or(kErrorGrid);
    options.parallel = true;
    const ConvergenceTable table =
        convergence_study(p.spec, config.ns, p.exact.empty() ? nullptr : &p.exact, options);

    std::string s;
    switch (config.format.value_or(OutputFormat::Table)) {
      case OutputFormat::Json: {
        json rows = json::array();
        for (const ConvergenceRow& r : table.rows) {
          rows.push_back({{"n", r.n},
                          {"error", r.error ? json(*r.error) : json(nullptr)},
                          {"residual", r.residual},
                          {"iterations", r.iterations},
                          {"seconds", r.seconds},
                          {"converged", r.converged},
                          {"failure", r.failure}});
        }
        json doc = {{"problem", p.name}, {"error_grid", options.error_grid}, {"rows", rows},
                    {"warnings", table.warnings}};
        s = doc.dump(2) + "\n";
        break;
      }
      case OutputFormat::Csv:
        s = "n,error,residual,iterations,seconds,converged,failure\n";
        for (const ConvergenceRow& r : table.rows) {
          s += fmt::format("{},{},{},{},{},{},{}\n", r.n, r.error ? machine(*r.error) : "", machine(r.residual),
                           r.iterations, machine(r.seconds), r.converged ? 1 : 0, csv_field(r.failure));
        }
        break;
      case OutputFormat::Table:
        s = fmt::format("{}  ({} basis)\n\n", p.name, family_name(p.spec.basis.family()));
        s += "     n    max error    residual   iter   seconds\n";
        for (const ConvergenceRow& r : table.rows) {
          if (!r.failure.empty()) {
            s += fmt::format("  {:>4}    failed: {}\n", r.n, r.failure);
            continue;
          }
          s += fmt::format("  {:>4}    {:>9}    {}   {:>4}   {}{}\n", r.n, r.error ? human(*r.error) : "-",
                           human(r.residual), r.iterations, human(r.seconds), r.converged ? "" : "  (not converged)");
        }
        break;
    }
    emit(config, out, s);
    print_warnings(config, err, table.warnings);

    bool any_ok = false;
    bool any_thrown = false;
    for (const ConvergenceRow& r : table.rows) {
      any_ok = any_ok || (r.failure.empty() && r.converged);
      any_thrown = any_thrown || !r.failure.empty();
      if (!r.failure.empty()) err << "error: n=" << r.n << ": " << r.failure << "\n";
    }
    if (any_ok) return kExitOk;
    return any_thrown ? kExitInput : kExitNotConverged;
  });
}

int cmd_eval(const RunConfig& config, std::span<const double> points, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (points.empty()) throw ValidationError("points", "empty point list");
    if (config.input.empty()) throw ValidationError("", "no solution file given");
    const StoredSolution stored = read_solution(read_file(config.input));

    EvalDiagnostics diag;
    std::vector<std::vector<double>> values;
    for (const Series& y : stored.series) values.push_back(orth_eval(y, points, &diag));

    std::string s;
    switch (config.format.value_or(OutputFormat::Csv)) {
      case OutputFormat::Json: {
        json vars = json::array();
        for (std::size_t v = 0; v < values.size(); ++v) {
          vars.push_back({{"name", stored.variables[v]}, {"values", values[v]}});
        }
        s = json{{"x", std::vector<double>(points.begin(), points.end())}, {"variables", vars}}.dump(2) + "\n";
        break;
      }
      case OutputFormat::Csv:
      case OutputFormat::Table: {
        const bool csv = config.format.value_or(OutputFormat::Csv) == OutputFormat::Csv;
        s = csv ? "x" : fmt::format("{:>10}", "x");
        for (const auto& name : stored.variables) s += csv ? "," + csv_field(name) : fmt::format("  {:>10}", name);
        s += "\n";
        for (std::size_t j = 0; j < points.size(); ++j) {
          s += csv ? machine(points[j]) : fmt::format("{:>10}", human(points[j]));
          for (const auto& col : values) s += csv ? "," + machine(col[j]) : fmt::format("  {:>10}", human(col[j]));
          s += "\n";
        }
        break;
      }
    }
    emit(config, out, s);
    if (diag.extrapolated > 0) {
      err << "warning: " << diag.extrapolated << " point(s) outside the solution domain (extrapolated)\n";
    }
    return kExitOk;
  });
}

int cmd_plotdata(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate_config(config);
    const LoadedProblem p = load_problem(config, true);
    const TauSolution sol = solve(p.spec);
    const Curves c = plot_curves(p, sol, config.grid.value_or(kPlotGrid));

    std::string s;
    switch (config.format.value_or(OutputFormat::Csv)) {
      case OutputFormat::Json: {
        json cols = json::object();
        for (std::size_t k = 0; k < c.names.size(); ++k) cols[c.names[k]] = c.columns[k];
        s = json{{"problem", p.name},
                 {"n", p.spec.settings.n},
                 {"kind", c.residual ? "residual" : "error"},
                 {"x", c.x},
                 {"columns", cols}}
                .dump(2) +
            "\n";
        break;
      }
      case OutputFormat::Csv:
      case OutputFormat::Table: {
        const bool csv = config.format.value_or(OutputFormat::Csv) == OutputFormat::Csv;
        s = fmt::format("# {} n={} {}\n", p.name, p.spec.settings.n,
                        c.residual ? "no exact solution: residual curves |LHS - f| per equation"
                                   : "pointwise |y - exact| per variable");
        s += csv ? "x" : fmt::format("{:>10}", "x");
        for (const auto& name : c.names) s += csv ? "," + name : fmt::format("  {:>16}", name);
        s += "\n";
        for (std::size_t j = 0; j < c.x.size(); ++j) {
          s += csv ? machine(c.x[j]) : fmt::format("{:>10}", human(c.x[j]));
          for (const auto& col : c.columns) s += csv ? "," + machine(col[j]) : fmt::format("  {:>16}", human(col[j]));
          s += "\n";
        }
        break;
      }
    }
    emit(config, out, s);
    print_warnings(config, err, sol.warnings);
    if (!sol.converged) {
      err << "error: Newton iteration did not converge\n";
      return kExitNotConverged;
    }
    return kExitOk;
  });
}

int cmd_list_examples(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::string s;
    const auto names = builtin_names();
    switch (config.format.value_or(OutputFormat::Table)) {
      case OutputFormat::Json: {
        json list = json::array();
        for (const auto& name : names) {
          const auto b = find_builtin(name);
          list.push_back({{"name", name}, {"description", b->description}, {"exact", !b->exact.empty()}});
        }
        s = list.dump(2) + "\n";
        break;
      }
      case OutputFormat::Csv:
        s = "name,description\n";
        for (const auto& name : names) s += name + "," + csv_field(find_builtin(name)->description) + "\n";
        break;
      case OutputFormat::Table:
        for (const auto& name : names) s += fmt::format("{:<14}{}\n", name, find_builtin(name)->description);
        break;
    }
    emit(config, out, s);
    return kExitOk;
  });
}

int run(const RunConfig& config, std::span<const double> points, std::ostream& out, std::ostream& err) {
  switch (config.command) {
    case Command::Solve:
      return cmd_solve(config, out, err);
    case Command::Convergence:
      return cmd_convergence(config, out, err);
    case Command::Eval:
      return cmd_eval(config, points, out, err);
    case Command::Plotdata:
      return cmd_plotdata(config, out, err);
    case Command::ListExamples:
      return cmd_list_examples(config, out, err);
  }
  return kExitInput;
}

}  // namespace tauspec::cli
