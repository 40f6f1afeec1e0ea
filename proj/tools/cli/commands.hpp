#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <tauspec/basis.hpp>
#include <tauspec/problem.hpp>

namespace tauspec::cli {

enum class Command { Solve, Convergence, Eval, Plotdata, ListExamples };
enum class OutputFormat { Table, Csv, Json };

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitSingular = 3;

struct RunConfig {
  Command command = Command::Solve;
  std::string input;  // problem file, built-in name, or (eval) solution file
  std::optional<OutputFormat> format;
  std::optional<std::string> out_path;
  std::vector<std::size_t> ns;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<Family> family;
  std::optional<std::size_t> grid;
  std::optional<InitialPolicy> initial;
  int verbosity = 0;
};

OutputFormat parse_format(std::string_view name);
InitialPolicy parse_initial(std::string_view name);
// "5,9,17" -> {5, 9, 17}; throws ValidationError
std::vector<std::size_t> parse_n_list(std::string_view text);

// Throws ValidationError when an override is out of range.
void validate_config(const RunConfig& config);

int cmd_solve(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_convergence(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_eval(const RunConfig& config, std::span<const double> points, std::ostream& out, std::ostream& err);
int cmd_plotdata(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_list_examples(const RunConfig& config, std::ostream& out, std::ostream& err);

int run(const RunConfig& config, std::span<const double> points, std::ostream& out, std::ostream& err);

}  // namespace tauspec::cli
