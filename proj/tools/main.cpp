#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <tauspec/error.hpp>

#include "commands.hpp"

using namespace tauspec::cli;

namespace {

struct RawFlags {
  std::string n;
  std::string basis;
  std::string format;
  std::string out;
  std::string initial;
  double tol = 0.0;
  int max_iter = 0;
  std::size_t grid = 0;
};

void add_common(CLI::App* sub, RawFlags& raw, bool with_n) {
  if (with_n) sub->add_option("--n", raw.n, "number of coefficients (convergence: comma list)");
  sub->add_option("--basis", raw.basis, "chebyshev | legendre");
  sub->add_option("--tol", raw.tol, "Newton tolerance");
  sub->add_option("--max-iter", raw.max_iter, "Newton iteration cap");
  sub->add_option("--format", raw.format, "table | csv | json");
  sub->add_option("--out", raw.out, "write output to PATH");
  sub->add_option("--grid", raw.grid, "grid points (residual / error / plot)");
  sub->add_option("--initial", raw.initial, "conditions | zero");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tau spectral solver for integro-differential equations"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "print warnings");

  RawFlags raw;
  std::string input;
  std::vector<double> points;

  auto* solve = app.add_subcommand("solve", "solve a problem file or built-in problem");
  solve->add_option("problem", input, "problem file or built-in name")->required();
  add_common(solve, raw, true);

  auto* conv = app.add_subcommand("convergence", "error/residual table over several n");
  conv->add_option("problem", input, "problem file or built-in name")->required();
  add_common(conv, raw, true);

  auto* eval = app.add_subcommand("eval", "evaluate a stored solution");
  eval->add_option("solution", input, "solution file")->required();
  eval->add_option("points", points, "evaluation points");
  eval->add_option("--x", points, "evaluation points, comma separated")->delimiter(',');
  eval->add_option("--format", raw.format, "table | csv | json");
  eval->add_option("--out", raw.out, "write output to PATH");

  auto* plot = app.add_subcommand("plotdata", "pointwise error (or residual) curves");
  plot->add_option("problem", input, "problem file or built-in name")->required();
  add_common(plot, raw, true);

  auto* list = app.add_subcommand("list-examples", "list built-in problems");
  list->add_option("--format", raw.format, "table | csv | json");
  list->add_option("--out", raw.out, "write output to PATH");

  for (auto* sub : {solve, conv, eval, plot, list}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  RunConfig config;
  config.input = input;
  config.verbosity = verbosity;
  if (*solve) config.command = Command::Solve;
  if (*conv) config.command = Command::Convergence;
  if (*eval) config.command = Command::Eval;
  if (*plot) config.command = Command::Plotdata;
  if (*list) config.command = Command::ListExamples;

  try {
    if (!raw.n.empty()) config.ns = parse_n_list(raw.n);
    if (!raw.basis.empty()) config.family = tauspec::parse_family(raw.basis);
    if (!raw.format.empty()) config.format = parse_format(raw.format);
    if (!raw.out.empty()) config.out_path = raw.out;
    if (!raw.initial.empty()) config.initial = parse_initial(raw.initial);
    const CLI::App* active = app.get_subcommands().front();
    auto given = [active](const char* name) {
      const CLI::Option* opt = active->get_option_no_throw(name);
      return opt && opt->count() > 0;
    };
    if (given("--tol")) config.tol = raw.tol;
    if (given("--max-iter")) config.max_iter = raw.max_iter;
    if (given("--grid")) config.grid = raw.grid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return run(config, points, std::cout, std::cerr);
}
