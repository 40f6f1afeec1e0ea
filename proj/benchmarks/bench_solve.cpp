#include <fstream>
#include <sstream>
#include <string>

#include <benchmark/benchmark.h>

#include <tauspec/problem.hpp>
#include <tauspec/solver.hpp>

using namespace tauspec;

namespace {

std::string document(const std::string& name) {
  std::ifstream in(std::string(TAUSPEC_PROBLEMS_DIR) + "/" + name + ".json");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void solve_builtin(benchmark::State& state, const std::string& name) {
  ParseOverrides o;
  o.n = static_cast<std::size_t>(state.range(0));
  const ProblemSpec spec = parse_problem(document(name), o);
  for (auto _ : state) benchmark::DoNotOptimize(solve(spec));
}

void BM_Example1(benchmark::State& state) { solve_builtin(state, "example1"); }
BENCHMARK(BM_Example1)->Arg(5)->Arg(9)->Arg(17)->Arg(33)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);

void BM_Example2(benchmark::State& state) { solve_builtin(state, "example2"); }
BENCHMARK(BM_Example2)->Arg(10)->Arg(20)->Arg(25)->Unit(benchmark::kMillisecond);

void BM_ExpOde(benchmark::State& state) { solve_builtin(state, "exp-ode"); }
BENCHMARK(BM_ExpOde)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond);

}  // namespace
