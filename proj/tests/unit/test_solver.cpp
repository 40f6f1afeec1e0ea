#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include <tauspec/error.hpp>
#include <tauspec/problem.hpp>
#include <tauspec/solution_io.hpp>
#include <tauspec/solver.hpp>

#include "test_helpers.hpp"

using namespace tauspec;

namespace {

ProblemSpec load(const std::string& name, std::size_t n, Family family = Family::ChebyshevT) {
  ParseOverrides o;
  o.n = n;
  o.family = family;
  return parse_problem(canonical_document(name), o);
}

double grid_error(const TauSolution& sol, const ExactSolution& exact, std::size_t points = 1001) {
  const auto grid = uniform_grid(sol.series.front().basis(), points);
  std::vector<std::vector<double>> values;
  for (const auto& f : exact) {
    std::vector<double> col;
    for (double x : grid) col.push_back(f(x));
    values.push_back(col);
  }
  double worst = 0.0;
  for (double e : error_vs_exact(sol, grid, values)) worst = std::max(worst, e);
  return worst;
}

const ExactSolution kExpMinus{[](double x) { return std::exp(-x); }};
const ExactSolution kExp{[](double x) { return std::exp(x); }};
const ExactSolution kSinhCosh{[](double x) { return std::sinh(x); }, [](double x) { return std::cosh(x); }};

ProblemSpec linear_doc(const std::string& body) { return parse_problem(body); }

}  // namespace

TEST_CASE("assemble y' - y = 0 at n = 2") {
  const ProblemSpec spec = load("exp-ode", 2);
  const TauSystem sys = assemble(spec, 2);
  Matrix want(2, 2);
  want << 1, -1, -1, 2;
  CHECK((sys.matrix - want).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(sys.rhs(0) == 1.0);
  CHECK(sys.rhs(1) == 0.0);
  REQUIRE(sys.rows.size() == 2);
  CHECK(sys.rows[0].kind == RowInfo::Kind::Condition);
  CHECK(sys.rows[1].kind == RowInfo::Kind::Equation);

  // a0 - a1 = 1, -a0 + 2 a1 = 0  ->  a = (2, 1), y = 2 + (2x - 1) = 1 + 2x
  const TauSolution sol = solve_linear(sys);
  CHECK(sol.series[0][0] == doctest::Approx(2.0));
  CHECK(sol.series[0][1] == doctest::Approx(1.0));
  CHECK(orth_eval(sol.series[0], 0.0) == doctest::Approx(1.0));
  CHECK(orth_eval(sol.series[0], 0.7) == doctest::Approx(2.4));
}

TEST_CASE("assembled system layout") {
  const ProblemSpec spec = load("exp-ode", 6);
  const TauSystem sys = assemble(spec, 6);
  for (int j = 0; j < 6; ++j) CHECK(sys.matrix(0, j) == doctest::Approx(j % 2 ? -1.0 : 1.0));
  CHECK(sys.matrix.rows() == 6);
  CHECK(sys.conditions_per_equation == std::vector<std::size_t>{1});

  const ProblemSpec aug = augment_variables(load("example1", 8));
  CHECK_THROWS_AS(assemble(parse_problem(canonical_document("example2")), 8), DomainError);
  const std::vector<Series> it = initial_iterate(aug);
  const TauSystem t = assemble(linearize(aug, it), 8);
  CHECK(t.matrix.rows() == 16);
  CHECK(t.rows[0].kind == RowInfo::Kind::Condition);
  CHECK(t.rows[1].kind == RowInfo::Kind::Condition);
  for (std::size_t r = 2; r < t.rows.size(); ++r) CHECK(t.rows[r].kind == RowInfo::Kind::Equation);
  // first equation row: y1' + y1 - int_0^1 y2 = f
  CHECK(t.rhs(2) == doctest::Approx(0.5 * (std::exp(-2.0) - 1.0)));
}

TEST_CASE("closed-form linear problems") {
  const TauSolution ode = solve(load("exp-ode", 20));
  CHECK(ode.converged);
  CHECK(ode.newton_log.size() == 1);
  CHECK(ode.assemblies == 1);
  CHECK(grid_error(ode, kExp) <= 1e-14);

  const TauSolution volt = solve(load("volterra-exp", 20));
  CHECK(grid_error(volt, kExp) <= 1e-13);

  // y + int_0^1 (x + t) y dt = f with y = 1 + 2x - x^2
  const ProblemSpec fred = linear_doc(R"({
    "basis": {"family": "legendre", "domain": [0, 1]},
    "variables": ["y"],
    "equations": [{"terms": [{"kind": "diff", "var": "y", "order": 0},
                             {"kind": "fredholm", "var": "y", "kernel": [[0, 1], [1, 0]]}],
                   "rhs": {"basis": "power", "coeffs": [1.9166666666666667, 3.6666666666666667, -1]}}],
    "conditions": [],
    "solve": {"n": 4}
  })");
  const TauSolution f = solve(fred);
  const ExactSolution quad{[](double x) { return 1.0 + 2.0 * x - x * x; }};
  CHECK(grid_error(f, quad) <= 1e-13);

  // homogeneous problem has the zero solution
  ProblemSpec zero = load("exp-ode", 10);
  zero.conditions[0].value = 0.0;
  CHECK(solve(zero).series[0].max_abs() == 0.0);
}

TEST_CASE("tau residual lives in the trailing coefficients") {
  // y' + x y = 0, y(0) = 1 -> exp(-x^2/2)
  const ProblemSpec spec = linear_doc(R"({
    "basis": {"family": "chebyshev", "domain": [0, 2]},
    "variables": ["y"],
    "equations": [{"terms": [{"kind": "diff", "var": "y", "order": 1},
                             {"kind": "diff", "var": "y", "order": 0,
                              "coeff": {"basis": "power", "coeffs": [0, 1]}}], "rhs": 0}],
    "conditions": [{"var": "y", "order": 0, "point": 0, "value": 1}],
    "solve": {"n": 14}
  })");
  const TauSolution sol = solve(spec);
  const Series defect = equation_defects(spec, sol.series)[0];
  const double scale = sol.series[0].max_abs();
  for (std::size_t i = 0; i + 1 < 14; ++i) CHECK(std::abs(defect[i]) <= 1e-10 * scale);
  CHECK(defect.max_abs() > 1e-12);
  CHECK(sol.residual.max_condition_defect() <= 1e-12);
  CHECK(sol.residual.grid.size() == 257);
}

TEST_CASE("nonlinear examples") {
  const TauSolution e17 = solve(load("example1", 17));
  CHECK(e17.converged);
  CHECK(grid_error(e17, kExpMinus) <= 1e-14);
  CHECK(e17.residual.max_condition_defect() <= 1e-12);

  const double e5 = grid_error(solve(load("example1", 5)), kExpMinus);
  CHECK(e5 >= 1e-5);
  CHECK(e5 <= 1e-3);

  const TauSolution e2 = solve(load("example2", 25));
  CHECK(e2.converged);
  CHECK(e2.iterations() <= 8);
  CHECK(grid_error(e2, kSinhCosh, 501) <= 1e-13);
  CHECK(e2.residual.max_condition_defect() <= 1e-12);
}

TEST_CASE("basis invariance on Example 1") {
  const TauSolution c = solve(load("example1", 33, Family::ChebyshevT));
  const TauSolution l = solve(load("example1", 33, Family::LegendreP));
  const auto grid = uniform_grid(c.series[0].basis(), 1001);
  const auto yc = orth_eval(c.series[0], grid);
  const auto yl = orth_eval(l.series[0], grid);
  double worst = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) worst = std::max(worst, std::abs(yc[j] - yl[j]));
  CHECK(worst <= 1e-12);
}

TEST_CASE("determinism") {
  const ProblemSpec spec = load("example2", 20);
  CHECK(solution_to_json(solve(spec), "example2") == solution_to_json(solve(spec), "example2"));
}

TEST_CASE("non-convergence returns the best iterate") {
  ProblemSpec spec = load("example1", 17);
  spec.settings.max_iter = 2;
  TauSolution sol;
  CHECK_NOTHROW(sol = solve(spec));
  CHECK_FALSE(sol.converged);
  CHECK(sol.newton_log.size() == 2);
  CHECK_FALSE(sol.warnings.empty());
}

TEST_CASE("singular systems are reported") {
  // y' = 1 with only y'(0) = 1: the constant is free
  const ProblemSpec spec = linear_doc(R"({
    "basis": {"family": "chebyshev", "domain": [0, 1]},
    "variables": ["y"],
    "equations": [{"terms": [{"kind": "diff", "var": "y", "order": 1}], "rhs": 1}],
    "conditions": [{"var": "y", "order": 1, "point": 0, "value": 1}],
    "solve": {"n": 6}
  })");
  CHECK_THROWS_AS(solve(spec), SingularSystemError);
}

TEST_CASE("error_vs_exact") {
  const TauSolution sol = solve(load("exp-ode", 12));
  const auto grid = uniform_grid(sol.series[0].basis(), 11);
  const std::vector<std::vector<double>> own{orth_eval(sol.series[0], grid)};
  CHECK(error_vs_exact(sol, grid, own)[0] == 0.0);
  const std::vector<std::vector<double>> too_many{own[0], own[0]};
  CHECK_THROWS_AS(error_vs_exact(sol, grid, too_many), DomainError);

  // y = 1
  const ProblemSpec one = linear_doc(R"({
    "basis": {"family": "legendre", "domain": [-2, 3]},
    "variables": ["y"],
    "equations": [{"terms": [{"kind": "diff", "var": "y", "order": 0}], "rhs": 1}],
    "conditions": [], "solve": {"n": 5}
  })");
  CHECK(grid_error(solve(one), {[](double) { return 1.0; }}) <= 1e-15);
}

TEST_CASE("convergence study") {
  const ProblemSpec ode = load("exp-ode", 20);
  const std::vector<std::size_t> ns{3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  ConvergenceOptions opts;
  opts.parallel = true;
  const ConvergenceTable t = convergence_study(ode, ns, &kExp, opts);
  REQUIRE(t.rows.size() == ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) CHECK(t.rows[i].n == ns[i]);
  for (std::size_t i = 1; i < ns.size(); ++i) {
    if (*t.rows[i - 1].error < 1e-13) break;
    CHECK(*t.rows[i].error < 0.5 * *t.rows[i - 1].error);
  }

  const std::vector<std::size_t> one{9};
  const ConvergenceTable single = convergence_study(load("example1", 9), one, &kExpMinus);
  const TauSolution direct = solve(load("example1", 9));
  CHECK(*single.rows[0].error == grid_error(direct, kExpMinus));
  CHECK(single.rows[0].residual == direct.residual.max_equation_defect());
  CHECK(single.rows[0].iterations == static_cast<int>(direct.iterations()));

  const std::vector<std::size_t> bad{1, 9};
  const ConvergenceTable partial = convergence_study(load("example1", 9), bad, &kExpMinus);
  CHECK_FALSE(partial.rows[0].failure.empty());
  CHECK(partial.rows[1].failure.empty());
}

TEST_CASE("solution file round trip") {
  const TauSolution sol = solve(load("example2", 12));
  const StoredSolution back = read_solution(solution_to_json(sol, "example2"));
  REQUIRE(back.series.size() == sol.series.size());
  for (std::size_t v = 0; v < sol.series.size(); ++v) CHECK(back.series[v].coeffs() == sol.series[v].coeffs());
  CHECK(back.variables == sol.variables);
  CHECK(back.problem == "example2");
  CHECK_THROWS_AS(read_solution("{\"format\": \"other/2\"}"), ValidationError);
  CHECK_THROWS_AS(read_solution("[1, 2"), ValidationError);
}
