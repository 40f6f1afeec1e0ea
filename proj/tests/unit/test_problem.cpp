#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include <tauspec/error.hpp>
#include <tauspec/problem.hpp>
#include <tauspec/solver.hpp>

#include "test_helpers.hpp"

using namespace tauspec;

namespace {

const char* kMinimal = R"({
  "basis": {"family": "chebyshev", "domain": [0, 1]},
  "variables": ["y"],
  "equations": [{"terms": [{"kind": "diff", "var": "y", "order": 1},
                           {"kind": "diff", "var": "y", "order": 0, "coeff": -1}],
                 "rhs": 0}],
  "conditions": [{"var": "y", "order": 0, "point": 0, "value": 1}],
  "solve": {"n": 8}
})";

// y' + y^2 = 1 + x^2 on [0, 1], y(0) = 0: solution y = x
const char* kQuadratic = R"({
  "basis": {"family": "legendre", "domain": [0, 1]},
  "variables": ["y"],
  "equations": [{"terms": [{"kind": "diff", "var": "y", "order": 1},
                           {"kind": "product", "factors": [{"var": "y"}, {"var": "y"}]}],
                 "rhs": {"basis": "power", "coeffs": [1, 0, 1]}}],
  "conditions": [{"var": "y", "order": 0, "point": 0, "value": 0}],
  "solve": {"n": 12}
})";

// u v w with three unknowns, only used for linearization algebra
const char* kTriple = R"({
  "basis": {"family": "chebyshev", "domain": [-1, 1]},
  "variables": ["u", "v", "w"],
  "equations": [{"terms": [{"kind": "diff", "var": "u", "order": 0},
                           {"kind": "product", "weight": 1.5,
                            "factors": [{"var": "u"}, {"var": "v"}, {"var": "w"}]}], "rhs": 0},
                {"terms": [{"kind": "diff", "var": "v", "order": 0}], "rhs": 0},
                {"terms": [{"kind": "diff", "var": "w", "order": 0}], "rhs": 0}],
  "conditions": [],
  "solve": {"n": 10}
})";

Series cheb(std::vector<double> c, double a = -1.0, double b = 1.0) {
  return Series(BasisSpec(Family::ChebyshevT, a, b), std::move(c));
}

double max_abs_diff(const Series& a, const Series& b) { return (a - b).max_abs(); }

std::string with_n(std::string doc, const std::string& from, const std::string& to) {
  doc.replace(doc.find(from), from.size(), to);
  return doc;
}

}  // namespace

TEST_CASE("parse minimal document") {
  const ProblemSpec spec = parse_problem(kMinimal);
  REQUIRE(spec.equations.size() == 1);
  CHECK(spec.equations[0].linear.size() == 2);
  CHECK(spec.equations[0].products.empty());
  REQUIRE(spec.conditions.size() == 1);
  CHECK(spec.conditions[0].value == 1.0);
  CHECK(spec.is_linear());
  CHECK(spec.settings.n == 8);
  CHECK(spec.basis.family() == Family::ChebyshevT);
}

TEST_CASE("parse canonical examples") {
  const ProblemSpec e1 = parse_problem(canonical_document("example1"));
  CHECK(e1.variables.size() == 1);
  REQUIRE(e1.equations[0].products.size() == 1);
  const ProductTermSpec& sq = e1.equations[0].products[0];
  CHECK(sq.integral == IntegralKind::Fredholm);
  CHECK(sq.factors.size() == 2);
  CHECK(sq.augment);
  CHECK(e1.has_augmentation());

  const ProblemSpec e2 = parse_problem(canonical_document("example2"));
  CHECK(e2.variables.size() == 2);
  CHECK_FALSE(e2.has_augmentation());
  int kernel_terms = 0;
  for (const EquationSpec& eq : e2.equations) {
    for (const LinearTermSpec& t : eq.linear) {
      if (t.kind != TermKind::Volterra) continue;
      ++kernel_terms;
      for (double x : {0.2, 0.9})
        for (double t0 : {0.1, 0.5}) CHECK(std::abs(std::abs((*t.kernel)(x, t0)) - std::abs(x - t0)) < 1e-15);
    }
  }
  CHECK(kernel_terms == 2);
  std::vector<std::pair<std::size_t, std::size_t>> integrands;
  for (const EquationSpec& eq : e2.equations)
    for (const ProductTermSpec& p : eq.products)
      if (p.integral == IntegralKind::Volterra) integrands.emplace_back(p.factors[0].variable, p.factors[1].variable);
  CHECK(integrands.size() == 3);
}

TEST_CASE("parse errors carry a position") {
  auto fails_at = [](const std::string& doc, const std::string& where) {
    try {
      parse_problem(doc);
    } catch (const ValidationError& e) {
      CHECK_MESSAGE(e.path().find(where) != std::string::npos, e.what());
      return;
    }
    FAIL("no ValidationError for " << where);
  };
  fails_at(with_n(kMinimal, "\"solve\"", "\"colour\": 1, \"solve\""), "colour");
  fails_at(with_n(kMinimal, "\"var\": \"y\", \"order\": 1", "\"var\": \"z\", \"order\": 1"), "/equations/0/terms/0");
  fails_at(with_n(kMinimal, "\"point\": 0", "\"point\": 2"), "/conditions/0");
  fails_at(with_n(kMinimal, "\"chebyshev\"", "\"hermite\""), "/basis");
  fails_at("{not json", "");

  // y' = x^3, y(0) = 0 needs n >= 1 + 3
  const std::string cubic = with_n(with_n(kMinimal, "\"rhs\": 0", "\"rhs\": {\"basis\": \"power\", \"coeffs\": [0, 0, 0, 1]}"),
                                   "\"n\": 8", "\"n\": 3");
  try {
    parse_problem(cubic);
    FAIL("n = 3 accepted");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("n >= nu + lambda") != std::string::npos);
  }
  ParseOverrides ok;
  ok.n = 4;
  CHECK_NOTHROW(parse_problem(cubic, ok));
}

TEST_CASE("power-basis rhs is converted") {
  const ProblemSpec q = parse_problem(kQuadratic);
  for (double x : {0.0, 0.3, 1.0}) CHECK(orth_eval(q.equations[0].rhs, x) == doctest::Approx(1.0 + x * x));
}

TEST_CASE("overrides") {
  ParseOverrides o;
  o.family = Family::LegendreP;
  o.n = 21;
  o.newton_tol = 1e-12;
  o.max_iter = 3;
  o.initial = InitialPolicy::Zero;
  const ProblemSpec spec = parse_problem(canonical_document("example1"), o);
  CHECK(spec.basis.family() == Family::LegendreP);
  CHECK(spec.settings.n == 21);
  CHECK(spec.settings.newton_tol == 1e-12);
  CHECK(spec.settings.max_iter == 3);
  CHECK(spec.settings.initial == InitialPolicy::Zero);
}

TEST_CASE("linearize y^2") {
  const ProblemSpec spec = parse_problem(kQuadratic);
  const BasisSpec& b = spec.basis;
  const std::vector<Series> y0{from_power(b, std::vector<double>{0.5, -1.0, 2.0})};
  const ProblemSpec lin = linearize(spec, y0);
  CHECK(lin.is_linear());
  // defect of the linearized equation at y is y' + 2 y0 y - y0^2 - f
  const Series y = from_power(b, std::vector<double>{1.0, 0.25, -0.5, 0.125});
  const std::vector<Series> ys{y};
  const Series got = equation_defects(lin, ys)[0];
  const Series want = apply_order(y, 1) + 2.0 * product(y0[0], y) - product(y0[0], y0[0]) - spec.equations[0].rhs;
  CHECK(max_abs_diff(got, want) < 1e-14);

  CHECK_THROWS_AS(linearize(spec, std::vector<Series>{}), DomainError);
}

TEST_CASE("linearize three factors and weights") {
  const ProblemSpec spec = parse_problem(kTriple);
  const std::vector<Series> at{cheb({0.5, 0.25}), cheb({1.0, 0.0, -0.5}), cheb({-0.75, 1.0})};
  const std::vector<Series> y{cheb({0.1, 0.2, 0.3}), cheb({-1.0, 0.4}), cheb({0.6, 0.0, 0.0, 0.2})};
  const ProblemSpec lin = linearize(spec, at);
  const Series got = equation_defects(lin, y)[0];
  const Series& u0 = at[0];
  const Series& v0 = at[1];
  const Series& w0 = at[2];
  const Series taylor = product(product(v0, w0), y[0]) + product(product(u0, w0), y[1]) +
                        product(product(u0, v0), y[2]) - 2.0 * product(product(u0, v0), w0);
  const Series want = y[0] + 1.5 * taylor;
  CHECK(max_abs_diff(got, want) < 1e-14);

  ProblemSpec doubled = spec;
  doubled.equations[0].products[0].weight *= 2.0;
  const Series got2 = equation_defects(linearize(doubled, at), y)[0];
  CHECK(max_abs_diff(got2 - y[0], 2.0 * (got - y[0])) < 1e-14);
}

TEST_CASE("linearize leaves linear problems alone") {
  const ProblemSpec spec = parse_problem(kMinimal);
  const std::vector<Series> any{cheb({3.0, -2.0, 1.0}, 0.0, 1.0)};
  const TauSystem a = assemble(spec, 8);
  const TauSystem b = assemble(linearize(spec, any), 8);
  CHECK(a.matrix == b.matrix);
  CHECK(a.rhs == b.rhs);
}

TEST_CASE("fixed point of the linearization") {
  const ProblemSpec spec = parse_problem(kQuadratic);
  const std::vector<Series> exact{from_power(spec.basis, std::vector<double>{0.0, 1.0}).resized(spec.settings.n)};
  const TauSystem sys = assemble(linearize(spec, exact), spec.settings.n);
  Vector a = Vector::Zero(sys.matrix.cols());
  for (std::size_t i = 0; i < exact[0].size(); ++i) a(static_cast<Eigen::Index>(i)) = exact[0][i];
  CHECK((sys.matrix * a - sys.rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("augmentation") {
  const ProblemSpec e1 = parse_problem(canonical_document("example1"));
  const ProblemSpec aug = augment_variables(e1);
  REQUIRE(aug.variables.size() == 2);
  CHECK(aug.equations.size() == 2);
  REQUIRE(aug.conditions.size() == 2);
  const ConditionSpec& c = aug.conditions[1];
  CHECK(c.terms.front().variable == 1);
  CHECK(c.terms.front().point == 0.0);
  CHECK(c.value == 1.0);
  CHECK(aug.equations[0].products.empty());

  // defining equation: aux' - 2 y y' = 0
  const Series y = cheb({0.3, -0.2, 0.1}, 0.0, 1.0);
  const Series sq = product(y, y);
  const std::vector<Series> pair{y, sq};
  CHECK(equation_defects(aug, pair)[1].max_abs() < 1e-14);

  // a constant: y' = 0, y(0) = 3, aux = y^2 starts at 9
  const std::string doc = R"({
    "basis": {"family": "chebyshev", "domain": [0, 1]},
    "variables": ["y"],
    "equations": [{"terms": [{"kind": "diff", "var": "y", "order": 1},
                             {"kind": "product", "factors": [{"var": "y"}, {"var": "y"}],
                              "integral": {"kind": "fredholm", "kernel": [[1]]}, "augment": true}],
                   "rhs": 9}],
    "conditions": [{"var": "y", "order": 0, "point": 0, "value": 3}],
    "solve": {"n": 6}
  })";
  const ProblemSpec c2 = augment_variables(parse_problem(doc));
  CHECK(c2.conditions.back().value == 9.0);

  // the original conditions cannot fix the auxiliary value here
  const std::string hidden = with_n(doc, "\"order\": 0, \"point\": 0", "\"order\": 1, \"point\": 0");
  CHECK_THROWS_AS(augment_variables(parse_problem(hidden)), ValidationError);
}

TEST_CASE("initial iterate") {
  const ProblemSpec aug = augment_variables(parse_problem(canonical_document("example1")));
  const auto it = initial_iterate(aug);
  REQUIRE(it.size() == 2);
  for (const Series& s : it) {
    CHECK(s[0] == doctest::Approx(1.0));
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(std::abs(s[i]) < 1e-15);
  }

  ProblemSpec zero = aug;
  zero.settings.initial = InitialPolicy::Zero;
  for (const Series& s : initial_iterate(zero)) CHECK(s.max_abs() == 0.0);

  // y(0) = 0, y'(0) = 1 on [0, 1] -> x = (T*_0 + T*_1) / 2
  const std::string doc = R"({
    "basis": {"family": "chebyshev", "domain": [0, 1]},
    "variables": ["y"],
    "equations": [{"terms": [{"kind": "diff", "var": "y", "order": 2},
                             {"kind": "product", "factors": [{"var": "y"}, {"var": "y"}]}], "rhs": 0}],
    "conditions": [{"var": "y", "order": 0, "point": 0, "value": 0},
                   {"var": "y", "order": 1, "point": 0, "value": 1}],
    "solve": {"n": 8}
  })";
  const auto lin = initial_iterate(parse_problem(doc));
  CHECK(lin[0][0] == doctest::Approx(0.5));
  CHECK(lin[0][1] == doctest::Approx(0.5));
  for (std::size_t i = 2; i < lin[0].size(); ++i) CHECK(std::abs(lin[0][i]) < 1e-14);
}
