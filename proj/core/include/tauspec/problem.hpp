#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tauspec/basis.hpp"
#include "tauspec/opalg.hpp"

namespace tauspec {

enum class TermKind { Diff, Int, Volterra, Fredholm };
enum class IntegralKind { None, Volterra, Fredholm };
enum class InitialPolicy { Conditions, Zero, User };

std::string_view term_kind_name(TermKind kind);

/// One linear term of an equation acting on a single variable.
///  Diff:     coeff(x) * d^order y / dx^order          (order >= 0)
///  Int:      coeff(x) * (indefinite integral)^order y (order >= 1)
///  Volterra: int_{lower}^{x} K(x,t) y^{(order)}(t) dt (order >= 0)
///  Fredholm: int_a^b K(x,t) y^{(order)}(t) dt         (order >= 0)
struct LinearTermSpec {
  std::size_t variable = 0;
  TermKind kind = TermKind::Diff;
  int order = 0;
  std::optional<Series> coeff;  ///< Diff/Int only; shifted-basis coefficients
  std::optional<KernelPoly> kernel;  ///< Volterra/Fredholm only
  double lower = 0.0;                ///< Volterra lower limit

  /// Derivative order as a signed integer (negative for repeated integrals).
  int signed_order() const noexcept { return kind == TermKind::Int ? -order : order; }
};

/// Factor y_v^{(order)}: derivative for order > 0, repeated integral for order < 0.
struct Factor {
  std::size_t variable = 0;
  int order = 0;
};

/// weight * prod_i factor_i, optionally under int K(x,t) (...)(t) dt.
struct ProductTermSpec {
  double weight = 1.0;
  std::vector<Factor> factors;
  IntegralKind integral = IntegralKind::None;
  std::optional<KernelPoly> kernel;
  double lower = 0.0;
  bool augment = false;  ///< replace the integrand by an auxiliary variable
  /// (point, value) for the auxiliary variable when the conditions of the
  /// factors cannot supply it.
  std::optional<std::pair<double, double>> aux_initial;
};

struct ConditionTerm {
  std::size_t variable = 0;
  int derivative = 0;
  double point = 0.0;
  double weight = 1.0;
};

/// sum_terms weight * y_v^{(d)}(x_c) = value.
struct ConditionSpec {
  std::vector<ConditionTerm> terms;
  double value = 0.0;
  std::optional<std::size_t> equation;  ///< row attribution; defaults to the first term's variable
};

struct EquationSpec {
  std::vector<LinearTermSpec> linear;
  std::vector<ProductTermSpec> products;
  Series rhs;
};

struct SolverSettings {
  std::size_t n = 16;
  double newton_tol = 1e-14;
  int max_iter = 25;
  InitialPolicy initial = InitialPolicy::Conditions;
  std::vector<std::vector<double>> initial_coeffs;  ///< InitialPolicy::User
  bool damping = false;
  bool refine = false;
  std::size_t residual_grid = 257;
  int max_order = 8;
};

struct ProblemSpec {
  explicit ProblemSpec(BasisSpec b) : basis(b) {}

  BasisSpec basis;
  std::vector<std::string> variables;
  std::vector<EquationSpec> equations;
  std::vector<ConditionSpec> conditions;
  SolverSettings settings;
  std::vector<std::string> warnings;

  std::size_t variable_count() const noexcept { return variables.size(); }
  bool is_linear() const noexcept;
  bool has_augmentation() const noexcept;
  std::size_t condition_count() const noexcept { return conditions.size(); }
  /// Highest right-hand-side degree.
  std::size_t rhs_degree() const noexcept;
  /// Equation each condition row is attributed to.
  std::size_t condition_equation(std::size_t c) const;
};

struct NewtonState {
  int iteration = 0;
  std::vector<Series> iterate;
  double update_norm = 0.0;
  double residual_norm = 0.0;
};

/// Values that replace the document's own settings before validation.
struct ParseOverrides {
  std::optional<Family> family;
  std::optional<std::size_t> n;
  std::optional<double> newton_tol;
  std::optional<int> max_iter;
  std::optional<InitialPolicy> initial;
  std::optional<std::size_t> residual_grid;
};

/// Parses and validates a JSON problem document. Errors carry a JSON pointer.
ProblemSpec parse_problem(std::string_view document, const ParseOverrides& overrides = {});

/// Structural checks shared by the parser and programmatic construction.
void validate_problem(const ProblemSpec& spec);

/// Newton linearization about `iterate`: each product of m factors becomes
/// sum_i (prod_{j != i} u_j^k) u_i on the left and (m-1) prod_j u_j^k on the
/// right. Frozen coefficient polynomials are cut to n coefficients.
ProblemSpec linearize(const ProblemSpec& spec, std::span<const Series> iterate);

/// Replaces every product term flagged `augment` by an auxiliary variable
/// holding its integrand, with the chain-rule equation and initial value.
ProblemSpec augment_variables(const ProblemSpec& spec);

/// Starting iterate chosen by spec.settings.initial. Warnings (for instance a
/// least-squares fallback) are appended to `warnings` when given.
std::vector<Series> initial_iterate(const ProblemSpec& spec,
                                    std::vector<std::string>* warnings = nullptr);

/// Value of factor y_v^{(order)} for the current iterate.
Series factor_value(const Factor& factor, std::span<const Series> iterate);

}  // namespace tauspec
