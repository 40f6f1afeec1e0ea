#include "tauspec/problem.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>

#include "tauspec/error.hpp"

namespace tauspec {

std::string_view term_kind_name(TermKind kind) {
  switch (kind) {
    case TermKind::Diff: return "diff";
    case TermKind::Int: return "int";
    case TermKind::Volterra: return "volterra";
    case TermKind::Fredholm: return "fredholm";
  }
  return "?";
}

bool ProblemSpec::is_linear() const noexcept {
  return std::all_of(equations.begin(), equations.end(),
                     [](const EquationSpec& e) { return e.products.empty(); });
}

bool ProblemSpec::has_augmentation() const noexcept {
  for (const auto& e : equations) {
    for (const auto& p : e.products) {
      if (p.augment) return true;
    }
  }
  return false;
}

std::size_t ProblemSpec::rhs_degree() const noexcept {
  std::size_t lambda = 0;
  for (const auto& e : equations) lambda = std::max(lambda, e.rhs.degree());
  return lambda;
}

std::size_t ProblemSpec::condition_equation(std::size_t c) const {
  const ConditionSpec& cond = conditions.at(c);
  if (cond.equation) return *cond.equation;
  return cond.terms.empty() ? 0 : cond.terms.front().variable;
}

// ---------------------------------------------------------------------------
// Validation

void validate_problem(const ProblemSpec& spec) {
  const std::size_t m = spec.variables.size();
  if (m == 0) throw ValidationError("/variables", "at least one variable is required");
  std::set<std::string> names(spec.variables.begin(), spec.variables.end());
  if (names.size() != m) throw ValidationError("/variables", "variable names must be unique");
  if (spec.equations.size() != m) {
    throw ValidationError("/equations", "need exactly one equation per variable (" + std::to_string(m) +
                                            "), got " + std::to_string(spec.equations.size()));
  }
  const int cap = spec.settings.max_order;

  auto check_var = [m](std::size_t v, const std::string& path) {
    if (v >= m) throw ValidationError(path, "unknown variable index " + std::to_string(v));
  };

  for (std::size_t e = 0; e < m; ++e) {
    const EquationSpec& eq = spec.equations[e];
    const std::string base = "/equations/" + std::to_string(e);
    if (!(eq.rhs.basis() == spec.basis)) throw ValidationError(base + "/rhs", "basis/domain mismatch");
    std::size_t t = 0;
    for (const auto& term : eq.linear) {
      const std::string path = base + "/terms/" + std::to_string(t++);
      check_var(term.variable, path + "/var");
      const bool kernel_kind = term.kind == TermKind::Volterra || term.kind == TermKind::Fredholm;
      if (kernel_kind != term.kernel.has_value()) {
        throw ValidationError(path, "kernel must be present exactly for volterra/fredholm terms");
      }
      if (term.kernel && !(term.kernel->basis() == spec.basis)) {
        throw ValidationError(path + "/kernel", "basis/domain mismatch");
      }
      if (term.coeff && !(term.coeff->basis() == spec.basis)) {
        throw ValidationError(path + "/coeff", "basis/domain mismatch");
      }
      if (term.kind == TermKind::Int && term.order < 1) {
        throw ValidationError(path + "/order", "integral order must be at least 1");
      }
      if (term.kind != TermKind::Int && term.order < 0) {
        throw ValidationError(path + "/order", "order must be non-negative");
      }
      if (term.order > cap) {
        throw ValidationError(path + "/order", "order exceeds the cap of " + std::to_string(cap));
      }
      if (term.kind == TermKind::Volterra && (term.lower < spec.basis.a() || term.lower > spec.basis.b())) {
        throw ValidationError(path + "/lower", "Volterra lower limit outside the domain");
      }
    }
    for (const auto& prod : eq.products) {
      const std::string path = base + "/terms/" + std::to_string(t++);
      if (prod.factors.size() < 2) throw ValidationError(path + "/factors", "a product needs at least two factors");
      for (std::size_t f = 0; f < prod.factors.size(); ++f) {
        check_var(prod.factors[f].variable, path + "/factors/" + std::to_string(f) + "/var");
        if (std::abs(prod.factors[f].order) > cap) {
          throw ValidationError(path + "/factors/" + std::to_string(f) + "/order",
                                "order exceeds the cap of " + std::to_string(cap));
        }
      }
      if ((prod.integral != IntegralKind::None) != prod.kernel.has_value()) {
        throw ValidationError(path + "/integral", "kernel must be present exactly for integral products");
      }
      if (prod.augment && prod.integral == IntegralKind::None) {
        throw ValidationError(path + "/augment", "augmentation applies to integrands only");
      }
      if (prod.integral == IntegralKind::Volterra && (prod.lower < spec.basis.a() || prod.lower > spec.basis.b())) {
        throw ValidationError(path + "/integral/lower", "Volterra lower limit outside the domain");
      }
    }
  }

  std::vector<std::size_t> per_equation(m, 0);
  for (std::size_t c = 0; c < spec.conditions.size(); ++c) {
    const ConditionSpec& cond = spec.conditions[c];
    const std::string path = "/conditions/" + std::to_string(c);
    if (cond.terms.empty()) throw ValidationError(path, "a condition needs at least one term");
    for (std::size_t k = 0; k < cond.terms.size(); ++k) {
      const ConditionTerm& term = cond.terms[k];
      const std::string tp = path + "/terms/" + std::to_string(k);
      check_var(term.variable, tp + "/var");
      if (term.point < spec.basis.a() || term.point > spec.basis.b()) {
        throw ValidationError(tp + "/point", "condition point outside the domain");
      }
      if (term.derivative < 0 || term.derivative > cap) {
        throw ValidationError(tp + "/order", "derivative order out of range");
      }
    }
    const std::size_t e = spec.condition_equation(c);
    if (e >= m) throw ValidationError(path + "/equation", "unknown equation index " + std::to_string(e));
    ++per_equation[e];
  }

  const std::size_t nu = spec.conditions.size();
  const std::size_t lambda = spec.rhs_degree();
  const std::size_t n = spec.settings.n;
  if (n < nu + lambda || n < 1) {
    throw ValidationError("/solve/n", "n = " + std::to_string(n) + " violates n >= nu + lambda = " +
                                          std::to_string(nu) + " + " + std::to_string(lambda));
  }
  for (std::size_t e = 0; e < m; ++e) {
    if (per_equation[e] >= n) {
      throw ValidationError("/solve/n", "n = " + std::to_string(n) + " leaves no operator rows for equation " +
                                            std::to_string(e) + " (" + std::to_string(per_equation[e]) +
                                            " conditions attributed to it)");
    }
  }
  if (spec.settings.max_iter < 1) throw ValidationError("/solve/max_iter", "must be at least 1");
  if (!(spec.settings.newton_tol > 0.0)) throw ValidationError("/solve/newton_tol", "must be positive");
  if (spec.settings.residual_grid < 1) throw ValidationError("/solve/grid", "must be at least 1");
  if (spec.settings.initial == InitialPolicy::User && spec.settings.initial_coeffs.size() != m) {
    throw ValidationError("/solve/initial", "need one coefficient list per variable");
  }
}

// ---------------------------------------------------------------------------
// Newton linearization

Series factor_value(const Factor& factor, std::span<const Series> iterate) {
  if (factor.variable >= iterate.size()) throw DomainError("factor references a missing iterate");
  return apply_order(iterate[factor.variable], factor.order);
}

namespace {

bool cut_to(Series& s, std::size_t n) {
  bool dropped = false;
  for (std::size_t i = n; i < s.size(); ++i) dropped = dropped || s.coeffs()[i] != 0.0;
  if (s.size() > n) s = s.resized(n);
  return dropped;
}

}  // namespace

ProblemSpec linearize(const ProblemSpec& spec, std::span<const Series> iterate) {
  const std::size_t m = spec.variables.size();
  if (iterate.size() != m) {
    throw DomainError("iterate has " + std::to_string(iterate.size()) + " series for " +
                      std::to_string(m) + " variables");
  }
  for (const auto& s : iterate) require_same_basis(s.basis(), spec.basis);

  const std::size_t n = spec.settings.n;
  ProblemSpec out = spec;
  bool truncated = false;
  for (std::size_t e = 0; e < m; ++e) {
    EquationSpec& eq = out.equations[e];
    eq.products.clear();
    for (const ProductTermSpec& prod : spec.equations[e].products) {
      std::vector<Series> frozen;
      frozen.reserve(prod.factors.size());
      for (const Factor& f : prod.factors) frozen.push_back(factor_value(f, iterate));

      const std::size_t count = prod.factors.size();
      for (std::size_t i = 0; i < count; ++i) {
        Series others(spec.basis, std::vector<double>{prod.weight});
        for (std::size_t j = 0; j < count; ++j) {
          if (j == i) continue;
          others = product(others, frozen[j]);
          truncated = cut_to(others, n) || truncated;
        }
        const Factor& f = prod.factors[i];
        LinearTermSpec term;
        term.variable = f.variable;
        if (prod.integral == IntegralKind::None) {
          term.kind = f.order >= 0 ? TermKind::Diff : TermKind::Int;
          term.order = std::abs(f.order);
          term.coeff = std::move(others);
        } else {
          term.kind = prod.integral == IntegralKind::Volterra ? TermKind::Volterra : TermKind::Fredholm;
          term.order = f.order;
          term.kernel = prod.kernel->times_t(others);
          term.lower = prod.lower;
        }
        eq.linear.push_back(std::move(term));
      }

      Series all(spec.basis, std::vector<double>{static_cast<double>(count - 1) * prod.weight});
      for (const Series& u : frozen) all = product(all, u);
      if (prod.integral == IntegralKind::Volterra) {
        all = apply_volterra(*prod.kernel, prod.lower, all);
      } else if (prod.integral == IntegralKind::Fredholm) {
        all = apply_fredholm(*prod.kernel, all);
      }
      eq.rhs += all;
    }
  }
  if (truncated) {
    out.warnings.push_back("frozen coefficient polynomials truncated to " + std::to_string(n) +
                           " coefficients");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Augmentation

namespace {

/// Value of y_v^{(d)} at some point fixed by a single-term condition.
std::optional<double> conditioned_value(const ProblemSpec& spec, const Factor& f, double point) {
  if (f.order < 0) return std::nullopt;
  for (const ConditionSpec& c : spec.conditions) {
    if (c.terms.size() != 1) continue;
    const ConditionTerm& t = c.terms.front();
    if (t.variable == f.variable && t.derivative == f.order && t.point == point && t.weight != 0.0) {
      return c.value / t.weight;
    }
  }
  return std::nullopt;
}

std::optional<std::pair<double, double>> auxiliary_initial(const ProblemSpec& spec,
                                                           const ProductTermSpec& prod) {
  std::vector<double> points;
  for (const ConditionSpec& c : spec.conditions) {
    if (c.terms.size() == 1) points.push_back(c.terms.front().point);
  }
  for (double x : points) {
    double value = 1.0;
    bool known = true;
    for (const Factor& f : prod.factors) {
      const auto v = conditioned_value(spec, f, x);
      if (!v) {
        known = false;
        break;
      }
      value *= *v;
    }
    if (known) return std::make_pair(x, value);
  }
  return std::nullopt;
}

}  // namespace

ProblemSpec augment_variables(const ProblemSpec& spec) {
  if (!spec.has_augmentation()) return spec;
  ProblemSpec out = spec;
  std::size_t aux_count = 0;
  for (std::size_t e = 0; e < spec.equations.size(); ++e) {
    std::vector<ProductTermSpec> kept;
    for (std::size_t p = 0; p < spec.equations[e].products.size(); ++p) {
      const ProductTermSpec& prod = spec.equations[e].products[p];
      if (!prod.augment) {
        kept.push_back(prod);
        continue;
      }
      const auto initial = prod.aux_initial ? prod.aux_initial : auxiliary_initial(spec, prod);
      if (!initial) {
        throw ValidationError("/equations/" + std::to_string(e) + "/terms",
                              "cannot derive the initial value of the auxiliary variable from the "
                              "conditions; supply \"aux_initial\"");
      }

      const std::size_t aux = out.variables.size();
      std::string name = "aux" + std::to_string(++aux_count);
      while (std::find(out.variables.begin(), out.variables.end(), name) != out.variables.end()) name += "_";
      out.variables.push_back(name);

      // The integral now acts linearly on the auxiliary variable.
      LinearTermSpec integral;
      integral.variable = aux;
      integral.kind = prod.integral == IntegralKind::Volterra ? TermKind::Volterra : TermKind::Fredholm;
      integral.order = 0;
      integral.kernel = prod.kernel->scaled(prod.weight);
      integral.lower = prod.lower;
      out.equations[e].linear.push_back(std::move(integral));

      // aux' - sum_i (prod_{j != i} u_j) u_i' = 0, identical factor lists merged.
      EquationSpec defining{{}, {}, Series(spec.basis, std::vector<double>{0.0})};
      LinearTermSpec lead;
      lead.variable = aux;
      lead.kind = TermKind::Diff;
      lead.order = 1;
      lead.coeff = Series(spec.basis, std::vector<double>{1.0});
      defining.linear.push_back(std::move(lead));
      std::map<std::vector<std::pair<std::size_t, int>>, double> chain;
      for (std::size_t i = 0; i < prod.factors.size(); ++i) {
        std::vector<std::pair<std::size_t, int>> key;
        for (std::size_t j = 0; j < prod.factors.size(); ++j) {
          const Factor& f = prod.factors[j];
          key.emplace_back(f.variable, f.order + (i == j ? 1 : 0));
        }
        std::sort(key.begin(), key.end());
        chain[key] -= 1.0;
      }
      for (const auto& [key, weight] : chain) {
        ProductTermSpec term;
        term.weight = weight;
        for (const auto& [v, order] : key) term.factors.push_back({v, order});
        defining.products.push_back(std::move(term));
      }
      out.equations.push_back(std::move(defining));

      ConditionSpec cond;
      cond.terms.push_back({aux, 0, initial->first, 1.0});
      cond.value = initial->second;
      cond.equation = out.equations.size() - 1;
      out.conditions.push_back(std::move(cond));
    }
    out.equations[e].products = std::move(kept);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Initial iterate

std::vector<Series> initial_iterate(const ProblemSpec& spec, std::vector<std::string>* warnings) {
  const std::size_t m = spec.variables.size();
  const std::size_t n = spec.settings.n;
  std::vector<Series> out;
  out.reserve(m);

  switch (spec.settings.initial) {
    case InitialPolicy::Zero:
      for (std::size_t v = 0; v < m; ++v) out.emplace_back(spec.basis, n);
      return out;
    case InitialPolicy::User:
      if (spec.settings.initial_coeffs.size() != m) {
        throw ValidationError("/solve/initial", "need one coefficient list per variable");
      }
      for (std::size_t v = 0; v < m; ++v) {
        out.push_back(Series(spec.basis, spec.settings.initial_coeffs[v]).resized(n));
      }
      return out;
    case InitialPolicy::Conditions:
      break;
  }

  for (std::size_t v = 0; v < m; ++v) {
    std::vector<const ConditionSpec*> own;
    for (const ConditionSpec& c : spec.conditions) {
      const bool only_v = std::all_of(c.terms.begin(), c.terms.end(),
                                      [v](const ConditionTerm& t) { return t.variable == v; });
      if (only_v && !c.terms.empty()) own.push_back(&c);
    }
    const std::size_t k = std::min(own.size(), n);
    if (k == 0) {
      out.emplace_back(spec.basis, n);
      continue;
    }
    Matrix a = Matrix::Zero(static_cast<Eigen::Index>(own.size()), static_cast<Eigen::Index>(k));
    Vector rhs(static_cast<Eigen::Index>(own.size()));
    for (std::size_t r = 0; r < own.size(); ++r) {
      for (const ConditionTerm& t : own[r]->terms) {
        a.row(static_cast<Eigen::Index>(r)) +=
            t.weight * condition_row(spec.basis, t.derivative, t.point, k).entries;
      }
      rhs(static_cast<Eigen::Index>(r)) = own[r]->value;
    }
    Vector coeffs;
    Eigen::FullPivLU<Matrix> lu(a);
    if (own.size() == k && lu.isInvertible()) {
      coeffs = lu.solve(rhs);
    } else {
      coeffs = a.completeOrthogonalDecomposition().solve(rhs);
      if (warnings) {
        warnings->push_back("conditions on '" + spec.variables[v] +
                            "' do not determine an interpolant; least-squares initial iterate used");
      }
    }
    out.push_back(Series(spec.basis, std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size()))
                      .resized(n));
  }
  return out;
}

}  // namespace tauspec
